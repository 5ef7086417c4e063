//! Run configuration: a single JSON document per run.
//!
//! Flags stay minimal (--config, --out, --threads, --seed-override); every
//! scenario parameter lives in the config file so runs are reviewable and
//! versionable. Unknown keys are rejected and error messages name the
//! offending key.

use std::path::{Path, PathBuf};

use mabuchi::moment::ProblemKind;
use mabuchi::solver::SolverOptions;
use serde::{Deserialize, Serialize};

/// Schema-level failure: maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const COMMANDS: [&str; 6] =
    ["solve", "certify", "sweep", "counterexample", "geodesic-check", "uniqueness"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Certify,
    Sweep,
    Counterexample,
    GeodesicCheck,
    Uniqueness,
}

/// Barrier catalog. `values` references a JSON file `{"values": [...]}` whose
/// length must match the quadrature grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BarrierSpec {
    Constant {
        c: f64,
    },
    Admissible {
        diag: Vec<f64>,
        #[serde(default)]
        shift: f64,
    },
    /// One z-slice of the two-regime family (ℙ¹ only).
    Section10Slice {
        z: [f64; 2],
    },
    Values {
        path: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Section10,
    Holomorphic,
}

/// Solver knobs: everything in [`SolverOptions`] except the grid fields,
/// which live at the top level of the config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverKnobs {
    pub max_iters: usize,
    pub cert_tol: f64,
    pub contact_eps_rel: f64,
    pub restart_count: usize,
    pub seed: u64,
    pub beta0: f64,
    pub beta_floor: f64,
    pub grad_floor: f64,
}

impl Default for SolverKnobs {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            max_iters: d.max_iters,
            cert_tol: d.cert_tol,
            contact_eps_rel: d.contact_eps_rel,
            restart_count: d.restart_count,
            seed: d.seed,
            beta0: d.beta0,
            beta_floor: d.beta_floor,
            grad_floor: d.grad_floor,
        }
    }
}

fn default_dimension() -> usize {
    1
}

fn default_resolution() -> usize {
    SolverOptions::default().grid_resolution
}

fn default_grid_seed() -> u64 {
    SolverOptions::default().grid_seed
}

fn default_problem() -> ProblemKind {
    ProblemKind::Min
}

/// One run, fully described. Optional sections are validated per command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_problem")]
    pub problem: ProblemKind,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_resolution")]
    pub grid_resolution: usize,
    #[serde(default = "default_grid_seed")]
    pub grid_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier: Option<BarrierSpec>,
    /// Candidate matrix diagonal for `certify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_diag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyName>,
    /// Rows of [re, im] pairs; required when family = "holomorphic".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<Vec<Vec<[f64; 2]>>>,
    /// Disc radius for sweep/counterexample (default 0.9).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Disc lattice spacing for sweep/counterexample (default 0.05).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Traceless spectrum for `uniqueness`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverKnobs,
    /// Output directory; the --out flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Assembled solver options (top-level grid fields + solver knobs).
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            dimension: self.dimension,
            grid_resolution: self.grid_resolution,
            grid_seed: self.grid_seed,
            max_iters: self.solver.max_iters,
            cert_tol: self.solver.cert_tol,
            contact_eps_rel: self.solver.contact_eps_rel,
            restart_count: self.solver.restart_count,
            seed: self.solver.seed,
            beta0: self.solver.beta0,
            beta_floor: self.solver.beta_floor,
            grad_floor: self.solver.grad_floor,
        }
    }

    pub fn disc_radius(&self) -> f64 {
        self.radius.unwrap_or(0.9)
    }

    pub fn disc_step(&self) -> f64 {
        self.step.unwrap_or(0.05)
    }

    pub fn override_seeds(&mut self, seed: u64) {
        self.grid_seed = seed;
        self.solver.seed = seed;
    }
}

/// Parse + validate a config document. `base` resolves relative file
/// references (normally the directory containing the config file).
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let raw: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| ConfigError(format!("not valid JSON: {e}")))?;
    let obj = raw
        .as_object()
        .ok_or_else(|| ConfigError("top level must be a JSON object".into()))?;
    // name the "command" key explicitly: it routes everything else
    match obj.get("command") {
        None => return Err(ConfigError("missing key \"command\"".into())),
        Some(serde_json::Value::String(s)) if COMMANDS.contains(&s.as_str()) => {}
        Some(v) => {
            return Err(ConfigError(format!(
                "key \"command\": got {v}, expected one of {:?}",
                COMMANDS
            )))
        }
    }
    let cfg: RunConfig =
        serde_json::from_value(raw).map_err(|e| ConfigError(e.to_string()))?;
    validate(&cfg, base)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig, base: &Path) -> Result<(), ConfigError> {
    let err = |msg: String| Err(ConfigError(msg));
    if !(1..=3).contains(&cfg.dimension) {
        return err(format!("key \"dimension\": got {}, expected 1, 2, or 3", cfg.dimension));
    }
    if let Err(e) = cfg.solver_options().validate() {
        return err(format!("solver options: {e}"));
    }
    if let Some(r) = cfg.radius {
        if !(r > 0.0) || !r.is_finite() {
            return err(format!("key \"radius\": got {r}, expected a finite value > 0"));
        }
    }
    if let Some(s) = cfg.step {
        if !(s > 0.0) || !s.is_finite() {
            return err(format!("key \"step\": got {s}, expected a finite value > 0"));
        }
    }
    match cfg.command {
        Command::Solve => {
            if cfg.barrier.is_none() {
                return err("command \"solve\" requires key \"barrier\"".into());
            }
        }
        Command::Certify => {
            if cfg.barrier.is_none() {
                return err("command \"certify\" requires key \"barrier\"".into());
            }
            match &cfg.matrix_diag {
                None => {
                    return err("command \"certify\" requires key \"matrix_diag\"".into())
                }
                Some(d) => {
                    if d.len() != cfg.dimension + 1 {
                        return err(format!(
                            "key \"matrix_diag\": got {} entries, expected dimension+1 = {}",
                            d.len(),
                            cfg.dimension + 1
                        ));
                    }
                    if d.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                        return err(
                            "key \"matrix_diag\": entries must be finite and > 0".into()
                        );
                    }
                }
            }
        }
        Command::Sweep => {
            let Some(family) = cfg.family else {
                return err("command \"sweep\" requires key \"family\"".into());
            };
            if family == FamilyName::Holomorphic && (cfg.t0.is_none() || cfg.t1.is_none()) {
                return err("family \"holomorphic\" requires keys \"t0\" and \"t1\"".into());
            }
            if family == FamilyName::Section10 && cfg.dimension != 1 {
                return err("family \"section10\" requires \"dimension\": 1".into());
            }
        }
        Command::Counterexample => {
            if cfg.dimension != 1 {
                return err("command \"counterexample\" requires \"dimension\": 1".into());
            }
        }
        Command::GeodesicCheck => {}
        Command::Uniqueness => match &cfg.spectrum {
            None => return err("command \"uniqueness\" requires key \"spectrum\"".into()),
            Some(a) => {
                if a.len() < 2 {
                    return err("key \"spectrum\": need at least 2 entries".into());
                }
                let scale = a.iter().fold(0.0f64, |m, &x| m.abs().max(x.abs()));
                let sum: f64 = a.iter().sum();
                if scale == 0.0 || sum.abs() > 1e-10 * scale {
                    return err(format!(
                        "key \"spectrum\": must be nonzero and traceless, got sum {sum}"
                    ));
                }
            }
        },
    }
    if let Some(BarrierSpec::Section10Slice { z }) = &cfg.barrier {
        if cfg.dimension != 1 {
            return err("barrier \"section10_slice\" requires \"dimension\": 1".into());
        }
        if z[0] * z[0] + z[1] * z[1] >= 1.0 {
            return err(format!("barrier \"section10_slice\": |z| must be < 1, got {z:?}"));
        }
    }
    if let Some(BarrierSpec::Values { path }) = &cfg.barrier {
        let resolved = base.join(path);
        if !resolved.exists() {
            return err(format!(
                "barrier \"values\": referenced file {} does not exist",
                resolved.display()
            ));
        }
    }
    Ok(())
}
