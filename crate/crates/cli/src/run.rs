//! Command execution and artifact writing.
//!
//! Every command writes a `run_manifest.json` (the only artifact allowed to
//! contain timing) plus command-specific JSON/CSV files. Reports are scrubbed
//! of wall-clock fields before serialization so identical config + seed give
//! byte-identical artifacts.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mabuchi::linalg::{exp_hermitian, random_hermitian, GroupElement, HermitianPd};
use mabuchi::moment::{certificate, contact_set, Certificate};
use mabuchi::potentials::{hcma_residual, hcma_residual_with, AdmissiblePotential};
use mabuchi::projective::{ProjPoint, QuadratureGrid, FD_STEP};
use mabuchi::solver::{solve_on_grid, Barrier, SolveReport, SolverOptions};
use mabuchi::sweep::{
    gluing_check, sweep, DiscGrid, FamilyBarrier, Section10Kind, SweepReport,
};

use crate::config::{BarrierSpec, Command, FamilyName, RunConfig};

/// Failure after config validation. `code` follows the exit contract:
/// 1 = runtime error, 2 = config error discovered late (e.g. bad values file).
#[derive(Debug)]
pub struct AppError {
    pub code: i32,
    pub msg: String,
}

impl AppError {
    fn runtime(e: impl std::fmt::Display) -> Self {
        Self { code: 1, msg: e.to_string() }
    }

    fn config(e: impl std::fmt::Display) -> Self {
        Self { code: 2, msg: e.to_string() }
    }
}

impl From<mabuchi::Error> for AppError {
    fn from(e: mabuchi::Error) -> Self {
        AppError::runtime(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::runtime(e)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    core_version: &'static str,
    command: Command,
    started_unix_s: u64,
    wall_time_s: f64,
    threads: usize,
    grid_seed: u64,
    solver_seed: u64,
    cert_tol: f64,
    contact_eps_rel: f64,
    grad_floor: f64,
    beta_floor: f64,
    config: &'a RunConfig,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value).map_err(AppError::runtime)?;
    text.push('\n');
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), AppError> {
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

/// Wall time is the one nondeterministic field in a solve report; it moves
/// to the manifest.
fn scrub(report: &mut SolveReport) {
    report.wall_time_s = 0.0;
}

fn scrub_sweep(report: &mut SweepReport) {
    for fiber in &mut report.fibers {
        scrub(&mut fiber.report);
    }
}

/// Build the barrier described by the catalog entry. `grid` anchors
/// sampled-values barriers; `base` resolves relative paths.
fn build_barrier(
    spec: &BarrierSpec,
    grid: &QuadratureGrid,
    base: &Path,
) -> Result<Barrier<'static>, AppError> {
    match spec {
        BarrierSpec::Constant { c } => {
            let c = *c;
            Ok(Barrier::psh(move |_: &ProjPoint| c))
        }
        BarrierSpec::Admissible { diag, shift } => {
            let a = HermitianPd::from_diagonal(diag)?;
            let u = AdmissiblePotential::with_shift(a, *shift);
            Ok(Barrier::psh(move |x: &ProjPoint| u.eval(x)))
        }
        BarrierSpec::Section10Slice { z } => {
            let z = Complex64::new(z[0], z[1]);
            Ok(Barrier::psh(move |x: &ProjPoint| {
                mabuchi::sweep::section10_eval(Section10Kind::V0, z, x)
                    .expect("validated: |z| < 1, dimension 1")
            }))
        }
        BarrierSpec::Values { path } => {
            #[derive(serde::Deserialize)]
            #[serde(deny_unknown_fields)]
            struct ValuesFile {
                values: Vec<f64>,
            }
            let resolved = base.join(path);
            let text = std::fs::read_to_string(&resolved)
                .map_err(|e| AppError::config(format!("{}: {e}", resolved.display())))?;
            let file: ValuesFile = serde_json::from_str(&text)
                .map_err(|e| AppError::config(format!("{}: {e}", resolved.display())))?;
            let values = mabuchi::potentials::GridFunction::new(grid, file.values)
                .map_err(|e| AppError::config(format!("{}: {e}", resolved.display())))?;
            // positional lookup: the solver only evaluates barriers at grid
            // points, which are reused by reference, so bit-exact keys work
            let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(grid.len());
            for (i, p) in grid.points().iter().enumerate() {
                index.insert(point_key(p), i);
            }
            let values = values.values().to_vec();
            Ok(Barrier::new(move |x: &ProjPoint| {
                match index.get(&point_key(x)) {
                    Some(&i) => values[i],
                    None => f64::NAN, // off-grid: surfaced as a sampling error
                }
            }))
        }
    }
}

fn point_key(p: &ProjPoint) -> Vec<u64> {
    p.coords().iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect()
}

fn build_family(cfg: &RunConfig) -> Result<FamilyBarrier<'static>, AppError> {
    match cfg.family.expect("validated: family present") {
        FamilyName::Section10 => Ok(FamilyBarrier::section10()),
        FamilyName::Holomorphic => {
            let t0 = parse_matrix(cfg.t0.as_ref().expect("validated"), "t0")?;
            let t1 = parse_matrix(cfg.t1.as_ref().expect("validated"), "t1")?;
            Ok(FamilyBarrier::holomorphic(t0, t1).map_err(AppError::config)?)
        }
    }
}

fn parse_matrix(rows: &[Vec<[f64; 2]>], name: &str) -> Result<DMatrix<Complex64>, AppError> {
    let m = rows.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(AppError::config(format!("key \"{name}\": must be a square matrix")));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Execute one validated config. Returns the process exit code.
pub fn run(cfg: &RunConfig, out_dir: &Path, base: &Path) -> Result<i32, AppError> {
    std::fs::create_dir_all(out_dir)?;
    let started_unix_s =
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let opts = cfg.solver_options();

    let code = match cfg.command {
        Command::Solve => cmd_solve(cfg, &opts, out_dir, base)?,
        Command::Certify => cmd_certify(cfg, &opts, out_dir, base)?,
        Command::Sweep => cmd_sweep(cfg, &opts, out_dir)?,
        Command::Counterexample => cmd_counterexample(cfg, &opts, out_dir)?,
        Command::GeodesicCheck => cmd_geodesic_check(cfg, out_dir)?,
        Command::Uniqueness => cmd_uniqueness(cfg, out_dir)?,
    };

    let manifest = Manifest {
        tool: "mabuchi",
        tool_version: env!("CARGO_PKG_VERSION"),
        core_version: mabuchi::VERSION,
        command: cfg.command,
        started_unix_s,
        wall_time_s: clock.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        grid_seed: opts.grid_seed,
        solver_seed: opts.seed,
        cert_tol: opts.cert_tol,
        contact_eps_rel: opts.contact_eps_rel,
        grad_floor: opts.grad_floor,
        beta_floor: opts.beta_floor,
        config: cfg,
    };
    write_json(out_dir, "run_manifest.json", &manifest)?;
    Ok(code)
}

fn cmd_solve(
    cfg: &RunConfig,
    opts: &SolverOptions,
    out_dir: &Path,
    base: &Path,
) -> Result<i32, AppError> {
    let grid = opts.build_grid()?;
    let barrier = build_barrier(cfg.barrier.as_ref().expect("validated"), &grid, base)?;
    let mut report = solve_on_grid(cfg.problem, &barrier, &grid, opts, None)?;
    write_text(out_dir, "trace.csv", &report.trace_csv())?;
    scrub(&mut report);
    write_json(out_dir, "report.json", &report)?;
    Ok(if report.is_certified() { 0 } else { 3 })
}

#[derive(Serialize)]
struct CertifyReport {
    problem: mabuchi::moment::ProblemKind,
    matrix_diag: Vec<f64>,
    shift: f64,
    energy: f64,
    contact_count: usize,
    certificate: Certificate,
}

fn cmd_certify(
    cfg: &RunConfig,
    opts: &SolverOptions,
    out_dir: &Path,
    base: &Path,
) -> Result<i32, AppError> {
    let grid = opts.build_grid()?;
    let barrier = build_barrier(cfg.barrier.as_ref().expect("validated"), &grid, base)?;
    let diag = cfg.matrix_diag.clone().expect("validated");
    let a = HermitianPd::from_diagonal(&diag)?;
    let u = AdmissiblePotential::new(a.clone());
    let u_vals = grid.evaluate(|x| u.eval(x));
    let v_vals = barrier.sample(&grid)?;
    // tight shift: touch the barrier from the required side
    let shift = match cfg.problem {
        mabuchi::moment::ProblemKind::Min => u_vals
            .iter()
            .zip(&v_vals)
            .map(|(uu, vv)| vv - uu)
            .fold(f64::NEG_INFINITY, f64::max),
        mabuchi::moment::ProblemKind::Max => u_vals
            .iter()
            .zip(&v_vals)
            .map(|(uu, vv)| vv - uu)
            .fold(f64::INFINITY, f64::min),
    };
    let shifted: Vec<f64> = u_vals.iter().map(|x| x + shift).collect();
    let contact = contact_set(cfg.problem, &shifted, &v_vals, opts.contact_eps_rel)?;
    let points: Vec<ProjPoint> = contact.iter().map(|&i| grid.points()[i].clone()).collect();
    let gamma = GroupElement::new(a.sqrt().matrix().clone())?;
    let mut cert = certificate(&points, &gamma, opts.cert_tol)?;
    cert.indices = contact;
    let report = CertifyReport {
        problem: cfg.problem,
        matrix_diag: diag,
        shift,
        energy: a.log_det() / a.dim() as f64 + shift,
        contact_count: cert.indices.len(),
        certificate: cert,
    };
    write_json(out_dir, "certificate.json", &report)?;
    Ok(if report.certificate.pass { 0 } else { 3 })
}

fn write_sweep_artifacts(report: &SweepReport, out_dir: &Path) -> Result<(), AppError> {
    write_json(out_dir, "sweep.json", report)?;
    write_text(out_dir, "chi.csv", &report.chi_csv())?;
    write_text(out_dir, "laplacian.csv", &report.laplacian_csv())?;
    write_text(out_dir, "radius.csv", &report.radius_csv())?;
    if report.psh.is_some() {
        write_text(out_dir, "psh_min_eig.csv", &report.psh_csv())?;
    }
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, opts: &SolverOptions, out_dir: &Path) -> Result<i32, AppError> {
    let family = build_family(cfg)?;
    let disc =
        DiscGrid::new(cfg.disc_radius(), cfg.disc_step()).map_err(AppError::config)?;
    let mut report = sweep(&family, &disc, opts)?;
    scrub_sweep(&mut report);
    write_sweep_artifacts(&report, out_dir)?;
    Ok(if report.flagged.is_empty() { 0 } else { 3 })
}

#[derive(Serialize)]
struct CounterexampleSummary {
    fibers: usize,
    flagged: usize,
    /// max over fibers of |χ(z) − |z|²/2|
    chi_law_max_err: f64,
    /// max relative Frobenius distance (mod scale) to diag(e^{2|z|²}, e^{−|z|²})
    matrix_law_max_err: f64,
    /// max over fibers of |log r(z) − 3|z|²/2|
    radius_law_max_err: f64,
    laplacian_min: f64,
    psh_min_eigenvalue: f64,
    gluing_seam_mismatch: f64,
    gluing_seam_derivative: f64,
    gluing_max_v0_jump: f64,
    checks: CounterexampleChecks,
    pass: bool,
}

#[derive(Serialize)]
struct CounterexampleChecks {
    all_certified: bool,
    chi_law: bool,
    matrix_law: bool,
    radius_law: bool,
    laplacian_subharmonic: bool,
    psh_failure_witnessed: bool,
    gluing_ok: bool,
}

fn cmd_counterexample(
    cfg: &RunConfig,
    opts: &SolverOptions,
    out_dir: &Path,
) -> Result<i32, AppError> {
    let family = FamilyBarrier::section10();
    let disc =
        DiscGrid::new(cfg.disc_radius(), cfg.disc_step()).map_err(AppError::config)?;
    let mut report = sweep(&family, &disc, opts)?;
    scrub_sweep(&mut report);

    let mut chi_err = 0.0f64;
    let mut mat_err = 0.0f64;
    let mut rad_err = 0.0f64;
    for f in &report.fibers {
        let a2 = f.z[0] * f.z[0] + f.z[1] * f.z[1];
        chi_err = chi_err.max((f.chi - a2 / 2.0).abs());
        let target = HermitianPd::from_diagonal(&[(2.0 * a2).exp(), (-a2).exp()])?;
        mat_err = mat_err.max(f.report.matrix.rel_distance_mod_scale(&target));
        if let Some(r) = f.contact_radius {
            rad_err = rad_err.max((r.ln() - 1.5 * a2).abs());
        } else {
            rad_err = f64::INFINITY;
        }
    }
    let psh_min = report.psh.as_ref().map(|p| p.min_eigenvalue).unwrap_or(f64::NAN);
    let gluing = gluing_check()?;
    let checks = CounterexampleChecks {
        all_certified: report.flagged.is_empty(),
        chi_law: chi_err <= 2e-3,
        matrix_law: mat_err <= 1e-3,
        radius_law: rad_err <= 0.02,
        laplacian_subharmonic: report.laplacian.min_value >= -5e-3,
        psh_failure_witnessed: psh_min <= -0.5,
        gluing_ok: gluing.seam_mismatch.abs() <= 1e-8
            && gluing.seam_derivative.abs() <= 1e-8
            && gluing.max_v0_jump <= 1e-8,
    };
    let pass = checks.all_certified
        && checks.chi_law
        && checks.matrix_law
        && checks.radius_law
        && checks.laplacian_subharmonic
        && checks.psh_failure_witnessed
        && checks.gluing_ok;
    let summary = CounterexampleSummary {
        fibers: report.fibers.len(),
        flagged: report.flagged.len(),
        chi_law_max_err: chi_err,
        matrix_law_max_err: mat_err,
        radius_law_max_err: rad_err,
        laplacian_min: report.laplacian.min_value,
        psh_min_eigenvalue: psh_min,
        gluing_seam_mismatch: gluing.seam_mismatch,
        gluing_seam_derivative: gluing.seam_derivative,
        gluing_max_v0_jump: gluing.max_v0_jump,
        checks,
        pass,
    };
    write_sweep_artifacts(&report, out_dir)?;
    write_json(out_dir, "summary.json", &summary)?;
    Ok(if pass { 0 } else { 3 })
}

#[derive(Serialize)]
struct HcmaReport {
    dimension: usize,
    seed: u64,
    fd_step: f64,
    /// residual of a group-orbit family (an exact solution)
    solution_residual: f64,
    solution_threshold: f64,
    /// residual of the perturbed non-solution
    nonsolution_residual: f64,
    nonsolution_floor: f64,
    pass: bool,
}

fn cmd_geodesic_check(cfg: &RunConfig, out_dir: &Path) -> Result<i32, AppError> {
    let m = cfg.dimension + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    let g = GroupElement::new(exp_hermitian(&random_hermitian(m, 0.4, &mut rng))?.matrix().clone())?;
    let z_dir = random_hermitian(m, 0.8, &mut rng);
    let samples: Vec<(Complex64, ProjPoint)> = (0..6)
        .map(|_| {
            use rand::Rng;
            let s = Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            let v: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            (s, ProjPoint::normalize(&v).expect("random vectors are nonzero"))
        })
        .collect();
    let solution_residual = hcma_residual(&g, &z_dir, &samples, FD_STEP)?;
    // the same orbit family plus a non-harmonic bump is no longer a solution
    let phi_bad = |s: Complex64, x: &ProjPoint| -> f64 {
        let gs = mabuchi::linalg::expm(&(&z_dir * s)) * g.matrix();
        let gram = gs.adjoint() * &gs;
        let quad: f64 = {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    acc += x.coords()[i].conj() * gram[(i, j)] * x.coords()[j];
                }
            }
            acc.re
        };
        quad.ln() + s.norm_sqr() * x.coords()[m - 1].norm_sqr()
    };
    let nonsolution_residual = hcma_residual_with(&phi_bad, &samples, FD_STEP)?;
    let report = HcmaReport {
        dimension: cfg.dimension,
        seed: cfg.solver.seed,
        fd_step: FD_STEP,
        solution_residual,
        solution_threshold: 1e-4,
        nonsolution_residual,
        nonsolution_floor: 1e-2,
        pass: solution_residual <= 1e-4 && nonsolution_residual >= 1e-2,
    };
    write_json(out_dir, "hcma_residual.json", &report)?;
    Ok(if report.pass { 0 } else { 3 })
}

fn cmd_uniqueness(cfg: &RunConfig, out_dir: &Path) -> Result<i32, AppError> {
    let spectrum = cfg.spectrum.as_ref().expect("validated");
    let report = mabuchi::moment::uniqueness_check(spectrum).map_err(AppError::config)?;
    let fails = matches!(report.verdict, mabuchi::moment::UniquenessVerdict::Fails);
    write_json(out_dir, "uniqueness.json", &report)?;
    Ok(if fails { 3 } else { 0 })
}
