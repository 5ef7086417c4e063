//! Barrier families over a parameter disc: per-fiber extremal solves, the
//! fiber energy χ, determinant-line bridges, subharmonicity diagnostics, and
//! the two-regime counterexample family.
//!
//! The headline computation: a family of barriers v̄(z,·) over a disc induces
//! the fiber energy χ(z) = min{E(u) : u admissible, u ≥ v̄(z,·)}. For
//! plurisubharmonic families χ is subharmonic (verified here through a
//! discrete Laplacian), and m·χ is the curvature potential of a determinant
//! line. The two-regime family shows the contrast: χ stays subharmonic while
//! the fiberwise minimizers themselves fail to be plurisubharmonic in (z,x).

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::herm_eigen;
use crate::moment::{contact_radius_p1, ProblemKind};
use crate::projective::{fd_hermitian_form, fs_potential_chart, ProjPoint, QuadratureGrid};
use crate::solver::{solve_on_grid, Barrier, SolveReport, SolverOptions};
use crate::{parallel, Error, Result};

// ---------------------------------------------------------------------------
// disc lattice
// ---------------------------------------------------------------------------

/// Square-lattice sample of the closed disc |z| ≤ radius with spacing `step`,
/// always containing z = 0. Samples are ordered row-major in (i, j) with
/// z = (i + i·j)·step, which fixes the ordering of every derived report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscGrid {
    radius: f64,
    step: f64,
    coords: Vec<(i64, i64)>,
}

impl DiscGrid {
    pub fn new(radius: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidArgument {
                name: "step",
                reason: "must be finite and > 0".into(),
            });
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument {
                name: "radius",
                reason: "must be finite and > 0".into(),
            });
        }
        let n = (radius / step).floor() as i64;
        let mut coords = Vec::new();
        let r2 = radius * radius * (1.0 + 1e-12);
        for i in -n..=n {
            for j in -n..=n {
                let (x, y) = (i as f64 * step, j as f64 * step);
                if x * x + y * y <= r2 {
                    coords.push((i, j));
                }
            }
        }
        Ok(Self { radius, step, coords })
    }

    /// The two-regime family lives on the open unit disc; staying at
    /// ρ = 0.9 with δ = 0.05 avoids the boundary regime.
    pub fn default_disc() -> Self {
        Self::new(0.9, 0.05).expect("static parameters")
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn z(&self, k: usize) -> Complex64 {
        let (i, j) = self.coords[k];
        Complex64::new(i as f64 * self.step, j as f64 * self.step)
    }

    pub fn coords(&self) -> &[(i64, i64)] {
        &self.coords
    }

    fn index_map(&self) -> HashMap<(i64, i64), usize> {
        self.coords.iter().enumerate().map(|(k, &c)| (c, k)).collect()
    }
}

// ---------------------------------------------------------------------------
// the two-regime closed forms
// ---------------------------------------------------------------------------

/// Pieces of the two-regime barrier construction on ℙ¹.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section10Kind {
    /// The fiberwise minimizer: log of the diag(e^{2|z|²}, e^{−|z|²}) form.
    U0,
    /// Radial envelope piece −(1/3)·log(t/2) + log(3t/2·|x̂₀|²), t = |x₁/x₀|²;
    /// −∞ at both poles (as a limit).
    U1,
    /// Boundary piece −1 + log(e³|x̂₀|² + |x̂₁|²).
    U2,
    /// U1 and U2 glued along t = 2e³ (second-order tangency).
    U12,
    /// The barrier: U0 inside t ≤ 2e^{3|z|²}, U12 outside. Finite and
    /// continuous on the whole product.
    V0,
}

/// Closed-form evaluation of the two-regime functions. The z-dependent kinds
/// require |z| < 1; `U1` (and `U12` at the x₀-pole) take the value −∞, which
/// is returned as a sentinel, not an error.
pub fn section10_eval(kind: Section10Kind, z: Complex64, x: &ProjPoint) -> Result<f64> {
    if x.m() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "two-regime formulas live on ℙ¹, got a point in ℂ^{}",
            x.m()
        )));
    }
    let a = z.norm_sqr();
    if matches!(kind, Section10Kind::U0 | Section10Kind::V0) && a >= 1.0 {
        return Err(Error::InvalidArgument {
            name: "z",
            reason: format!("|z| = {} must be < 1", a.sqrt()),
        });
    }
    let n0 = x.coords()[0].norm_sqr();
    let n1 = x.coords()[1].norm_sqr();
    let e3 = (3.0f64).exp();
    let u0 = |aa: f64| ((2.0 * aa).exp() * n0 + (-aa).exp() * n1).ln();
    let u1 = || {
        if n0 <= 0.0 || n1 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let t = n1 / n0;
        -(0.5 * t).ln() / 3.0 + (1.5 * n1).ln()
    };
    let u2 = || (e3 * n0 + n1).ln() - 1.0;
    let u12 = || if n1 <= 2.0 * e3 * n0 { u1() } else { u2() };
    Ok(match kind {
        Section10Kind::U0 => u0(a),
        Section10Kind::U1 => u1(),
        Section10Kind::U2 => u2(),
        Section10Kind::U12 => u12(),
        Section10Kind::V0 => {
            if n1 <= 2.0 * (3.0 * a).exp() * n0 {
                u0(a)
            } else {
                u12()
            }
        }
    })
}

/// Seam diagnostics of the two-regime gluing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GluingReport {
    /// (U2 − U1) at the seam t = 2e³.
    pub seam_mismatch: f64,
    /// d/dt (U2 − U1) at the seam (central finite difference).
    pub seam_derivative: f64,
    /// Largest |V0(in) − V0(out)| over random straddles of t = 2e^{3|z|²}.
    pub max_v0_jump: f64,
}

pub fn gluing_check() -> Result<GluingReport> {
    let point_at = |t: f64, phase: f64| -> Result<ProjPoint> {
        let r = t.sqrt();
        ProjPoint::normalize(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(r * phase.cos(), r * phase.sin()),
        ])
    };
    let diff = |t: f64| -> Result<f64> {
        let x = point_at(t, 0.0)?;
        Ok(section10_eval(Section10Kind::U2, Complex64::new(0.0, 0.0), &x)?
            - section10_eval(Section10Kind::U1, Complex64::new(0.0, 0.0), &x)?)
    };
    let seam = 2.0 * (3.0f64).exp();
    let seam_mismatch = diff(seam)?;
    let h = 1e-2;
    let seam_derivative = (diff(seam + h)? - diff(seam - h)?) / (2.0 * h);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut max_v0_jump: f64 = 0.0;
    for _ in 0..10 {
        let zr = 0.95 * rng.gen::<f64>().sqrt();
        let zth = std::f64::consts::TAU * rng.gen::<f64>();
        let z = Complex64::new(zr * zth.cos(), zr * zth.sin());
        let phase = std::f64::consts::TAU * rng.gen::<f64>();
        let t_star = 2.0 * (3.0 * z.norm_sqr()).exp();
        let inner = section10_eval(Section10Kind::V0, z, &point_at(t_star * (1.0 - 1e-9), phase)?)?;
        let outer = section10_eval(Section10Kind::V0, z, &point_at(t_star * (1.0 + 1e-9), phase)?)?;
        max_v0_jump = max_v0_jump.max((inner - outer).abs());
    }
    Ok(GluingReport { seam_mismatch, seam_derivative, max_v0_jump })
}

// ---------------------------------------------------------------------------
// barrier families
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Section10,
    Holomorphic,
    Custom,
}

/// A z-parametrized barrier over the disc.
pub struct FamilyBarrier<'a> {
    kind: FamilyKind,
    f: Box<dyn Fn(Complex64, &ProjPoint) -> f64 + Sync + 'a>,
    claimed_psh: bool,
    /// (T0, T1) for the holomorphic kind, kept for invertibility checks.
    matrices: Option<(DMatrix<Complex64>, DMatrix<Complex64>)>,
}

impl<'a> FamilyBarrier<'a> {
    /// The two-regime counterexample barrier V0 on ℙ¹.
    pub fn section10() -> FamilyBarrier<'static> {
        FamilyBarrier {
            kind: FamilyKind::Section10,
            f: Box::new(|z, x| {
                section10_eval(Section10Kind::V0, z, x).expect("V0 is total on the open disc")
            }),
            claimed_psh: true,
            matrices: None,
        }
    }

    /// v̄(z, x) = log‖(T0 + z·T1)x̂‖²: plurisubharmonic in (z, x) as the log
    /// of a sum of squared moduli of holomorphic functions.
    pub fn holomorphic(
        t0: DMatrix<Complex64>,
        t1: DMatrix<Complex64>,
    ) -> Result<FamilyBarrier<'static>> {
        if !t0.is_square() || t0.shape() != t1.shape() {
            return Err(Error::DimensionMismatch(format!(
                "T0 is {:?} and T1 is {:?}; both must be square and equal",
                t0.shape(),
                t1.shape()
            )));
        }
        let (a, b) = (t0.clone(), t1.clone());
        Ok(FamilyBarrier {
            kind: FamilyKind::Holomorphic,
            f: Box::new(move |z, x| {
                let m = a.nrows();
                let mut nrm2 = 0.0;
                for r in 0..m {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..m {
                        acc += (a[(r, c)] + z * b[(r, c)]) * x.coords()[c];
                    }
                    nrm2 += acc.norm_sqr();
                }
                nrm2.ln()
            }),
            claimed_psh: true,
            matrices: Some((t0, t1)),
        })
    }

    pub fn custom(
        f: impl Fn(Complex64, &ProjPoint) -> f64 + Sync + 'a,
        claimed_psh: bool,
    ) -> FamilyBarrier<'a> {
        FamilyBarrier { kind: FamilyKind::Custom, f: Box::new(f), claimed_psh, matrices: None }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn claims_psh(&self) -> bool {
        self.claimed_psh
    }

    pub fn eval(&self, z: Complex64, x: &ProjPoint) -> f64 {
        (self.f)(z, x)
    }

    /// The fixed-z slice as a solver barrier.
    pub fn barrier_at(&self, z: Complex64) -> Barrier<'_> {
        if self.claimed_psh {
            Barrier::psh(move |x: &ProjPoint| (self.f)(z, x))
        } else {
            Barrier::new(move |x: &ProjPoint| (self.f)(z, x))
        }
    }

    /// For the holomorphic kind: T0 + z·T1 must stay invertible on samples.
    fn check_invertible(&self, disc: &DiscGrid) -> Result<()> {
        let Some((t0, t1)) = &self.matrices else { return Ok(()) };
        let scale = t0.norm().max(t1.norm());
        for k in 0..disc.len() {
            let z = disc.z(k);
            let det = (t0 + t1 * z).determinant();
            if det.norm() <= 1e-12 * scale.powi(t0.nrows() as i32) {
                return Err(Error::InvalidArgument {
                    name: "family",
                    reason: format!("T0 + z·T1 is singular at z = {z}"),
                });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// derived maps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaplacianEntry {
    pub index: usize,
    pub z: [f64; 2],
    pub value: f64,
}

/// 5-point discrete Laplacian over the interior of a disc lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaplacianReport {
    pub entries: Vec<LaplacianEntry>,
    pub min_value: f64,
    pub min_z: [f64; 2],
}

pub fn discrete_laplacian(disc: &DiscGrid, values: &[f64]) -> Result<LaplacianReport> {
    if values.len() != disc.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a {}-point disc",
            values.len(),
            disc.len()
        )));
    }
    let index = disc.index_map();
    let d2 = disc.step * disc.step;
    let mut entries = Vec::new();
    let mut min_value = f64::INFINITY;
    let mut min_z = [0.0, 0.0];
    for (k, &(i, j)) in disc.coords.iter().enumerate() {
        let neighbors = [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)];
        let Some(sum) = neighbors
            .iter()
            .map(|c| index.get(c).map(|&n| values[n]))
            .try_fold(0.0, |acc, v| v.map(|v| acc + v))
        else {
            continue;
        };
        let value = (sum - 4.0 * values[k]) / d2;
        let z = disc.z(k);
        if value < min_value {
            min_value = value;
            min_z = [z.re, z.im];
        }
        entries.push(LaplacianEntry { index: k, z: [z.re, z.im], value });
    }
    if entries.is_empty() {
        return Err(Error::InvalidArgument {
            name: "disc",
            reason: "no interior 5-point stencil; enlarge radius or shrink step".into(),
        });
    }
    Ok(LaplacianReport { entries, min_value, min_z })
}

/// Log-determinant-ratio curves of the induced metric on the determinant
/// line, in both sign conventions. The point-convention value m·χ is the one
/// whose subharmonicity is convention-independent; the hyperplane-convention
/// value −m·χ is emitted alongside, labeled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetBridge {
    pub point_convention: Vec<f64>,
    pub hyperplane_convention: Vec<f64>,
}

pub fn det_bridge(chi: &[f64], m: usize) -> DetBridge {
    DetBridge {
        point_convention: chi.iter().map(|&c| m as f64 * c).collect(),
        hyperplane_convention: chi.iter().map(|&c| -(m as f64) * c).collect(),
    }
}

/// Minimum eigenvalue of the product-space form π*ω + i∂∂̄u over samples:
/// at each (z₀, x₀) the function log(1+‖w‖²) + u(s, x(w)) is differenced in
/// the combined chart (s, w) anchored at x₀, and the smallest eigenvalue of
/// the resulting Hermitian form is recorded. The form is degenerate in the
/// base direction for z-independent u, so ≈ 0 eigenvalues are expected there;
/// genuine failure of plurisubharmonicity shows up as eigenvalues bounded
/// away from zero below.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PshReport {
    pub min_eigenvalue: f64,
    pub argmin_z: [f64; 2],
    pub argmin_sample: usize,
    pub sample_z: Vec<[f64; 2]>,
    pub sample_eigenvalues: Vec<f64>,
}

pub fn psh_check_product(
    u: &(dyn Fn(Complex64, &ProjPoint) -> f64 + Sync),
    samples: &[(Complex64, ProjPoint)],
    step: f64,
) -> Result<PshReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("psh_check_product samples"));
    }
    let mut sample_eigenvalues = Vec::with_capacity(samples.len());
    let mut sample_z = Vec::with_capacity(samples.len());
    let mut min_eigenvalue = f64::INFINITY;
    let mut argmin_z = [0.0, 0.0];
    let mut argmin_sample = 0;
    for (k, (z0, x0)) in samples.iter().enumerate() {
        let anchor = x0.chart_anchor();
        let w0 = x0.to_chart(anchor)?;
        let mut center = vec![*z0];
        center.extend_from_slice(&w0);
        let f = |pt: &[Complex64]| -> f64 {
            match ProjPoint::from_chart(anchor, &pt[1..]) {
                Ok(x) => fs_potential_chart(&pt[1..]) + u(pt[0], &x),
                Err(_) => f64::NAN,
            }
        };
        let form = fd_hermitian_form(&f, &center, step)?;
        let eig = herm_eigen(&form);
        let lo = eig.values[0];
        sample_eigenvalues.push(lo);
        sample_z.push([z0.re, z0.im]);
        if lo < min_eigenvalue {
            min_eigenvalue = lo;
            argmin_z = [z0.re, z0.im];
            argmin_sample = k;
        }
    }
    Ok(PshReport { min_eigenvalue, argmin_z, argmin_sample, sample_z, sample_eigenvalues })
}

// ---------------------------------------------------------------------------
// the sweep
// ---------------------------------------------------------------------------

/// One fiber of a sweep. The embedded solve report has its per-iteration
/// trace dropped (sweeps would otherwise serialize millions of rows); the
/// standalone solver keeps traces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberResult {
    pub z: [f64; 2],
    pub chi: f64,
    pub certified: bool,
    /// Balance radius of the certified contact configuration (ℙ¹ only).
    pub contact_radius: Option<f64>,
    /// u(z,·) + c at the coordinate poles (0), …, (m−1).
    pub marked_potentials: Vec<f64>,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: FamilyKind,
    pub disc: DiscGrid,
    pub fibers: Vec<FiberResult>,
    /// Indices of fibers whose solve finished uncertified.
    pub flagged: Vec<usize>,
    pub laplacian: LaplacianReport,
    pub bridge: DetBridge,
    /// Product-space subharmonicity of the *minimizer* family; filled for
    /// the two-regime family, where the closed-form minimizer is certified
    /// fiberwise by the solves themselves.
    pub psh: Option<PshReport>,
}

impl SweepReport {
    pub fn chi(&self) -> Vec<f64> {
        self.fibers.iter().map(|f| f.chi).collect()
    }

    pub fn chi_csv(&self) -> String {
        let mut out = String::from("re_z,im_z,chi\n");
        for f in &self.fibers {
            out.push_str(&format!("{:.9e},{:.9e},{:.12e}\n", f.z[0], f.z[1], f.chi));
        }
        out
    }

    pub fn laplacian_csv(&self) -> String {
        let mut out = String::from("re_z,im_z,laplacian\n");
        for e in &self.laplacian.entries {
            out.push_str(&format!("{:.9e},{:.9e},{:.12e}\n", e.z[0], e.z[1], e.value));
        }
        out
    }

    pub fn radius_csv(&self) -> String {
        let mut out = String::from("re_z,im_z,contact_radius\n");
        for f in &self.fibers {
            if let Some(r) = f.contact_radius {
                out.push_str(&format!("{:.9e},{:.9e},{:.12e}\n", f.z[0], f.z[1], r));
            }
        }
        out
    }

    pub fn psh_csv(&self) -> String {
        let mut out = String::from("re_z,im_z,min_eigenvalue\n");
        if let Some(p) = &self.psh {
            for (z, &v) in p.sample_z.iter().zip(&p.sample_eigenvalues) {
                out.push_str(&format!("{:.9e},{:.9e},{:.12e}\n", z[0], z[1], v));
            }
        }
        out
    }
}

/// Per-fiber certified min-solves over the disc, assembled into χ and its
/// derived maps. Fibers are solved center-outward with warm starts from the
/// previous fiber; an uncertified fiber is flagged and the sweep continues.
pub fn sweep(
    family: &FamilyBarrier,
    disc: &DiscGrid,
    opts: &SolverOptions,
) -> Result<SweepReport> {
    if disc.is_empty() {
        return Err(Error::EmptyInput("disc grid"));
    }
    family.check_invertible(disc)?;
    let grid = opts.build_grid()?;
    let m = grid.m();

    // center-outward order keeps warm starts between adjacent fibers
    let mut order: Vec<usize> = (0..disc.len()).collect();
    order.sort_by_key(|&k| {
        let (i, j) = disc.coords[k];
        (i * i + j * j, i, j)
    });

    let mut fibers: Vec<Option<FiberResult>> = (0..disc.len()).map(|_| None).collect();
    let mut flagged = Vec::new();
    let mut warm: Option<crate::linalg::HermitianPd> = None;
    for &k in &order {
        let z = disc.z(k);
        let barrier = family.barrier_at(z);
        let mut report = solve_on_grid(ProblemKind::Min, &barrier, &grid, opts, warm.as_ref())?;
        warm = Some(report.matrix.clone());
        report.trace.clear();
        let certified = report.is_certified();
        if !certified {
            flagged.push(k);
        }
        let contact_radius = if m == 2 {
            contact_radius_p1(&report.certificate.points, &report.certificate.weights).ok()
        } else {
            None
        };
        let marked_potentials = (0..m)
            .map(|j| report.matrix.matrix()[(j, j)].re.ln() + report.shift)
            .collect();
        fibers[k] = Some(FiberResult {
            z: [z.re, z.im],
            chi: report.energy,
            certified,
            contact_radius,
            marked_potentials,
            report,
        });
    }
    flagged.sort_unstable();
    let fibers: Vec<FiberResult> = fibers.into_iter().map(|f| f.expect("all fibers solved")).collect();

    let chi: Vec<f64> = fibers.iter().map(|f| f.chi).collect();
    let laplacian = discrete_laplacian(disc, &chi)?;
    let bridge = det_bridge(&chi, m);

    let psh = if family.kind == FamilyKind::Section10 {
        // the minimizer family in closed form; its fiberwise optimality is
        // exactly what the per-z certificates established
        let minimizer = |z: Complex64, x: &ProjPoint| {
            section10_eval(Section10Kind::U0, z, x).expect("U0 is total on the open disc")
        };
        let samples = vec![
            (Complex64::new(0.5, 0.0), ProjPoint::pole(2, 1)),
            (Complex64::new(-0.35, 0.35), ProjPoint::pole(2, 1)),
            (Complex64::new(0.5, 0.0), ProjPoint::pole(2, 0)),
            (
                Complex64::new(0.3, 0.2),
                ProjPoint::normalize(&[Complex64::new(1.0, 0.0), Complex64::new(0.9, 0.4)])?,
            ),
        ];
        Some(psh_check_product(&minimizer, &samples, 1e-3)?)
    } else {
        None
    };

    Ok(SweepReport { family: family.kind, disc: disc.clone(), fibers, flagged, laplacian, bridge, psh })
}

/// χ from an independent 1-D oracle at one z: brute-force search over
/// diagonal matrices diag(e^a, e^b) (the two-regime minimizer is diagonal by
/// rotational symmetry of the barrier).
pub fn diagonal_net_energy(
    family: &FamilyBarrier,
    z: Complex64,
    grid: &QuadratureGrid,
    a_range: (f64, f64),
    b_range: (f64, f64),
    steps: usize,
) -> Result<f64> {
    if steps < 2 {
        return Err(Error::InvalidArgument { name: "steps", reason: "need ≥ 2".into() });
    }
    let barrier = family.barrier_at(z);
    let v0 = barrier.sample(grid)?;
    let pts = grid.points();
    let lattice: Vec<(usize, usize)> =
        (0..steps).flat_map(|i| (0..steps).map(move |j| (i, j))).collect();
    let energies = parallel::map_slice(&lattice, |&(i, j)| {
        let a = a_range.0 + (a_range.1 - a_range.0) * i as f64 / (steps - 1) as f64;
        let b = b_range.0 + (b_range.1 - b_range.0) * j as f64 / (steps - 1) as f64;
        let (ea, eb) = (a.exp(), b.exp());
        let mut shift = f64::NEG_INFINITY;
        for (x, &v) in pts.iter().zip(&v0) {
            let u = (ea * x.coords()[0].norm_sqr() + eb * x.coords()[1].norm_sqr()).ln();
            shift = shift.max(v - u);
        }
        (a + b) / 2.0 + shift
    });
    Ok(energies.into_iter().fold(f64::INFINITY, f64::min))
}
