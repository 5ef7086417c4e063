//! Admissible Kähler potentials on ℙⁿ, their Monge–Ampère energy in closed
//! form and by quadrature, geodesics inside the admissible family, and the
//! homogeneous complex Monge–Ampère residual of group-orbit families.
//!
//! An admissible potential is u_A(x) = log(x̂†Ax̂) for a Hermitian
//! positive-definite A = g†g and unit representative x̂; its Kähler form is
//! the pullback of the Fubini–Study form under the projective action of
//! g = A^{1/2}. The energy functional normalized by E(0) = 0, dE = α takes
//! the closed value E(u_A) = (1/m)·log det A in this point-action
//! convention; [`energy_quadrature`] evaluates the defining t-integral
//! numerically and is the ground truth the closed form is tested against.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{expm, flatten_row_major, symmetrize, GroupElement, HermitianPd};
use crate::parallel;
use crate::projective::{fd_hermitian_form, fs_hessian_chart, ProjPoint, QuadratureGrid, FD_STEP};
use crate::{Error, Result};

/// Default number of Gauss–Legendre nodes for the t-integral of the energy.
pub const ENERGY_GL_NODES: usize = 16;

/// A potential u(x) = log(x̂†Ax̂) + shift. The shift is carried separately
/// so that adding a constant is exact, never filtered through exp/log.
#[derive(Debug, Clone)]
pub struct AdmissiblePotential {
    a: HermitianPd,
    shift: f64,
    flat: Vec<Complex64>,
}

impl AdmissiblePotential {
    pub fn new(a: HermitianPd) -> Self {
        let flat = flatten_row_major(a.matrix());
        Self { a, shift: 0.0, flat }
    }

    pub fn with_shift(a: HermitianPd, shift: f64) -> Self {
        let flat = flatten_row_major(a.matrix());
        Self { a, shift, flat }
    }

    pub fn matrix(&self) -> &HermitianPd {
        &self.a
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn m(&self) -> usize {
        self.a.dim()
    }

    /// u(x) = log(x̂†Ax̂) + shift.
    pub fn eval(&self, x: &ProjPoint) -> f64 {
        x.quad_form(&self.flat).ln() + self.shift
    }

    /// The same potential plus the constant c (exact on the shift).
    pub fn scaled(&self, c: f64) -> AdmissiblePotential {
        Self { a: self.a.clone(), shift: self.shift + c, flat: self.flat.clone() }
    }

    /// E(u) = (1/m)·log det A + shift.
    pub fn energy(&self) -> f64 {
        energy(&self.a) + self.shift
    }

    /// Group element γ with ω_u = γ*ω, namely A^{1/2}.
    pub fn normalizer(&self) -> GroupElement {
        GroupElement::new(self.a.sqrt().matrix().clone())
            .expect("square root of a positive matrix is invertible")
    }
}

/// Samples of a function on a fixed quadrature grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    /// Validates length against the grid and finiteness of every sample.
    pub fn new(grid: &QuadratureGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { index: i, value: v });
            }
        }
        Ok(Self { values })
    }

    pub fn sample(
        grid: &QuadratureGrid,
        f: impl Fn(&ProjPoint) -> f64 + Sync + Send,
    ) -> Result<Self> {
        Self::new(grid, grid.evaluate(f))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// u_{g†g}; the result depends on g only through its Gram matrix.
pub fn potential_of(g: &GroupElement) -> AdmissiblePotential {
    AdmissiblePotential::new(g.gram())
}

/// Closed-form Monge–Ampère energy E(u_A) = (1/m)·log det A.
pub fn energy(a: &HermitianPd) -> f64 {
    a.log_det() / a.dim() as f64
}

/// Nodes and weights of n-point Gauss–Legendre quadrature on [0,1]
/// (weights sum to 1). Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_01(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument { name: "n", reason: "need ≥ 1 node".into() });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev-flavored initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_{n-1} by the three-term recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
            let dpn = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dpn;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
        let dpn = n as f64 * (x * pn - pn1) / (x * x - 1.0);
        // map from [-1,1] to [0,1]
        nodes[n - 1 - k] = 0.5 * (x + 1.0);
        weights[n - 1 - k] = 1.0 / ((1.0 - x * x) * dpn * dpn);
    }
    Ok((nodes, weights))
}

/// Monge–Ampère energy by its defining integral
/// E(u) = ∫₀¹ (1/V)∫ u·ω_{tu}ⁿ dt along the linear path tu: Gauss–Legendre
/// in t of the grid quadrature of u against the density
/// ρ_t = det(H_FS + t·H_u)/det(H_FS), with H_u the chart finite-difference
/// complex Hessian of u. The path stays Kähler iff ω_u = ω_{1·u} > 0, which
/// is checked pointwise (positive-definite cone is convex, so the t = 1
/// check covers the whole segment).
pub fn energy_quadrature(
    u: &(dyn Fn(&ProjPoint) -> f64 + Sync),
    grid: &QuadratureGrid,
    gl_nodes: usize,
) -> Result<f64> {
    let (t_nodes, t_weights) = gauss_legendre_01(gl_nodes)?;
    let per_point = parallel::map_indices(grid.len(), |i| -> Result<f64> {
        let x = &grid.points()[i];
        let uval = u(x);
        if !uval.is_finite() {
            return Err(Error::NonFiniteSample { index: i, value: uval });
        }
        let anchor = x.chart_anchor();
        let w0 = x.to_chart(anchor)?;
        let f_chart = |w: &[Complex64]| -> f64 {
            match ProjPoint::from_chart(anchor, w) {
                Ok(p) => u(&p),
                Err(_) => f64::NAN,
            }
        };
        let h_u = fd_hermitian_form(&f_chart, &w0, FD_STEP)?;
        let h_fs = fs_hessian_chart(&w0);
        let det_fs = det_hermitian(&h_fs);
        // positivity of ω_u at this point (Sylvester leading minors)
        let h_total = &h_fs + &h_u;
        if !leading_minors_positive(&h_total) {
            return Err(Error::PathLeftKahlerCone { index: i, t: 1.0 });
        }
        let mut density = 0.0;
        for (tk, wk) in t_nodes.iter().zip(&t_weights) {
            let h_t = &h_fs + &h_u * Complex64::new(*tk, 0.0);
            density += wk * det_hermitian(&h_t) / det_fs;
        }
        Ok(uval * density)
    });
    let mut terms = Vec::with_capacity(grid.len());
    for r in per_point {
        terms.push(r?);
    }
    let weighted: Vec<f64> =
        terms.iter().zip(grid.weights()).map(|(t, w)| t * w).collect();
    Ok(parallel::ordered_sum(&weighted))
}

fn apply_matrix(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

fn det_hermitian(h: &DMatrix<Complex64>) -> f64 {
    match h.nrows() {
        1 => h[(0, 0)].re,
        2 => (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]).re,
        _ => h.clone().determinant().re,
    }
}

fn leading_minors_positive(h: &DMatrix<Complex64>) -> bool {
    (1..=h.nrows()).all(|k| det_hermitian(&h.view((0, 0), (k, k)).into_owned()) > 0.0)
}

/// Velocity matrix H = log(A0^{−1/2} A1 A0^{−1/2}) of the geodesic
/// t ↦ A0^{1/2}·exp(tH)·A0^{1/2} joining A0 to A1.
pub fn geodesic_between(a0: &HermitianPd, a1: &HermitianPd) -> Result<DMatrix<Complex64>> {
    let s = a0.inv_sqrt();
    let mid = HermitianPd::new(symmetrize(&(s.matrix() * a1.matrix() * s.matrix())))?;
    Ok(mid.log())
}

/// Point A(t) = A0^{1/2}·exp(tH)·A0^{1/2} of the geodesic with velocity H.
pub fn geodesic_point(a0: &HermitianPd, h: &DMatrix<Complex64>, t: f64) -> Result<HermitianPd> {
    let r = a0.sqrt();
    let e = crate::linalg::exp_hermitian(&(h * Complex64::new(t, 0.0)))?;
    HermitianPd::new(symmetrize(&(r.matrix() * e.matrix() * r.matrix())))
}

/// Potential accumulated by the Hamiltonian flow of a skew-Hermitian
/// traceless X: φ(t)(x) = ∫₀ᵗ h(g_τ x) dτ with g_τ = exp(iτX) and
/// h = −2⟨μ,X⟩, evaluated by composite Simpson quadrature in τ. For X = iD
/// this equals u_{exp(−2tD)}(x), which pins the moment-map normalization.
pub fn hamiltonian_flow_potential(
    x_skew: &DMatrix<Complex64>,
    t: f64,
    x: &ProjPoint,
    steps: usize,
) -> Result<f64> {
    let steps = steps.max(2) + steps.max(2) % 2; // even, ≥ 2
    let i_x = x_skew * Complex64::new(0.0, 1.0);
    let h_at = |tau: f64| -> Result<f64> {
        let g = expm(&(&i_x * Complex64::new(tau, 0.0)));
        let moved = ProjPoint::normalize(apply_matrix(&g, x.coords()).as_slice())?;
        crate::moment::hamiltonian_h(x_skew, &moved)
    };
    let dt = t / steps as f64;
    let mut acc = h_at(0.0)? + h_at(t)?;
    for j in 1..steps {
        let coeff = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += coeff * h_at(j as f64 * dt)?;
    }
    Ok(acc * dt / 3.0)
}

/// Residual of the homogeneous complex Monge–Ampère equation for an
/// arbitrary family Φ(s, x): max over samples of |det of the (n+1)-dim
/// complex Hessian of F(s, ξ) = log-chart lift of ω-potential + Φ| in
/// (s, chart) coordinates. Samples whose stencils produce non-finite
/// values are skipped; erroring only when every sample is skipped.
pub fn hcma_residual_with(
    phi: &(dyn Fn(Complex64, &ProjPoint) -> f64 + Sync),
    samples: &[(Complex64, ProjPoint)],
    step: f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("hcma samples"));
    }
    let mut best: Option<f64> = None;
    for (s0, x0) in samples {
        let anchor = x0.chart_anchor();
        let xi0 = x0.to_chart(anchor)?;
        let mut center = vec![*s0];
        center.extend_from_slice(&xi0);
        let f = |v: &[Complex64]| -> f64 {
            let s = v[0];
            let xi = &v[1..];
            let fs: f64 = (1.0 + xi.iter().map(|c| c.norm_sqr()).sum::<f64>()).ln();
            match ProjPoint::from_chart(anchor, xi) {
                Ok(p) => fs + phi(s, &p),
                Err(_) => f64::NAN,
            }
        };
        match fd_hermitian_form(&f, &center, step) {
            Ok(h) => {
                let d = h.determinant().norm();
                best = Some(best.map_or(d, |b: f64| b.max(d)));
            }
            Err(Error::NonFiniteSample { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or(Error::EmptyInput("hcma samples (all skipped as degenerate)"))
}

/// HCMA residual of the group-orbit family Φ(s,·) = potential of exp(sZ)·g.
/// These families solve the equation, so the residual is O(fd error).
pub fn hcma_residual(
    g: &GroupElement,
    z_dir: &DMatrix<Complex64>,
    samples: &[(Complex64, ProjPoint)],
    step: f64,
) -> Result<f64> {
    let m = g.dim();
    if z_dir.nrows() != m || z_dir.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "direction is {}x{}, group element is {}x{}",
            z_dir.nrows(),
            z_dir.ncols(),
            m,
            m
        )));
    }
    let phi = |s: Complex64, x: &ProjPoint| -> f64 {
        let gs = expm(&(z_dir * s)) * g.matrix();
        let a_flat = flatten_row_major(&symmetrize(&(gs.adjoint() * &gs)));
        x.quad_form(&a_flat).ln()
    };
    hcma_residual_with(&phi, samples, step)
}
