//! The SU(m) moment map on ℙⁿ, contact sets, hull certificates and the
//! uniqueness-condition checker for torus directions.
//!
//! With the identification 𝔰𝔲(m)* ≅ {Hermitian traceless matrices} via the
//! pairing ⟨P,X⟩ = −i·tr(PX), the moment map of the SU(m) action on ℙⁿ is
//!
//! ```text
//!     μ(x) = x̂x̂† − I/m ,        ⟨μ(x),X⟩ = −i·x̂†Xx̂   (tr X = 0).
//! ```
//!
//! A potential u that is optimal above/below a barrier is certified by John's
//! condition: 0 lies in the convex hull of {μ(γx) : x in the contact set},
//! where γ is a group element with ω_u = γ*ω. Membership is decided by
//! minimizing ‖Σᵢ wᵢ·μ(γxᵢ)‖_F over the probability simplex with a pairwise
//! Frank–Wolfe iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{hermitian_defect, max_abs, GroupElement};
use crate::projective::{ProjPoint, QuadratureGrid};
use crate::{Error, Result};

/// Default contact-band tolerance ε_rel; roughly 10× the solver's
/// termination tolerance so certified optima always populate their band.
pub const CONTACT_EPS_REL: f64 = 1e-4;

/// Default pass tolerance for certificates built from analytic contact data.
pub const CERT_TOL_ANALYTIC: f64 = 1e-6;

/// Default pass tolerance for certificates on grid-extracted contact sets.
pub const CERT_TOL_GRID: f64 = 1e-3;

/// Iteration cap of the hull optimizer.
pub const HULL_MAX_ITERS: usize = 10_000;

/// Hermitian traceless matrix: a value of the moment map.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    mat: DMatrix<Complex64>,
}

impl MomentMatrix {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        let scale = max_abs(&mat).max(1.0);
        if hermitian_defect(&mat) > 1e-12 * scale {
            return Err(Error::InvalidMatrix("moment matrix must be Hermitian".into()));
        }
        let tr: Complex64 = mat.diagonal().iter().sum();
        if tr.norm() > 1e-12 * scale {
            return Err(Error::InvalidMatrix(format!(
                "moment matrix must be traceless, tr = {tr}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }
}

/// μ(x) = x̂x̂† − I/m.
pub fn moment(x: &ProjPoint) -> MomentMatrix {
    let m = x.m();
    let mut mat = DMatrix::<Complex64>::zeros(m, m);
    let c = x.coords();
    for i in 0..m {
        for j in 0..m {
            mat[(i, j)] = c[i] * c[j].conj();
        }
        mat[(i, i)] -= Complex64::new(1.0 / m as f64, 0.0);
    }
    MomentMatrix { mat }
}

/// ⟨P,X⟩ = −i·tr(PX); real for Hermitian P and skew-Hermitian X.
pub fn pairing(p: &MomentMatrix, x_skew: &DMatrix<Complex64>) -> f64 {
    let prod = &p.mat * x_skew;
    let tr: Complex64 = prod.diagonal().iter().sum();
    (Complex64::new(0.0, -1.0) * tr).re
}

fn check_skew_traceless(x: &DMatrix<Complex64>) -> Result<()> {
    let scale = max_abs(x).max(1.0);
    let defect = (x + x.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if defect > 1e-12 * scale {
        return Err(Error::InvalidMatrix("generator must be skew-Hermitian".into()));
    }
    let tr: Complex64 = x.diagonal().iter().sum();
    if tr.norm() > 1e-12 * scale {
        return Err(Error::InvalidMatrix("generator must be traceless".into()));
    }
    Ok(())
}

/// Hamiltonian h_X = −2·⟨μ(·),X⟩ of the flow generated by a skew-Hermitian
/// traceless X; for X = iD with D Hermitian this is −2·x̂†Dx̂.
pub fn hamiltonian_h(x_skew: &DMatrix<Complex64>, x: &ProjPoint) -> Result<f64> {
    check_skew_traceless(x_skew)?;
    // ⟨μ(x),X⟩ = −i·x̂†Xx̂ for traceless X, which equals Im(x̂†Xx̂).
    let c = x.coords();
    let m = c.len();
    let mut v = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            v += c[i].conj() * x_skew[(i, j)] * c[j];
        }
    }
    Ok(-2.0 * v.im)
}

/// Which side of the barrier the potential is constrained to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// minimize energy over admissible u ≥ v₀
    Min,
    /// maximize energy over admissible u ≤ v₀
    Max,
}

/// Indices of the grid points where u touches its barrier: the band
/// {x : gap(x) ≤ min gap + ε_abs} with gap = u−v₀ (min problem) or v₀−u
/// (max problem) and ε_abs = ε_rel·(1 + max|v₀|). Errors if u is infeasible
/// beyond ε_abs or never comes within ε_abs of the barrier.
pub fn contact_set(
    kind: ProblemKind,
    u: &[f64],
    v0: &[f64],
    eps_rel: f64,
) -> Result<Vec<usize>> {
    if u.len() != v0.len() {
        return Err(Error::DimensionMismatch(format!(
            "u has {} values, v0 has {}",
            u.len(),
            v0.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::EmptyInput("contact_set values"));
    }
    for (i, (&a, &b)) in u.iter().zip(v0).enumerate() {
        if !a.is_finite() {
            return Err(Error::NonFiniteSample { index: i, value: a });
        }
        if !b.is_finite() {
            return Err(Error::NonFiniteSample { index: i, value: b });
        }
    }
    let vmax = v0.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let eps_abs = eps_rel * (1.0 + vmax);
    let gap: Vec<f64> = match kind {
        ProblemKind::Min => u.iter().zip(v0).map(|(a, b)| a - b).collect(),
        ProblemKind::Max => u.iter().zip(v0).map(|(a, b)| b - a).collect(),
    };
    let mut min_gap = f64::INFINITY;
    for &g in gap.iter() {
        min_gap = min_gap.min(g);
    }
    if min_gap < -eps_abs {
        let idx = gap.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        return Err(Error::Infeasible { index: idx, gap: min_gap });
    }
    if min_gap > eps_abs {
        return Err(Error::NoContact { gap: min_gap, tol: eps_abs });
    }
    Ok(gap
        .iter()
        .enumerate()
        .filter(|(_, &g)| g <= min_gap + eps_abs)
        .map(|(i, _)| i)
        .collect())
}

/// Result of the convex-hull membership test for 0 ∈ conv{μ(γxᵢ)}.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// Grid indices of the contact points (0..k when built standalone).
    pub indices: Vec<usize>,
    /// The contact points themselves.
    pub points: Vec<ProjPoint>,
    /// Probability weights found by the hull optimizer (aligned with points).
    pub weights: Vec<f64>,
    /// ‖Σᵢ wᵢ·μ(γxᵢ)‖_F at the returned weights.
    pub residual: f64,
    /// residual ≤ tolerance
    pub pass: bool,
    /// Pass tolerance used.
    pub tolerance: f64,
    /// Iterations spent by the hull optimizer.
    pub iterations: usize,
    /// Final Frank–Wolfe duality gap (diagnostic; small means the residual
    /// is near the true distance from 0 to the hull).
    pub gap: f64,
}

/// Minimum-norm point of conv{atoms} by pairwise Frank–Wolfe: linear-rate
/// for this quadratic objective, sparse iterates, exact simplex feasibility.
/// Atoms are k Hermitian m×m matrices stored row-major back to back in one
/// flat buffer, so the solver loop allocates nothing per call site.
pub(crate) struct HullSolution {
    pub weights: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub gap: f64,
}

pub(crate) fn min_norm_in_hull(
    atoms: &[Complex64],
    m: usize,
    warm: Option<&[f64]>,
    tol: f64,
    max_iters: usize,
) -> HullSolution {
    let mm = m * m;
    let k = atoms.len() / mm;
    debug_assert_eq!(atoms.len(), k * mm);
    let mut w = match warm {
        Some(w0) if w0.len() == k && w0.iter().all(|&x| x >= 0.0) && w0.iter().sum::<f64>() > 0.0 =>
        {
            let total: f64 = w0.iter().sum();
            w0.iter().map(|&x| x / total).collect()
        }
        _ => vec![1.0 / k as f64; k],
    };
    let atom = |i: usize| &atoms[i * mm..(i + 1) * mm];
    let inner = |a: &[Complex64], b: &[Complex64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
    };
    let recombine = |w: &[f64], s: &mut Vec<Complex64>| {
        s.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for i in 0..k {
            if w[i] > 0.0 {
                let a = atom(i);
                for (sz, az) in s.iter_mut().zip(a) {
                    *sz += az * w[i];
                }
            }
        }
    };
    let mut s = vec![Complex64::new(0.0, 0.0); mm];
    recombine(&w, &mut s);
    // stop once the residual is comfortably below the pass tolerance, or the
    // duality gap certifies there is nothing left to gain
    let resid_target = (0.2 * tol).powi(2);
    let gap_tol = (1e-10f64).min(0.01 * tol * tol);
    let mut gap = f64::INFINITY;
    let mut iters = 0;
    for it in 0..max_iters {
        iters = it + 1;
        let f = inner(&s, &s);
        if f <= resid_target {
            gap = 0.0;
            break;
        }
        // gradient coordinates gᵢ = 2⟨S, Mᵢ⟩
        let mut g_min = f64::INFINITY;
        let mut g_max_active = f64::NEG_INFINITY;
        let mut i_fw = 0;
        let mut i_away = 0;
        let mut g_dot_w = 0.0;
        for i in 0..k {
            let gi = 2.0 * inner(&s, atom(i));
            if gi < g_min {
                g_min = gi;
                i_fw = i;
            }
            if w[i] > 0.0 {
                g_dot_w += w[i] * gi;
                if gi > g_max_active {
                    g_max_active = gi;
                    i_away = i;
                }
            }
        }
        gap = g_dot_w - g_min;
        if gap <= gap_tol {
            break;
        }
        // pairwise direction: move mass from the worst active atom to the
        // best atom; exact line search for the quadratic objective
        if i_fw == i_away {
            break;
        }
        let (af, aa) = (atom(i_fw), atom(i_away));
        let mut dd = 0.0;
        let mut sd = 0.0;
        for j in 0..mm {
            let d = af[j] - aa[j];
            dd += (d.conj() * d).re;
            sd += (s[j].conj() * d).re;
        }
        if dd <= 0.0 {
            break;
        }
        let t = (-sd / dd).clamp(0.0, w[i_away]);
        if t <= 0.0 {
            break;
        }
        w[i_fw] += t;
        w[i_away] -= t;
        if w[i_away] < 1e-18 {
            w[i_away] = 0.0;
        }
        for j in 0..mm {
            s[j] += (af[j] - aa[j]) * t;
        }
        if it % 256 == 255 {
            // refresh S against drift from incremental updates
            recombine(&w, &mut s);
        }
    }
    // exact residual at the final weights
    recombine(&w, &mut s);
    let total: f64 = w.iter().sum();
    for wi in w.iter_mut() {
        *wi /= total;
    }
    let residual = inner(&s, &s).max(0.0).sqrt();
    HullSolution { residual, weights: w, iterations: iters, gap }
}

/// Flattened moment atoms μ(normalize(γxᵢ)) for a set of points, written
/// into `out` back to back (row-major m×m blocks).
pub(crate) fn moment_atoms(
    points: &[ProjPoint],
    gamma: &GroupElement,
    out: &mut Vec<Complex64>,
) -> Result<()> {
    let m = gamma.dim();
    out.clear();
    out.reserve(points.len() * m * m);
    for x in points {
        let y = ProjPoint::normalize(&gamma.apply(x.coords()))?;
        let c = y.coords();
        for i in 0..m {
            for j in 0..m {
                let mut v = c[i] * c[j].conj();
                if i == j {
                    v -= 1.0 / m as f64;
                }
                out.push(v);
            }
        }
    }
    Ok(())
}

/// John-type certificate: decides 0 ∈ conv{μ(γ·xᵢ)} over the given contact
/// points, with γ the group element normalizing the candidate potential
/// (ω_u = γ*ω; for u = u_A take γ = A^{1/2}).
pub fn certificate(contact: &[ProjPoint], gamma: &GroupElement, tol: f64) -> Result<Certificate> {
    certificate_warm(contact, None, gamma, tol)
}

/// Like [`certificate`] but optionally seeded with initial hull weights
/// (e.g. softmax weights from an outer optimizer, restricted to the contact
/// set). The result is identical up to the usual tolerance; only the number
/// of hull iterations changes.
pub fn certificate_warm(
    contact: &[ProjPoint],
    warm: Option<&[f64]>,
    gamma: &GroupElement,
    tol: f64,
) -> Result<Certificate> {
    if contact.is_empty() {
        return Err(Error::EmptyInput("certificate contact set"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument { name: "tol", reason: "must be > 0".into() });
    }
    let m = contact[0].m();
    if gamma.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "γ is {}x{} but points live in ℂ^{m}",
            gamma.dim(),
            gamma.dim()
        )));
    }
    let mut atoms = Vec::new();
    moment_atoms(contact, gamma, &mut atoms)?;
    let sol = min_norm_in_hull(&atoms, m, warm, tol, HULL_MAX_ITERS);
    Ok(Certificate {
        indices: (0..contact.len()).collect(),
        points: contact.to_vec(),
        weights: sol.weights,
        residual: sol.residual,
        pass: sol.residual <= tol,
        tolerance: tol,
        iterations: sol.iterations,
        gap: sol.gap,
    })
}

/// Certificate on a subset of grid indices, retaining the original indices.
pub fn certificate_on_grid(
    grid: &QuadratureGrid,
    indices: &[usize],
    gamma: &GroupElement,
    tol: f64,
) -> Result<Certificate> {
    let pts: Vec<ProjPoint> = indices.iter().map(|&i| grid.points()[i].clone()).collect();
    let mut cert = certificate(&pts, gamma, tol)?;
    cert.indices = indices.to_vec();
    Ok(cert)
}

/// Balance radius on ℙ¹ of a weighted point set, read in the affine
/// coordinate ξ = x₁/x₀: the unique r > 0 solving
///
///   Σᵢ wᵢ · (tᵢ − r²)/(tᵢ + r²) = 0,   tᵢ = |ξᵢ|².
///
/// Each summand is invariant under the diagonal rescaling t ↦ λt, r² ↦ λr²,
/// so the radius of a balanced configuration can be read off in the original
/// coordinates from any weight system returned by [`certificate`] — the
/// balance equation is exactly the (1,1) entry of the certificate identity.
/// The pole (0:1) contributes a constant +1, the pole (1:0) a constant −1;
/// a root exists iff each pole carries weight < 1/2.
pub fn contact_radius_p1(points: &[ProjPoint], weights: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("contact_radius_p1 points"));
    }
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    if points[0].m() != 2 {
        return Err(Error::InvalidArgument {
            name: "points",
            reason: "balance radius is defined on ℙ¹ (points in ℂ²)".into(),
        });
    }
    if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Err(Error::InvalidArgument {
            name: "weights",
            reason: "weights must be finite and non-negative".into(),
        });
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "weights",
            reason: "weights must not all vanish".into(),
        });
    }
    // t = |x₁/x₀|² per point; poles become fixed ±1 contributions.
    let mut w_zero = 0.0; // mass at ξ = 0, term −1
    let mut w_inf = 0.0; // mass at ξ = ∞, term +1
    let mut finite: Vec<(f64, f64)> = Vec::new(); // (t, w)
    for (x, &w) in points.iter().zip(weights) {
        let c = x.coords();
        let (n0, n1) = (c[0].norm_sqr(), c[1].norm_sqr());
        if n1 <= n0 * 1e-30 {
            w_zero += w;
        } else if n0 <= n1 * 1e-30 {
            w_inf += w;
        } else {
            finite.push((n1 / n0, w));
        }
    }
    let balance = |rho: f64| -> f64 {
        let mut s = w_inf - w_zero;
        for &(t, w) in &finite {
            s += w * (t - rho) / (t + rho);
        }
        s / total
    };
    if finite.is_empty() {
        return Err(Error::InvalidArgument {
            name: "points",
            reason: "all mass sits at the poles; the balance radius is undetermined".into(),
        });
    }
    // balance(ρ) is strictly decreasing; bracket the root in log ρ
    let t_min = finite.iter().map(|&(t, _)| t).fold(f64::INFINITY, f64::min);
    let t_max = finite.iter().map(|&(t, _)| t).fold(0.0f64, f64::max);
    let (mut lo, mut hi) = (t_min.ln() - 60.0, t_max.ln() + 60.0);
    if balance(lo.exp()) <= 0.0 || balance(hi.exp()) >= 0.0 {
        return Err(Error::InvalidArgument {
            name: "weights",
            reason: "a pole carries half the mass or more; no balance radius".into(),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(mid.exp()) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.25 * (lo + hi)).exp()) // r = √ρ
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            indices: &'a [usize],
            points: Vec<Vec<[f64; 2]>>,
            weights: &'a [f64],
            residual: f64,
            verdict: &'static str,
            tolerance: f64,
            iterations: usize,
            gap: f64,
        }
        Repr {
            indices: &self.indices,
            points: self
                .points
                .iter()
                .map(|p| p.coords().iter().map(|c| [c.re, c.im]).collect())
                .collect(),
            weights: &self.weights,
            residual: self.residual,
            verdict: if self.pass { "pass" } else { "fail" },
            tolerance: self.tolerance,
            iterations: self.iterations,
            gap: self.gap,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            indices: Vec<usize>,
            points: Vec<Vec<[f64; 2]>>,
            weights: Vec<f64>,
            residual: f64,
            verdict: String,
            tolerance: f64,
            iterations: usize,
            gap: f64,
        }
        let r = Repr::deserialize(d)?;
        let points = r
            .points
            .iter()
            .map(|p| {
                let v: Vec<Complex64> = p.iter().map(|c| Complex64::new(c[0], c[1])).collect();
                ProjPoint::normalize(&v).map_err(|e| D::Error::custom(e.to_string()))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Certificate {
            indices: r.indices,
            points,
            weights: r.weights,
            residual: r.residual,
            pass: r.verdict == "pass",
            tolerance: r.tolerance,
            iterations: r.iterations,
            gap: r.gap,
        })
    }
}

/// Outcome of the uniqueness-condition check for X = i·diag(a).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessVerdict {
    /// N_X is empty: the separation condition holds vacuously.
    NxEmpty,
    /// N_X ≠ ∅ and a witness Y with ⟨μ,Y⟩ > 0 on N_X was found.
    ConditionHolds,
    /// No separating witness found (not reachable for diagonal spectra on
    /// ℙⁿ, kept for report completeness).
    Fails,
}

/// Report of [`uniqueness_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// Input spectrum a of X = i·diag(a), Σa = 0.
    pub spectrum: Vec<f64>,
    /// Indices {j : a_j = 0}; N_X = ℙ(span{e_j}) over these (empty list ⇒ N_X = ∅).
    pub nx_span: Vec<usize>,
    /// Imaginary parts of the diagonal witness Y (entries of Y are i·these);
    /// None when N_X is empty.
    pub witness_diag_im: Option<Vec<f64>>,
    /// Smallest sampled value of ⟨μ(x),Y⟩ over N_X (None when no witness).
    pub witness_min_pairing: Option<f64>,
    pub verdict: UniquenessVerdict,
}

/// Check the uniqueness condition for the torus direction X = i·diag(a):
/// the locus N_X where the Hamiltonian vanishes to second order is
/// ℙ(span{e_j : a_j = 0}), and when it is nonempty a diagonal witness
/// Y = i·perm(−n, 1, …, 1) (−n placed where a_j ≠ 0) has ⟨μ,Y⟩ = 1 on N_X.
pub fn uniqueness_check(a: &[f64]) -> Result<UniquenessReport> {
    let m = a.len();
    if m < 2 {
        return Err(Error::InvalidArgument { name: "a", reason: "need m ≥ 2 entries".into() });
    }
    let scale = a.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidArgument { name: "a", reason: "X must be nonzero".into() });
    }
    let total: f64 = a.iter().sum();
    if total.abs() > 1e-10 * scale {
        return Err(Error::InvalidArgument {
            name: "a",
            reason: format!("must be traceless, Σa = {total}"),
        });
    }
    let nx_span: Vec<usize> =
        (0..m).filter(|&j| a[j].abs() <= 1e-14 * scale).collect();
    if nx_span.is_empty() {
        return Ok(UniquenessReport {
            spectrum: a.to_vec(),
            nx_span,
            witness_diag_im: None,
            witness_min_pairing: None,
            verdict: UniquenessVerdict::NxEmpty,
        });
    }
    // witness: −n at the first index with a_j ≠ 0, +1 elsewhere (traceless,
    // n = m−1); on N_X the x-mass avoids that index, so ⟨μ(x),Y⟩ = 1
    let hot = (0..m).find(|&j| a[j].abs() > 1e-14 * scale).expect("a is nonzero");
    let n = (m - 1) as f64;
    let mut diag_im = vec![1.0; m];
    diag_im[hot] = -n;
    let y = DMatrix::<Complex64>::from_fn(m, m, |i, j| {
        if i == j {
            Complex64::new(0.0, diag_im[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    // sample N_X: the spanning poles plus mixed combinations with phases
    let mut samples: Vec<ProjPoint> = nx_span.iter().map(|&j| ProjPoint::pole(m, j)).collect();
    if nx_span.len() > 1 {
        for phase_idx in 0..3 {
            let mut v = vec![Complex64::new(0.0, 0.0); m];
            for (r, &j) in nx_span.iter().enumerate() {
                let th = 0.7 * phase_idx as f64 + 1.3 * r as f64;
                v[j] = Complex64::new(th.cos(), th.sin());
            }
            samples.push(ProjPoint::normalize(&v)?);
        }
    }
    let mut min_pair = f64::INFINITY;
    for s in &samples {
        let p = pairing(&moment(s), &y);
        min_pair = min_pair.min(p);
    }
    let verdict = if min_pair > 0.0 {
        UniquenessVerdict::ConditionHolds
    } else {
        UniquenessVerdict::Fails
    };
    Ok(UniquenessReport {
        spectrum: a.to_vec(),
        nx_span,
        witness_diag_im: Some(diag_im),
        witness_min_pairing: Some(min_pair),
        verdict,
    })
}
