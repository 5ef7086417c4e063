//! Points, charts and quadrature grids on ℙⁿ.
//!
//! A point is stored as a unit homogeneous representative x̂ ∈ ℂᵐ (m = n+1).
//! All operations are invariant under x̂ ↦ e^{iθ}x̂, so no phase convention is
//! imposed. Integration against the Fubini–Study volume (normalized to total
//! mass 1) uses either a deterministic equal-area grid on ℙ¹ or seeded
//! uniform sampling on ℙⁿ, n ≥ 2. Complex Hessians i∂∂̄f in affine charts are
//! evaluated by central finite differences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::quad_form_flat;
use crate::parallel;
use crate::{Error, Result};

/// Default finite-difference step for chart Hessians: balances O(h²)
/// truncation against double-precision round-off.
pub const FD_STEP: f64 = 1e-3;

/// A point of ℙⁿ as a unit-normalized homogeneous coordinate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    coords: Vec<Complex64>,
}

impl ProjPoint {
    /// Normalize a nonzero homogeneous vector to a unit representative.
    pub fn normalize(v: &[Complex64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::ZeroVector);
        }
        let inv = 1.0 / norm2.sqrt();
        Ok(Self { coords: v.iter().map(|c| c * inv).collect() })
    }

    /// Pole e_k = (0:…:1:…:0) of ℙⁿ.
    pub fn pole(m: usize, k: usize) -> Self {
        let mut coords = vec![Complex64::new(0.0, 0.0); m];
        coords[k] = Complex64::new(1.0, 0.0);
        Self { coords }
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    /// Ambient dimension m = n+1.
    pub fn m(&self) -> usize {
        self.coords.len()
    }

    /// Projective dimension n.
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    /// x̂†Ax̂ for a flattened row-major Hermitian matrix (hot path).
    pub fn quad_form(&self, flat: &[Complex64]) -> f64 {
        quad_form_flat(flat, self.coords.len(), &self.coords)
    }

    /// Index of the largest-modulus coordinate: the affine chart in which
    /// this point sits most centrally.
    pub fn chart_anchor(&self) -> usize {
        let mut best = 0;
        let mut best_n = 0.0;
        for (i, c) in self.coords.iter().enumerate() {
            let n = c.norm_sqr();
            if n > best_n {
                best_n = n;
                best = i;
            }
        }
        best
    }

    /// Affine chart coordinates w_j = x_j/x_k (j ≠ k, in index order) around
    /// anchor k. Requires x_k ≠ 0.
    pub fn to_chart(&self, anchor: usize) -> Result<Vec<Complex64>> {
        let xk = self.coords[anchor];
        if xk.norm_sqr() == 0.0 {
            return Err(Error::InvalidArgument {
                name: "anchor",
                reason: format!("coordinate {anchor} vanishes at this point"),
            });
        }
        Ok(self
            .coords
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != anchor)
            .map(|(_, c)| c / xk)
            .collect())
    }

    /// Rebuild a point from chart coordinates around `anchor`.
    pub fn from_chart(anchor: usize, w: &[Complex64]) -> Result<Self> {
        let m = w.len() + 1;
        let mut v = Vec::with_capacity(m);
        let mut it = w.iter();
        for j in 0..m {
            if j == anchor {
                v.push(Complex64::new(1.0, 0.0));
            } else {
                v.push(*it.next().expect("length checked"));
            }
        }
        Self::normalize(&v)
    }
}

/// Fubini–Study local potential log(1+‖w‖²) in an affine chart.
pub fn fs_potential_chart(w: &[Complex64]) -> f64 {
    (1.0 + w.iter().map(|c| c.norm_sqr()).sum::<f64>()).ln()
}

/// Analytic complex Hessian of the Fubini–Study chart potential:
/// ∂²/∂w_j∂w̄_k log(1+‖w‖²) = δ_jk/(1+s) − w̄_j w_k/(1+s)², s = ‖w‖².
pub fn fs_hessian_chart(w: &[Complex64]) -> nalgebra::DMatrix<Complex64> {
    let k = w.len();
    let s = 1.0 + w.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let mut h = nalgebra::DMatrix::zeros(k, k);
    for j in 0..k {
        for l in 0..k {
            let mut v = -w[j].conj() * w[l] / (s * s);
            if j == l {
                v += Complex64::new(1.0 / s, 0.0);
            }
            h[(j, l)] = v;
        }
    }
    h
}

/// Weighted sample set discretizing the normalized Fubini–Study volume.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    points: Vec<ProjPoint>,
    weights: Vec<f64>,
}

/// Force the weight vector to sum to exactly 1.0 under left-to-right
/// summation by absorbing the rounding residual into the largest weight.
fn pin_weight_sum(weights: &mut [f64]) {
    for _ in 0..4 {
        let sum: f64 = weights.iter().sum();
        if sum == 1.0 {
            return;
        }
        let imax = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        weights[imax] -= sum - 1.0;
    }
}

impl QuadratureGrid {
    /// Deterministic equal-area grid on ℙ¹ ≅ S². `resolution` R gives R
    /// latitude bands × R staggered longitudes of equal weight, plus the two
    /// pole points (1:0), (0:1) carrying the (tiny) area of their caps.
    pub fn p1(resolution: usize) -> Result<Self> {
        if resolution < 8 {
            return Err(Error::InvalidArgument {
                name: "resolution",
                reason: format!("must be ≥ 8, got {resolution}"),
            });
        }
        let r = resolution;
        let cap = 2.0 / (r as f64).powi(4); // polar cap height in u = cosθ
        let mut points = Vec::with_capacity(r * r + 2);
        let mut weights = Vec::with_capacity(r * r + 2);
        points.push(ProjPoint::pole(2, 0)); // u = +1
        points.push(ProjPoint::pole(2, 1)); // u = −1
        weights.push(cap / 2.0);
        weights.push(cap / 2.0);
        let band = (2.0 - 2.0 * cap) / r as f64;
        let w_reg = (1.0 - cap) / (r * r) as f64;
        for i in 0..r {
            // midpoint of band i in u, from north (u≈1) to south
            let u = 1.0 - cap - (i as f64 + 0.5) * band;
            let half = ((1.0 - u) / 2.0).sqrt(); // |x̂₁|
            let x0 = ((1.0 + u) / 2.0).sqrt(); // |x̂₀|
            let offset = if i % 2 == 0 { 0.0 } else { 0.5 };
            for j in 0..r {
                let phi = std::f64::consts::TAU * (j as f64 + offset) / r as f64;
                let coords = vec![
                    Complex64::new(x0, 0.0),
                    Complex64::new(half * phi.cos(), half * phi.sin()),
                ];
                points.push(ProjPoint { coords });
                weights.push(w_reg);
            }
        }
        pin_weight_sum(&mut weights);
        Ok(Self { points, weights })
    }

    /// Uniform Fubini–Study sampling of ℙⁿ: normalized standard complex
    /// Gaussian vectors with equal weights; reproducible for a fixed seed.
    pub fn pn(n: usize, count: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument { name: "n", reason: "must be ≥ 1".into() });
        }
        if count < 100 {
            return Err(Error::InvalidArgument {
                name: "count",
                reason: format!("must be ≥ 100, got {count}"),
            });
        }
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = n + 1;
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            loop {
                let v: Vec<Complex64> = (0..m)
                    .map(|_| {
                        // Box–Muller pair per complex coordinate
                        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                        let u2: f64 = rng.gen_range(0.0..1.0);
                        let r = (-2.0 * u1.ln()).sqrt();
                        let th = std::f64::consts::TAU * u2;
                        Complex64::new(r * th.cos(), r * th.sin())
                    })
                    .collect();
                if let Ok(p) = ProjPoint::normalize(&v) {
                    points.push(p);
                    break;
                }
            }
        }
        let mut weights = vec![1.0 / count as f64; count];
        pin_weight_sum(&mut weights);
        Ok(Self { points, weights })
    }

    pub fn from_parts(points: Vec<ProjPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("quadrature grid"));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points vs {} weights",
                points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "weights",
                reason: "all weights must be finite and > 0".into(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument {
                name: "weights",
                reason: format!("sum {sum} differs from 1 beyond 1e-10"),
            });
        }
        Ok(Self { points, weights })
    }

    /// Restrict to the indices where `keep` is true, renormalizing weights.
    /// Used by fibered sweeps to drop points at which a barrier is −∞.
    pub fn filtered(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..self.points.len() {
            if keep(i) {
                points.push(self.points[i].clone());
                weights.push(self.weights[i]);
            }
        }
        if points.is_empty() {
            return Err(Error::EmptyInput("filtered quadrature grid"));
        }
        let sum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= sum;
        }
        pin_weight_sum(&mut weights);
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Ambient dimension m of the points.
    pub fn m(&self) -> usize {
        self.points[0].m()
    }

    /// Σᵢ wᵢ f(xᵢ), evaluated in parallel, reduced in index order.
    pub fn integrate(&self, f: impl Fn(&ProjPoint) -> f64 + Sync + Send) -> Result<f64> {
        let values = parallel::map_slice(&self.points, f);
        let mut terms = Vec::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { index: i, value: *v });
            }
            terms.push(self.weights[i] * v);
        }
        Ok(parallel::ordered_sum(&terms))
    }

    /// Evaluate f at every point (parallel, index order), without weighting.
    pub fn evaluate(&self, f: impl Fn(&ProjPoint) -> f64 + Sync + Send) -> Vec<f64> {
        parallel::map_slice(&self.points, f)
    }

    pub fn to_json(&self) -> GridJson {
        GridJson {
            points: self
                .points
                .iter()
                .map(|p| p.coords().iter().map(|c| [c.re, c.im]).collect())
                .collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_json(j: &GridJson) -> Result<Self> {
        let points = j
            .points
            .iter()
            .map(|p| {
                let v: Vec<Complex64> = p.iter().map(|c| Complex64::new(c[0], c[1])).collect();
                ProjPoint::normalize(&v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(points, j.weights.clone())
    }
}

/// JSON document form of a grid: one entry of `points` per sample, holding
/// m [re, im] coordinate pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub points: Vec<Vec<[f64; 2]>>,
    pub weights: Vec<f64>,
}

/// Complex Hessian H_{jk} ≈ ∂²f/∂w_j∂w̄_k of a real-valued function of k
/// complex variables, by central differences with step h. The 4k²-point
/// stencil uses the Wirtinger identities
///   ∂²f/∂w∂w̄ = (f_xx + f_yy)/4,
///   ∂²f/∂w_j∂w̄_k = [(f_{x_j x_k} + f_{y_j y_k}) + i(f_{x_j y_k} − f_{y_j x_k})]/4.
/// The result is Hermitian by construction. Error is O(h²).
pub fn fd_hermitian_form(
    f: &(dyn Fn(&[Complex64]) -> f64 + Sync),
    center: &[Complex64],
    step: f64,
) -> Result<nalgebra::DMatrix<Complex64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument { name: "step", reason: "must be finite and > 0".into() });
    }
    let k = center.len();
    if k == 0 {
        return Err(Error::EmptyInput("fd_hermitian_form center"));
    }
    let eval = |pt: &[Complex64]| -> Result<f64> {
        let v = f(pt);
        if !v.is_finite() {
            return Err(Error::InvalidArgument {
                name: "f",
                reason: format!("non-finite stencil value {v}"),
            });
        }
        Ok(v)
    };
    let shift = |j: usize, d: Complex64| -> Vec<Complex64> {
        let mut p = center.to_vec();
        p[j] += d;
        p
    };
    let shift2 = |j: usize, dj: Complex64, l: usize, dl: Complex64| -> Vec<Complex64> {
        let mut p = center.to_vec();
        p[j] += dj;
        p[l] += dl;
        p
    };
    let h = step;
    let re = Complex64::new(h, 0.0);
    let im = Complex64::new(0.0, h);
    let f0 = eval(center)?;
    let mut out = nalgebra::DMatrix::<Complex64>::zeros(k, k);
    for j in 0..k {
        let laplacian = eval(&shift(j, re))? + eval(&shift(j, -re))? + eval(&shift(j, im))?
            + eval(&shift(j, -im))?
            - 4.0 * f0;
        out[(j, j)] = Complex64::new(laplacian / (4.0 * h * h), 0.0);
    }
    // mixed second derivative of f along directions a (in var j), b (in var l)
    let cross = |j: usize, a: Complex64, l: usize, b: Complex64| -> Result<f64> {
        Ok((eval(&shift2(j, a, l, b))? - eval(&shift2(j, a, l, -b))? - eval(&shift2(j, -a, l, b))?
            + eval(&shift2(j, -a, l, -b))?)
            / (4.0 * h * h))
    };
    for j in 0..k {
        for l in (j + 1)..k {
            let dxx = cross(j, re, l, re)?;
            let dyy = cross(j, im, l, im)?;
            let dxy = cross(j, re, l, im)?;
            let dyx = cross(j, im, l, re)?;
            let entry = Complex64::new((dxx + dyy) / 4.0, (dxy - dyx) / 4.0);
            out[(j, l)] = entry;
            out[(l, j)] = entry.conj();
        }
    }
    Ok(out)
}
