//! Complex Hermitian linear algebra helpers.
//!
//! Everything here is small and dense (m = n+1 ≤ 4 for ℙⁿ with n ≤ 3), so the
//! decompositions go through nalgebra's Hermitian eigensolver and the matrix
//! functions (√A, log A, exp H) are spectral. The two wrapper types enforce
//! the structural invariants the rest of the crate relies on:
//!
//! * [`HermitianPd`] — A = A† with strictly positive spectrum; the parameter
//!   space of admissible potentials u_A = log(x̂†Ax̂);
//! * [`GroupElement`] — an invertible complex matrix g acting on ℙⁿ by
//!   x ↦ g·x; only its Gram matrix g†g enters potentials, only its action on
//!   points enters certificates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest accepted condition number for [`HermitianPd`] and [`GroupElement`].
pub const COND_LIMIT: f64 = 1e12;

/// (M + M†)/2.
pub fn symmetrize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest entry of |M − M†|, as an absolute Hermitian defect.
pub fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest entry magnitude, used to scale relative tolerances.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues (ascending) and
/// a unitary column basis.
pub struct HermEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn herm_eigen(m: &DMatrix<Complex64>) -> HermEigen {
    let sym = nalgebra::linalg::SymmetricEigen::new(symmetrize(m));
    let k = sym.eigenvalues.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[a].total_cmp(&sym.eigenvalues[b]));
    let values = DVector::from_iterator(k, order.iter().map(|&i| sym.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(k, k);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &sym.eigenvectors.column(i));
    }
    HermEigen { values, vectors }
}

/// Spectral function V·f(Λ)·V† of a Hermitian matrix.
pub fn herm_map(m: &DMatrix<Complex64>, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
    let eig = herm_eigen(m);
    let k = eig.values.len();
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        eig.values.iter().map(|&l| Complex64::new(f(l), 0.0)),
    ));
    &eig.vectors * diag * eig.vectors.adjoint()
}

/// Matrix exponential by scaling-and-squaring with a Taylor kernel.
/// Valid for any square complex matrix; accurate to machine precision for the
/// moderate norms used here (solver directions and flow generators).
pub fn expm(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let k = m.nrows();
    let norm = m.iter().map(|c| c.norm()).sum::<f64>().max(1e-300);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scaled = m * Complex64::new(0.5f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<Complex64>::identity(k, k);
    let mut term = DMatrix::<Complex64>::identity(k, k);
    for j in 1..=24 {
        term = (&term * &scaled) * Complex64::new(1.0 / j as f64, 0.0);
        result += &term;
        if term.iter().map(|c| c.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// x̂†Mx̂ for Hermitian M stored row-major in a flat slice (hot path of every
/// potential evaluation; the result is real up to rounding).
#[inline]
pub fn quad_form_flat(a: &[Complex64], m: usize, v: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..m {
        let vi = v[i];
        // diagonal term
        acc += a[i * m + i].re * (vi.re * vi.re + vi.im * vi.im);
        // strict upper triangle, doubled real part
        for j in (i + 1)..m {
            let aij = a[i * m + j];
            let cross = vi.conj() * v[j];
            acc += 2.0 * (aij.re * cross.re - aij.im * cross.im);
        }
    }
    acc
}

/// Row-major flattening, the layout expected by [`quad_form_flat`].
pub fn flatten_row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn check_square_finite(mat: &DMatrix<Complex64>) -> Result<()> {
    if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
        return Err(Error::InvalidMatrix(format!(
            "expected nonempty square matrix, got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    if mat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    Ok(())
}

/// Hermitian positive definite matrix: the parameter of an admissible
/// potential. Construction symmetrizes the input (rejecting Hermitian defects
/// above [`HERMITIAN_TOL`] relative to the largest entry) and checks that the
/// spectrum is positive with condition number at most [`COND_LIMIT`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPd {
    mat: DMatrix<Complex64>,
    eig_min: f64,
    eig_max: f64,
}

impl HermitianPd {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        check_square_finite(&mat)?;
        let scale = max_abs(&mat).max(1.0);
        let defect = hermitian_defect(&mat);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::InvalidMatrix(format!(
                "Hermitian defect {defect:.3e} exceeds {HERMITIAN_TOL:.0e} x scale"
            )));
        }
        let mat = symmetrize(&mat);
        let eig = herm_eigen(&mat);
        let eig_min = eig.values[0];
        let eig_max = eig.values[eig.values.len() - 1];
        if eig_min <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig: eig_min });
        }
        let cond = eig_max / eig_min;
        if cond > COND_LIMIT {
            return Err(Error::IllConditioned { cond, limit: COND_LIMIT });
        }
        Ok(Self { mat, eig_min, eig_max })
    }

    /// Identity matrix of side `m`.
    pub fn identity(m: usize) -> Self {
        Self::new(DMatrix::identity(m, m)).expect("identity is Hermitian PD")
    }

    /// Diagonal matrix from strictly positive entries.
    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        let m = DMatrix::from_diagonal(&DVector::from_iterator(
            d.len(),
            d.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        Self::new(m)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Side length m (= n+1 on ℙⁿ).
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn eig_min(&self) -> f64 {
        self.eig_min
    }

    pub fn cond(&self) -> f64 {
        self.eig_max / self.eig_min
    }

    /// log det A, computed from the (real, positive) spectrum.
    pub fn log_det(&self) -> f64 {
        herm_eigen(&self.mat).values.iter().map(|&l| l.ln()).sum()
    }

    /// Hermitian square root A^{1/2}.
    pub fn sqrt(&self) -> HermitianPd {
        HermitianPd::new(herm_map(&self.mat, f64::sqrt)).expect("sqrt of HPD is HPD")
    }

    /// Hermitian inverse square root A^{-1/2}.
    pub fn inv_sqrt(&self) -> HermitianPd {
        HermitianPd::new(herm_map(&self.mat, |l| 1.0 / l.sqrt())).expect("invsqrt of HPD is HPD")
    }

    /// Hermitian logarithm log A.
    pub fn log(&self) -> DMatrix<Complex64> {
        herm_map(&self.mat, f64::ln)
    }

    /// Inverse A⁻¹.
    pub fn inverse(&self) -> HermitianPd {
        HermitianPd::new(herm_map(&self.mat, |l| 1.0 / l)).expect("inverse of HPD is HPD")
    }

    /// e^c · A (additive shift of the induced potential by c).
    pub fn scale_exp(&self, c: f64) -> HermitianPd {
        HermitianPd::new(&self.mat * Complex64::new(c.exp(), 0.0)).expect("positive scaling")
    }

    /// Rescale to unit determinant; the induced potential changes by the
    /// constant −(1/m)·log det A.
    pub fn unit_determinant(&self) -> HermitianPd {
        let m = self.dim() as f64;
        self.scale_exp(-self.log_det() / m)
    }

    /// Relative Frobenius distance ‖A − B‖/‖B‖ after optimal scalar
    /// alignment (the scalar direction e^c·A is a gauge of the potential).
    pub fn rel_distance_mod_scale(&self, other: &HermitianPd) -> f64 {
        let a = self.unit_determinant();
        let b = other.unit_determinant();
        (a.matrix() - b.matrix()).norm() / b.matrix().norm()
    }
}

/// exp(H) for Hermitian H, as a positive definite matrix.
pub fn exp_hermitian(h: &DMatrix<Complex64>) -> Result<HermitianPd> {
    let defect = hermitian_defect(h);
    if defect > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::InvalidMatrix(format!(
            "exp_hermitian: defect {defect:.3e} too large"
        )));
    }
    HermitianPd::new(herm_map(h, f64::exp))
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn matrix_to_json(m: &DMatrix<Complex64>) -> MatrixJson {
    let (r, c) = m.shape();
    MatrixJson {
        re: (0..r).map(|i| (0..c).map(|j| m[(i, j)].re).collect()).collect(),
        im: (0..r).map(|i| (0..c).map(|j| m[(i, j)].im).collect()).collect(),
    }
}

fn matrix_from_json(j: &MatrixJson) -> std::result::Result<DMatrix<Complex64>, String> {
    let r = j.re.len();
    if r == 0 || j.im.len() != r {
        return Err("re/im row counts differ or are empty".into());
    }
    let c = j.re[0].len();
    if j.re.iter().any(|row| row.len() != c) || j.im.iter().any(|row| row.len() != c) {
        return Err("ragged rows in matrix".into());
    }
    let mut m = DMatrix::zeros(r, c);
    for i in 0..r {
        for k in 0..c {
            m[(i, k)] = Complex64::new(j.re[i][k], j.im[i][k]);
        }
    }
    Ok(m)
}

impl Serialize for HermitianPd {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(&self.mat).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianPd {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let m = matrix_from_json(&j).map_err(D::Error::custom)?;
        HermitianPd::new(m).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Invertible complex matrix acting on ℙⁿ by x ↦ g·x. Condition number is
/// bounded by [`COND_LIMIT`] so the action never collapses numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    mat: DMatrix<Complex64>,
}

impl GroupElement {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        check_square_finite(&mat)?;
        // singular values via the Hermitian spectrum of g†g
        let gram = mat.adjoint() * &mat;
        let eig = herm_eigen(&gram);
        let smin2 = eig.values[0];
        let smax2 = eig.values[eig.values.len() - 1];
        if smin2 <= 0.0 {
            return Err(Error::InvalidMatrix("singular group element".into()));
        }
        let cond = (smax2 / smin2).sqrt();
        if cond > COND_LIMIT {
            return Err(Error::IllConditioned { cond, limit: COND_LIMIT });
        }
        Ok(Self { mat })
    }

    pub fn identity(m: usize) -> Self {
        Self { mat: DMatrix::identity(m, m) }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Gram matrix g†g — the Hermitian PD parameter of the induced potential.
    pub fn gram(&self) -> HermitianPd {
        HermitianPd::new(self.mat.adjoint() * &self.mat).expect("g†g is Hermitian PD")
    }

    /// Composition g₁∘g₂ (matrix product).
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement { mat: &self.mat * &other.mat }
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self
            .mat
            .clone()
            .try_inverse()
            .expect("condition number bounded at construction");
        GroupElement { mat: inv }
    }

    /// Apply to a homogeneous coordinate vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let x = DVector::from_column_slice(v);
        let y = &self.mat * x;
        y.iter().copied().collect()
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(&self.mat).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let m = matrix_from_json(&j).map_err(D::Error::custom)?;
        GroupElement::new(m).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Deterministic random Hermitian matrix with independent N(0, σ²) entries
/// (real diagonal, complex off-diagonal), used for seeds and test draws.
pub fn random_hermitian(m: usize, sigma: f64, rng: &mut impl rand::Rng) -> DMatrix<Complex64> {
    use rand::distributions::Distribution;
    let normal = rand_distr_standard_normal();
    let mut h = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        h[(i, i)] = Complex64::new(sigma * normal.sample(rng), 0.0);
        for j in (i + 1)..m {
            let re = sigma * normal.sample(rng) / 2f64.sqrt();
            let im = sigma * normal.sample(rng) / 2f64.sqrt();
            h[(i, j)] = Complex64::new(re, im);
            h[(j, i)] = Complex64::new(re, -im);
        }
    }
    h
}

// Box–Muller standard normal; keeps the dependency surface to `rand` core.
fn rand_distr_standard_normal() -> impl rand::distributions::Distribution<f64> {
    struct StdNormal;
    impl rand::distributions::Distribution<f64> for StdNormal {
        fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }
    StdNormal
}
