//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while building grids, evaluating potentials,
/// or running the solvers. Each variant carries enough context to identify
/// the offending input without a debugger.
#[derive(Debug, Error)]
pub enum Error {
    /// A homogeneous coordinate vector with no nonzero entry.
    #[error("zero vector cannot represent a point of projective space")]
    ZeroVector,

    /// A matrix failed a structural requirement (shape, Hermitianity, …).
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// A matrix that must be positive definite is not.
    #[error("matrix is not positive definite: min eigenvalue {min_eig:.3e}")]
    NotPositiveDefinite { min_eig: f64 },

    /// Condition number beyond the supported range.
    #[error("matrix condition number {cond:.3e} exceeds limit {limit:.3e}")]
    IllConditioned { cond: f64, limit: f64 },

    /// A scalar argument outside its documented domain.
    #[error("invalid argument {name}: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// An integrand or barrier produced a non-finite value at a grid point.
    #[error("non-finite value {value} at grid point {index}")]
    NonFiniteSample { index: usize, value: f64 },

    /// The Kähler form along a quadrature path stopped being positive.
    #[error("path left the space of Kähler potentials at grid point {index} (t = {t:.4})")]
    PathLeftKahlerCone { index: usize, t: f64 },

    /// A potential that must dominate (or be dominated by) a barrier fails to
    /// touch it anywhere within tolerance.
    #[error("no contact within tolerance: min |u - v0| = {gap:.3e} exceeds {tol:.3e}")]
    NoContact { gap: f64, tol: f64 },

    /// Feasibility violated beyond tolerance (u must stay on one side of v0).
    #[error("feasibility violated at grid point {index}: signed gap {gap:.3e}")]
    Infeasible { index: usize, gap: f64 },

    /// An empty input where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Mismatched dimensions between two inputs.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Serialization/deserialization failure for one of the JSON artifacts.
    #[error("serialization: {0}")]
    Serialization(#[from] serde_json::Error),

    /// The solver exhausted its iteration budget without a passing
    /// certificate. The partial report is still available to the caller.
    #[error("solver reached iteration cap {iters} without certificate (residual {residual:.3e})")]
    Uncertified { iters: usize, residual: f64 },
}
