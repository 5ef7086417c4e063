//! Variational Monge–Ampère energy problems on complex projective space ℙⁿ.
//!
//! The library works inside the finite-dimensional family of *admissible*
//! Kähler potentials
//!
//! ```text
//!     u_A(x) = log( x̂† A x̂ ),      A Hermitian positive definite, x̂ ∈ ℂᵐ, ‖x̂‖ = 1,
//! ```
//!
//! where m = n+1 and the reference metric is Fubini–Study. Within this family
//! the Monge–Ampère energy has the closed form E(u_A) = (1/m)·log det A, the
//! Mabuchi geodesics are matrix geodesics A(t) = A₀^{1/2} exp(tH) A₀^{1/2},
//! and extremality of an energy-optimal potential above/below an obstacle is
//! certified by a convex-hull condition on the moment map μ(x) = x̂x̂† − I/m.
//!
//! Modules:
//! * [`projective`] — points of ℙⁿ, charts, quadrature grids, complex Hessians;
//! * [`potentials`] — admissible potentials, energy (closed form and path
//!   quadrature), geodesics, Hamiltonian flow potentials, a homogeneous
//!   Monge–Ampère residual for fibered potentials;
//! * [`moment`] — moment map, Hamiltonians, contact sets, hull certificates,
//!   uniqueness diagnostics for torus directions;
//! * [`solver`] — energy minimization/maximization over admissible potentials
//!   above/below an obstacle, with certificate-based termination;
//! * [`sweep`] — fibered families over a disc, the two-regime counterexample
//!   family, subharmonicity diagnostics and determinant-line bridges.
//!
//! All randomized constructions take explicit seeds and all parallel
//! reductions are performed in a fixed order, so every public entry point is
//! deterministic: same inputs, same bytes out, independent of thread count.

pub mod error;
pub mod linalg;
pub mod moment;
pub mod parallel;
pub mod potentials;
pub mod projective;
pub mod solver;
pub mod sweep;

pub use error::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Crate version, recorded in run manifests by downstream tools.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
