//! Numerical laboratory for mean-field (McKean-Vlasov) stochastic systems.
//!
//! The crate simulates weakly interacting particle systems whose coefficients
//! depend on the empirical measure of the ensemble, both in finite dimensions
//! (Euler-Maruyama with distribution-dependent drift/diffusion) and for
//! spectral Galerkin discretizations of 2D Navier-Stokes, Cahn-Hilliard and
//! Kuramoto-Sivashinsky equations on the periodic torus. Empirical optimal
//! transport (exact assignment-based Wasserstein-2) quantifies how fast the
//! empirical law of an N-particle system approaches its mean-field limit,
//! and numeric auditors probe the structural inequalities (coercivity,
//! growth, local monotonicity) the solution theory rests on.
//!
//! Modules:
//! - [`spectral`]: Fourier fields on the torus, Leray projection, Stokes
//!   operator, the Navier-Stokes bilinear term, scalar differential operators.
//! - [`mvsde`]: finite-dimensional distribution-dependent SDEs, radial
//!   cut-off localization, Euler-Maruyama particle stepping.
//! - [`particles`]: the N-coupled-field SPDE engine with IMEX stepping,
//!   interaction kernels and finite-mode Q-Wiener noise.
//! - [`measures`]: empirical measures, cost matrices and exact W2 via a
//!   shortest-augmenting-path assignment solver.
//! - [`conditions`]: sampled auditors for the structural conditions.
//! - [`experiments`]: batch experiment runners, config ingestion and
//!   persistence backing the `mvlab` binary.

pub mod conditions;
pub mod error;
pub mod experiments;
pub mod measures;
pub mod mvsde;
pub mod particles;
pub mod rng;
pub mod spectral;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
