//! Geometric probability on spheres: coverage processes and the GCC
//! condition number of polyhedral conic feasibility.
//!
//! The crate computes, exactly where a formula exists and as a rigorous
//! bound elsewhere:
//!
//! * the probability `p(n, m, α)` that `n` spherical caps of angular
//!   radius `α` with uniform random centers fail to cover `S^m`
//!   ([`coverage`]), together with the classical `S^1`/`S^2` reference
//!   formulas (Stevens, Gilbert, Miles) and Wendel's hemisphere
//!   probability;
//! * the distribution of the GCC condition number `C(A) = 1/|cos ρ(A)|`
//!   of a random instance `A ∈ (S^m)^n`, conditioned on feasibility,
//!   and bounds on its log-expectation ([`condition`]);
//! * the simplex-moment coefficients `C(m,k)` that both families of
//!   formulas share, by closed form, by solving a linear system of
//!   weighted integrals, and by direct Monte Carlo ([`coeffs`]);
//! * smallest including caps of explicit instances, with a convex-hull
//!   certificate on every returned result ([`geom`]);
//! * seeded, reproducible Monte Carlo estimators that validate every
//!   analytic quantity above ([`mc`]).
//!
//! All estimators are deterministic functions of their seed; results do
//! not depend on the number of worker threads.

pub mod coeffs;
pub mod condition;
pub mod coverage;
mod error;
pub mod geom;
pub mod linalg;
pub mod mc;
pub mod quad;
pub mod specfun;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
