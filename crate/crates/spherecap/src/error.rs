use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument was outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrand produced a NaN, or quadrature failed outright.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// A linear system was singular or unacceptably ill-conditioned.
    #[error("linear algebra error: {0}")]
    Linalg(String),

    /// A solved coefficient fell outside its rigorous bracket.
    #[error("coefficient C({m},{k}) = {value} violates bracket [{lower}, {upper}]")]
    CoeffBracket {
        m: usize,
        k: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    /// An instance is too large for the exhaustive support enumeration.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// The convex solver failed to converge within its iteration cap.
    #[error("solver did not converge: {0}")]
    Solver(String),

    /// A result failed its own internal validity checks.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    /// Malformed instance file or serialized table.
    #[error("parse error: {0}")]
    Parse(String),
}
