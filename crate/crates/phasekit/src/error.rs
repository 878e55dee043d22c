use thiserror::Error;

/// Errors surfaced by operator construction, solvers, and IO.
#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("zero norm: {0}")]
    ZeroNorm(String),
    #[error("power method did not converge after {iters} iterations (residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("holographic separation condition violated: {0}")]
    SeparationViolated(String),
    #[error("aliased measurement: {0}")]
    Aliased(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PhaseError>;
