use thiserror::Error;

/// Errors produced by mesh construction, kernel algebra, and the solver.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions of two operands do not match.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A kernel with a zero diagonal entry has no pseudo-convolution inverse.
    #[error("singular kernel: zero diagonal entry in row {row}")]
    SingularKernel { row: usize },

    /// A grid failed validation (non-positive step, overflow, ...).
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// The gamma function is only evaluated for positive arguments here.
    #[error("gamma function argument must be positive, got {0}")]
    GammaDomain(f64),

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The per-step scalar solve exhausted its iteration budget.
    #[error("scalar solve did not converge at step {step} after {iterations} iterations")]
    NonConvergence { step: usize, iterations: usize },

    /// A text payload (CSV kernel, step list, ...) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
