use thiserror::Error;

/// Errors surfaced by the exact kernel and the canonicalization pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operation requires a nonzero matrix")]
    ZeroMatrix,

    #[error("factor is not invertible: {0}")]
    NotInvertible(String),

    #[error("no usable mixing constant among {probes} probes (caller precondition violated)")]
    MixingConstantNotFound { probes: usize },

    #[error("random generation did not reach the requested rank after {0} attempts")]
    RetriesExhausted(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("canonical shape verification failed: {0}")]
    ShapeVerification(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
