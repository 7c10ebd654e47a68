use thiserror::Error;

/// Errors produced by the decoding library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (Cholesky failed)")]
    NotPositiveDefinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("segment too short: {0}")]
    SegmentTooShort(String),

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
