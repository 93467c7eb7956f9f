use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite log-posterior at initialization: {0}")]
    NonFiniteInit(String),

    #[error("degenerate reference configuration: all points coincide")]
    DegenerateReference,

    #[error("empty draw sequence")]
    EmptyDraws,

    #[error("draws have not been aligned")]
    Unaligned,

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("autocorrelation parameter unidentified: weight matrix has no non-zero eigenvalue")]
    Unidentified,
}

impl Error {
    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFiniteInit(_) | Error::Unidentified)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
