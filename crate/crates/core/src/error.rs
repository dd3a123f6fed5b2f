use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("alpha values must be pairwise distinct (indices {0} and {1} coincide)")]
    DuplicateAlpha(usize, usize),

    #[error("empty alpha set")]
    EmptyAlphaSet,

    #[error("multi-index entry {index} is {value}, must be at least {min}")]
    IndexTooSmall { index: usize, value: i64, min: i64 },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("exponential series for {alpha} diverges at p = {p}")]
    Divergent { p: u64, alpha: String },

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("matrix is not in the set M: {0}")]
    NotInM(String),

    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
