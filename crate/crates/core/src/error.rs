use thiserror::Error;

use crate::oracle::OracleError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("number of candidates must be at least 2, got {0}")]
    TooFewCandidates(usize),

    #[error("smoothing radius must be positive and finite, got {0}")]
    InvalidSmoothing(f64),

    #[error("base point must have at least one coordinate")]
    EmptyPoint,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid (m, k) = ({m}, {k}): need 1 <= k <= m")]
    InvalidRankParameters { m: usize, k: usize },

    #[error("malformed ranking outcome: {0}")]
    MalformedOutcome(String),

    #[error("outcome ranks {outcome} candidates but the batch has {batch}")]
    CandidateCountMismatch { outcome: usize, batch: usize },

    #[error("non-finite value {value} at candidate {index} (1-based)")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sample count {got} is below the minimum of {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error(transparent)]
    Oracle(#[from] OracleError),
}
