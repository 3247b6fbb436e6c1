//! Ranking oracles.
//!
//! Optimizers talk to a [`RankingOracle`] only. Backends differ in where the
//! answer comes from: a known function ([`ExactOracle`]), a known function
//! plus Gaussian value noise ([`NoisyOracle`]), or a human answering through a
//! [`Mailbox`] ([`DeferredOracle`]). [`Metered`] wraps any of them and counts
//! evaluated points.

mod deferred;
mod exact;
mod metered;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ranking::RankingOutcome;

pub use deferred::{deferred_rank, DeferredOracle, Mailbox, PendingRank};
pub use exact::{argmin_select, exact_rank, noisy_rank, ExactOracle, NoiseSpec, NoisyOracle};
pub use metered::Metered;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    /// `index` is 1-based.
    #[error("objective returned non-finite value {value} at candidate {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("malformed answer: {0}")]
    Malformed(String),

    #[error("timed out waiting for an answer to request {0}")]
    Timeout(RequestId),

    #[error("request {0} was already answered")]
    Stale(RequestId),

    #[error("request {0} is not pending")]
    UnknownRequest(RequestId),

    #[error("another request ({0}) is still pending")]
    Busy(RequestId),

    #[error("session cancelled")]
    Cancelled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub u64);

impl std::fmt::Display for RequestId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

static NEXT_REQUEST_ID: AtomicU64 = AtomicU64::new(1);

impl RequestId {
    /// Process-unique id.
    pub fn fresh() -> Self {
        RequestId(NEXT_REQUEST_ID.fetch_add(1, Ordering::Relaxed))
    }
}

/// Ask for the `k` best of `points`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRequest {
    pub points: Vec<Vec<f64>>,
    pub k: usize,
    pub request_id: RequestId,
}

impl OracleRequest {
    pub fn new(points: Vec<Vec<f64>>, k: usize) -> Result<Self, OracleError> {
        let m = points.len();
        if m < 2 || k < 1 || k > m {
            return Err(OracleError::InvalidRequest(format!(
                "need m >= 2 and 1 <= k <= m, got m = {m}, k = {k}"
            )));
        }
        Ok(Self {
            points,
            k,
            request_id: RequestId::fresh(),
        })
    }

    /// A best-of-`m` selection request. Unlike ranking requests a single point
    /// is allowed.
    pub fn select(points: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        if points.is_empty() {
            return Err(OracleError::InvalidRequest(
                "no points to select from".into(),
            ));
        }
        Ok(Self {
            points,
            k: 1,
            request_id: RequestId::fresh(),
        })
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }
}

pub trait RankingOracle {
    fn rank(&mut self, request: &OracleRequest) -> Result<RankingOutcome, OracleError>;
}

impl<O: RankingOracle + ?Sized> RankingOracle for &mut O {
    fn rank(&mut self, request: &OracleRequest) -> Result<RankingOutcome, OracleError> {
        (**self).rank(request)
    }
}

impl<O: RankingOracle + ?Sized> RankingOracle for Box<O> {
    fn rank(&mut self, request: &OracleRequest) -> Result<RankingOutcome, OracleError> {
        (**self).rank(request)
    }
}
