use super::{OracleError, OracleRequest, RankingOracle};
use crate::ranking::RankingOutcome;

/// Counts evaluated points: every answered request adds its `m`.
#[derive(Debug, Clone)]
pub struct Metered<O> {
    inner: O,
    queries: u64,
    calls: u64,
}

impl<O> Metered<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            queries: 0,
            calls: 0,
        }
    }

    /// Total points submitted to the wrapped oracle.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn inner_mut(&mut self) -> &mut O {
        &mut self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: RankingOracle> RankingOracle for Metered<O> {
    fn rank(&mut self, request: &OracleRequest) -> Result<RankingOutcome, OracleError> {
        let out = self.inner.rank(request)?;
        self.queries += request.m() as u64;
        self.calls += 1;
        Ok(out)
    }
}
