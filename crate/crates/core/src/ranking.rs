use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The answer of an `(m, k)`-ranking oracle: the `k` best of `m` candidates,
/// best first.
///
/// Indices are stored 0-based. Constructors and accessors that speak in
/// 1-based indices (the convention of oracle answers at API boundaries) say so
/// in their name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawOutcome", into = "RawOutcome")]
pub struct RankingOutcome {
    m: usize,
    ranked: Vec<usize>,
}

/// Wire form: 1-based indices.
#[derive(Serialize, Deserialize)]
struct RawOutcome {
    m: usize,
    ordered_best: Vec<usize>,
}

impl TryFrom<RawOutcome> for RankingOutcome {
    type Error = Error;

    fn try_from(raw: RawOutcome) -> Result<Self> {
        RankingOutcome::from_one_based(raw.m, &raw.ordered_best)
    }
}

impl From<RankingOutcome> for RawOutcome {
    fn from(o: RankingOutcome) -> Self {
        RawOutcome {
            m: o.m,
            ordered_best: o.to_one_based(),
        }
    }
}

impl RankingOutcome {
    /// Validates 0-based indices.
    pub fn from_zero_based(m: usize, ranked: Vec<usize>) -> Result<Self> {
        let k = ranked.len();
        if k == 0 || k > m {
            return Err(Error::MalformedOutcome(format!(
                "need 1 <= k <= m, got k = {k}, m = {m}"
            )));
        }
        let mut seen = vec![false; m];
        for &i in &ranked {
            if i >= m {
                return Err(Error::MalformedOutcome(format!(
                    "index {} out of range 1..={m}",
                    i + 1
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::MalformedOutcome(format!(
                    "index {} appears twice",
                    i + 1
                )));
            }
        }
        Ok(Self { m, ranked })
    }

    /// Validates 1-based indices, e.g. `(1, 3, 2)` for "x1 best, then x3, then x2".
    pub fn from_one_based(m: usize, ordered_best: &[usize]) -> Result<Self> {
        if let Some(&bad) = ordered_best.iter().find(|&&i| i == 0 || i > m) {
            return Err(Error::MalformedOutcome(format!(
                "index {bad} out of range 1..={m}"
            )));
        }
        Self::from_zero_based(m, ordered_best.iter().map(|i| i - 1).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.ranked.len()
    }

    /// Ranked indices, 0-based, best first.
    pub fn ranked(&self) -> &[usize] {
        &self.ranked
    }

    /// Ranked indices, 1-based, best first.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.ranked.iter().map(|i| i + 1).collect()
    }

    /// 0-based index of the best candidate.
    pub fn best(&self) -> usize {
        self.ranked[0]
    }

    /// 0-based position of each candidate in the ranking, `None` when unranked.
    pub fn positions(&self) -> Vec<Option<usize>> {
        let mut pos = vec![None; self.m];
        for (p, &i) in self.ranked.iter().enumerate() {
            pos[i] = Some(p);
        }
        pos
    }

    /// Unranked indices (0-based, ascending).
    pub fn unranked(&self) -> Vec<usize> {
        self.positions()
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.is_none().then_some(i))
            .collect()
    }
}
