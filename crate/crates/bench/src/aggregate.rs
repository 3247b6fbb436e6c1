use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Mean and sample standard deviation of `f` across seeds at one query count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub queries: u64,
    pub mean: f64,
    pub std: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub points: Vec<AggregatePoint>,
}

impl AggregateResult {
    /// Aligns `(cumulative queries, f)` curves on the union of their query
    /// counts. A curve's value between two of its own counts is the last value
    /// it reached; curves that stopped early keep their final value.
    ///
    /// Every curve must start at 0 queries.
    pub fn from_curves(curves: &[Vec<(u64, f64)>]) -> Result<Self> {
        if curves.len() < 2 {
            return Err(BenchError::TooFewSeeds(curves.len()));
        }
        if let Some(bad) = curves.iter().find(|c| c.first().map(|p| p.0) != Some(0)) {
            return Err(BenchError::Invalid(format!(
                "curve must start at 0 queries, starts at {:?}",
                bad.first().map(|p| p.0)
            )));
        }
        let mut grid: Vec<u64> = curves.iter().flat_map(|c| c.iter().map(|p| p.0)).collect();
        grid.sort_unstable();
        grid.dedup();

        let mut cursors = vec![0usize; curves.len()];
        let n = curves.len() as f64;
        let points = grid
            .into_iter()
            .map(|q| {
                let values: Vec<f64> = curves
                    .iter()
                    .zip(cursors.iter_mut())
                    .map(|(c, i)| {
                        while *i + 1 < c.len() && c[*i + 1].0 <= q {
                            *i += 1;
                        }
                        c[*i].1
                    })
                    .collect();
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
                AggregatePoint {
                    queries: q,
                    mean,
                    std: var.sqrt(),
                    n_seeds: curves.len(),
                }
            })
            .collect();
        Ok(Self { points })
    }

    pub fn last(&self) -> &AggregatePoint {
        self.points
            .last()
            .expect("aggregate has at least the initial point")
    }

    pub fn final_mean(&self) -> f64 {
        self.last().mean
    }
}
