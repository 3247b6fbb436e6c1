use rankgrad::variance::lemma4_bound;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::experiment::{run_experiment, ExperimentOutcome};
use crate::spec::ExperimentSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub m: usize,
    pub k: usize,
    /// Variance bound `2d/|E| + N/|E|^2 M2 + M1` with `M1 = M2 = 2d`, the
    /// function-independent caps. Useful for comparing combos, not as an
    /// absolute prediction.
    pub predicted_variance: f64,
    pub outcome: ExperimentOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStudy {
    pub rows: Vec<GridRow>,
}

impl GridStudy {
    pub fn row(&self, m: usize, k: usize) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.m == m && r.k == k)
    }
}

/// Runs `base` once per `(m, k)`. Combos run one after another; seeds within
/// a combo run in parallel.
pub fn mk_grid_study(base: &ExperimentSpec, combos: &[(usize, usize)]) -> Result<GridStudy> {
    if combos.is_empty() {
        return Err(BenchError::Invalid(
            "grid study needs at least one (m, k) pair".into(),
        ));
    }
    let cap = 2.0 * base.dim as f64;
    let rows = combos
        .iter()
        .map(|&(m, k)| {
            let spec = base.with_mk(m, k);
            let predicted_variance = lemma4_bound(m, k, base.dim, cap, cap)?;
            Ok(GridRow {
                m,
                k,
                predicted_variance,
                outcome: run_experiment(&spec)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GridStudy { rows })
}
