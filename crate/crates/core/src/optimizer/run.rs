use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{OptimizerConfig, StepParams};
use super::step::{zo_rank_sgd_step, IterationRecord};
use super::zo_sgd::{zo_sgd_step, ValueOracle};
use crate::error::{Error, Result};
use crate::functions::Objective;
use crate::oracle::{Metered, RankingOracle};
use crate::vector;

/// Iterates of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_point: Vec<f64>,
    /// Objective at the initial point, when known.
    pub initial_value: Option<f64>,
    pub records: Vec<IterationRecord>,
}

impl Trajectory {
    fn start(x0: &[f64], diagnostics: Option<&dyn Objective>) -> Self {
        Self {
            initial_point: x0.to_vec(),
            initial_value: diagnostics.map(|f| f.value(x0)),
            records: Vec::new(),
        }
    }

    pub fn final_point(&self) -> &[f64] {
        self.records
            .last()
            .map_or(&self.initial_point, |r| &r.point_after)
    }

    pub fn final_value(&self) -> Option<f64> {
        self.records
            .last()
            .map_or(self.initial_value, |r| r.f_value)
    }

    pub fn total_queries(&self) -> u64 {
        self.records.last().map_or(0, |r| r.total_queries)
    }

    /// `(cumulative queries, f)` including the initial point at 0 queries.
    pub fn value_curve(&self) -> Vec<(u64, f64)> {
        let mut out = Vec::with_capacity(self.records.len() + 1);
        if let Some(v) = self.initial_value {
            out.push((0, v));
        }
        out.extend(
            self.records
                .iter()
                .filter_map(|r| r.f_value.map(|v| (r.total_queries, v))),
        );
        out
    }
}

/// A run that stopped early. `partial` holds every completed iteration.
#[derive(Debug, Clone, Error)]
#[error("run aborted after {} iterations: {source}", partial.records.len())]
pub struct RunError {
    pub partial: Trajectory,
    #[source]
    pub source: Error,
}

fn drive<S>(
    config: &OptimizerConfig,
    x0: &[f64],
    diagnostics: Option<&dyn Objective>,
    mut step: S,
) -> Result<Trajectory, RunError>
where
    S: FnMut(&[f64], &StepParams) -> Result<(Vec<f64>, IterationRecord)>,
{
    let mut traj = Trajectory::start(x0, diagnostics);
    if let Err(source) = config.validate() {
        return Err(RunError {
            partial: traj,
            source,
        });
    }
    if x0.is_empty() {
        return Err(RunError {
            partial: traj,
            source: Error::EmptyPoint,
        });
    }
    let d = x0.len();
    let per_iter = config.queries_per_iteration();
    let mut x = x0.to_vec();
    let mut total = 0u64;
    for t in 1..=config.iterations {
        if config
            .max_queries
            .is_some_and(|budget| total + per_iter > budget)
        {
            break;
        }
        let params = config.step_params(t, d);
        let (next, mut rec) = match step(&x, &params) {
            Ok(v) => v,
            Err(source) => {
                return Err(RunError {
                    partial: traj,
                    source,
                })
            }
        };
        total += rec.queries;
        rec.t = t;
        rec.total_queries = total;
        if let Some(f) = diagnostics {
            rec.f_value = Some(f.value(&next));
            rec.true_grad_norm = f.gradient(&x).map(|g| vector::norm(&g));
        }
        traj.records.push(rec);
        x = next;
    }
    Ok(traj)
}

/// Runs ZO-RankSGD (with line search when configured) for `config.iterations`
/// iterations or until the query budget is exhausted.
///
/// `diagnostics`, when given, is only used to annotate records with true
/// objective values; the optimizer itself sees nothing but the oracle.
pub fn run<O, R>(
    config: &OptimizerConfig,
    oracle: &mut Metered<O>,
    x0: &[f64],
    rng: &mut R,
    diagnostics: Option<&dyn Objective>,
) -> Result<Trajectory, RunError>
where
    O: RankingOracle,
    R: rand::Rng + ?Sized,
{
    let start = oracle.queries();
    let traj = drive(config, x0, diagnostics, |x, p| {
        let out = zo_rank_sgd_step(x, p, oracle, rng)?;
        Ok(out)
    })?;
    debug_assert_eq!(oracle.queries() - start, traj.total_queries());
    Ok(traj)
}

/// Runs the ZO-SGD value-oracle baseline under the same budget accounting.
pub fn run_zo_sgd<F, R>(
    config: &OptimizerConfig,
    oracle: &mut ValueOracle<F>,
    x0: &[f64],
    rng: &mut R,
    diagnostics: Option<&dyn Objective>,
) -> Result<Trajectory, RunError>
where
    F: Objective,
    R: rand::Rng + ?Sized,
{
    drive(config, x0, diagnostics, |x, p| {
        zo_sgd_step(x, p, oracle, rng)
    })
}
