use rankgrad::functions::Objective;
use rankgrad::optimizer::{run, run_zo_sgd, Trajectory, ValueOracle};
use rankgrad::oracle::{Metered, NoiseSpec, NoisyOracle, OracleError};
use rankgrad::rng::{standard_normal_vec, stream_rng, Stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::AggregateResult;
use crate::error::{BenchError, Result};
use crate::spec::{Algorithm, ExperimentSpec};

/// One completed seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub trajectory: Trajectory,
    /// Points seen by the oracle wrapper.
    pub oracle_queries: u64,
}

impl SeedRun {
    pub fn curve(&self) -> Vec<(u64, f64)> {
        self.trajectory.value_curve()
    }

    pub fn final_value(&self) -> f64 {
        self.trajectory
            .final_value()
            .expect("benchmark runs record f")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

/// A violated harness invariant. Any of these makes the CLI exit nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub spec: ExperimentSpec,
    pub aggregate: AggregateResult,
    /// Successful runs, in seed order.
    pub runs: Vec<SeedRun>,
    pub failures: Vec<SeedFailure>,
    pub violations: Vec<Violation>,
}

impl ExperimentOutcome {
    pub fn warnings(&self) -> impl Iterator<Item = String> + '_ {
        self.failures.iter().map(|f| {
            format!(
                "seed {} failed and was left out of the aggregate: {}",
                f.seed, f.error
            )
        })
    }

    pub fn final_values(&self) -> Vec<f64> {
        self.runs.iter().map(SeedRun::final_value).collect()
    }
}

/// `x0_scale * N(0, I)` from the seed's initial-point stream.
pub fn initial_point(spec: &ExperimentSpec, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, Stream::InitialPoint);
    let scale = spec.x0_scale();
    standard_normal_vec(&mut rng, spec.dim)
        .into_iter()
        .map(|v| scale * v)
        .collect()
}

fn noise(spec: &ExperimentSpec) -> Result<NoiseSpec> {
    NoiseSpec::new(spec.noise_sigma).map_err(|e: OracleError| BenchError::Invalid(e.to_string()))
}

/// Runs one seed of `spec`.
pub fn run_seed(spec: &ExperimentSpec, seed: u64) -> Result<SeedRun> {
    let f = spec.test_function()?;
    let config = spec.effective_config();
    let x0 = initial_point(spec, seed);
    let mut dirs = stream_rng(seed, Stream::Directions);
    let noise_rng = stream_rng(seed, Stream::OracleNoise);
    let diagnostics: Option<&dyn Objective> = Some(&f);
    let wrap = |source| BenchError::Run { seed, source };
    let (trajectory, oracle_queries) = match spec.algorithm {
        Algorithm::ZoRankSgd => {
            let mut oracle = Metered::new(NoisyOracle::new(f, noise(spec)?, noise_rng));
            let t = run(&config, &mut oracle, &x0, &mut dirs, diagnostics).map_err(wrap)?;
            (t, oracle.queries())
        }
        Algorithm::ZoSgd => {
            let mut oracle = ValueOracle::noisy(f, noise(spec)?, noise_rng);
            let t = run_zo_sgd(&config, &mut oracle, &x0, &mut dirs, diagnostics).map_err(wrap)?;
            (t, oracle.evaluations())
        }
    };
    Ok(SeedRun {
        seed,
        trajectory,
        oracle_queries,
    })
}

/// Invariants every benchmark run must satisfy.
pub fn check_run(spec: &ExperimentSpec, run: &SeedRun) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |message: String| {
        out.push(Violation {
            seed: run.seed,
            message,
        })
    };
    if run.trajectory.total_queries() != run.oracle_queries {
        flag(format!(
            "reported {} queries but the oracle saw {}",
            run.trajectory.total_queries(),
            run.oracle_queries
        ));
    }
    if let Some(budget) = spec.effective_config().max_queries {
        if run.oracle_queries > budget {
            flag(format!(
                "spent {} queries over a budget of {budget}",
                run.oracle_queries
            ));
        }
    }
    // Noiseless comparisons with the current point among the line-search
    // candidates can never accept a worse point.
    if spec.noise_sigma == 0.0 && spec.optimizer.line_search.is_some() {
        for w in run.curve().windows(2) {
            if w[1].1 > w[0].1 {
                flag(format!(
                    "f increased from {} to {} at {} queries",
                    w[0].1, w[1].1, w[1].0
                ));
                break;
            }
        }
    }
    out
}

/// Runs every seed in parallel and aggregates the survivors in seed order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    if !spec.grid.is_empty() {
        return Err(BenchError::Invalid(
            "spec has a grid; use mk_grid_study".into(),
        ));
    }
    let results: Vec<(u64, Result<SeedRun>)> = spec
        .seeds
        .par_iter()
        .map(|&s| (s, run_seed(spec, s)))
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, r) in results {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => failures.push(SeedFailure {
                seed,
                error: e.to_string(),
            }),
        }
    }
    let violations = runs.iter().flat_map(|r| check_run(spec, r)).collect();
    let curves: Vec<_> = runs.iter().map(SeedRun::curve).collect();
    let aggregate = AggregateResult::from_curves(&curves)?;
    Ok(ExperimentOutcome {
        spec: spec.clone(),
        aggregate,
        runs,
        failures,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rankgrad::functions::FunctionKind;
    use rankgrad::optimizer::OptimizerConfig;

    fn small() -> ExperimentSpec {
        let mut s = ExperimentSpec::new(
            FunctionKind::Quadratic,
            5,
            OptimizerConfig::new(1.0, 0.01, 4, 2, 6).with_line_search(3, 0.5),
        );
        s.seeds = vec![3, 1, 2];
        s
    }

    #[test]
    fn zero_iterations_aggregates_initial_points() {
        let mut s = small();
        s.optimizer.iterations = 0;
        let out = run_experiment(&s).unwrap();
        assert_eq!(out.aggregate.points.len(), 1);
        let p = &out.aggregate.points[0];
        assert_eq!((p.queries, p.n_seeds), (0, 3));
        let f0: Vec<f64> = s
            .seeds
            .iter()
            .map(|&sd| rankgrad::vector::norm_sq(&initial_point(&s, sd)))
            .collect();
        assert!((p.mean - f0.iter().sum::<f64>() / 3.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_and_seed_ordered() {
        let s = small();
        let a = run_experiment(&s).unwrap();
        let b = run_experiment(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), [3, 1, 2]);
        assert!(a.violations.is_empty());
        assert_eq!(a.runs[0].oracle_queries, 6 * 7);
    }

    #[test]
    fn zero_noise_matches_noiseless() {
        let s = small();
        let mut noisy = s.clone();
        noisy.noise_sigma = 0.5;
        let a = run_seed(&s, 7).unwrap();
        assert_eq!(a, run_seed(&s.with_noise(0.0), 7).unwrap());
        assert_ne!(a.trajectory, run_seed(&noisy, 7).unwrap().trajectory);
    }

    #[test]
    fn failed_seeds_are_reported() {
        let mut s = small();
        s.x0_scale = Some(1e200);
        // f overflows to infinity, so every oracle call fails
        let err = run_experiment(&s).unwrap_err();
        assert!(matches!(err, BenchError::TooFewSeeds(0)));
    }

    #[test]
    fn zo_sgd_respects_budget() {
        let mut s = small();
        s.algorithm = Algorithm::ZoSgd;
        s.budget = Some(20);
        let out = run_experiment(&s).unwrap();
        for r in &out.runs {
            assert_eq!(r.oracle_queries, 14);
        }
        assert!(out.violations.is_empty());
    }
}
