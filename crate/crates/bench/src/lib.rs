//! Benchmark harness for `rankgrad`: experiment specs, seed-parallel runs,
//! `(m, k)` grid studies, noise sweeps and Monte Carlo variance checks.
//!
//! ```
//! use rankgrad::functions::FunctionKind;
//! use rankgrad::optimizer::OptimizerConfig;
//! use rankgrad_bench::{run_experiment, ExperimentSpec};
//!
//! let config = OptimizerConfig::new(1.0, 0.01, 6, 3, 20).with_line_search(4, 0.5);
//! let mut spec = ExperimentSpec::new(FunctionKind::Quadratic, 10, config);
//! spec.seeds = vec![0, 1, 2];
//! let out = run_experiment(&spec).unwrap();
//! assert!(out.violations.is_empty());
//! assert!(out.aggregate.final_mean() < out.aggregate.points[0].mean);
//! ```

pub mod aggregate;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod noise;
pub mod output;
pub mod spec;
pub mod variance_check;

pub use aggregate::{AggregatePoint, AggregateResult};
pub use error::{BenchError, Result};
pub use experiment::{
    check_run, initial_point, run_experiment, run_seed, ExperimentOutcome, SeedRun, Violation,
};
pub use grid::{mk_grid_study, GridRow, GridStudy};
pub use noise::{default_sigmas, noise_sweep, NoiseLevel, NOISE_STEP};
pub use spec::{preset, Algorithm, ExperimentSpec, PRESETS};
pub use variance_check::{variance_checks, VarianceCheckConfig};
