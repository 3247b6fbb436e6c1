//! ZO-RankSGD, ranking-based line search, the interactive best-point variant
//! and the ZO-SGD value-oracle baseline.

mod config;
mod interactive;
mod run;
mod step;
mod trajectory;
mod zo_sgd;

pub use config::{
    LineSearch, OptimizerConfig, Schedule, StepParams, BENCHMARK_MU, INTERACTIVE_ETA,
    INTERACTIVE_GAMMA, INTERACTIVE_M, INTERACTIVE_MU,
};
pub use interactive::{
    interactive_step, run_interactive, InteractiveParams, InteractiveState, Phase, SelectionEffect,
    StepEvent,
};
pub use run::{run, run_zo_sgd, RunError, Trajectory};
pub use step::{
    line_search_candidates, line_search_step, step_from_batch, zo_rank_sgd_step,
    zo_rank_sgd_step_with, IterationRecord,
};
pub use trajectory::{
    read_trajectory, write_trajectory, TrajectoryError, TrajectoryRecord, TRAJECTORY_FORMAT,
    TRAJECTORY_VERSION,
};
pub use zo_sgd::{two_point_estimate, zo_sgd_step, ValueOracle};
