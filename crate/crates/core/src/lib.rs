//! Zeroth-order optimization from ranking feedback.
//!
//! An `(m, k)`-ranking oracle looks at `m` points and reports the `k` best in
//! order, and nothing else. This crate turns such answers into descent
//! directions and optimizers:
//!
//! * [`perturbation`], [`ranking`], [`dag`] and [`estimator`] build the
//!   rank-based gradient estimate from a batch of Gaussian perturbations and
//!   an oracle answer;
//! * [`oracle`] provides exact, noisy and human-answered (deferred) oracles;
//! * [`optimizer`] implements ZO-RankSGD, ranking-based line search, the
//!   interactive best-point variant and a value-oracle ZO-SGD baseline;
//! * [`variance`] estimates the moments that govern the estimator's variance.
//!
//! ```
//! use rankgrad::prelude::*;
//!
//! let f = TestFunction::quadratic(20);
//! let mut oracle = Metered::new(ExactOracle::new(f));
//! let config = OptimizerConfig::new(0.5, 0.01, 10, 10, 200).with_line_search(5, 0.5);
//! let x0 = vec![3.0; 20];
//! let mut rng = stream_rng(1, Stream::Directions);
//! let traj = run(&config, &mut oracle, &x0, &mut rng, Some(&f)).unwrap();
//! assert!(traj.final_value().unwrap() < f.value(&x0));
//! assert_eq!(oracle.queries(), 200 * 15);
//! ```

pub mod dag;
pub mod error;
pub mod estimator;
pub mod functions;
pub mod optimizer;
pub mod oracle;
pub mod perturbation;
pub mod ranking;
pub mod rng;
pub mod variance;
pub mod vector;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dag::{build_dag, edge_count, neighbor_pair_count, ComparisonDag};
    pub use crate::error::{Error, Result};
    pub use crate::estimator::{
        estimate_gradient, pairwise_estimate, rank_weights, GradientEstimate,
    };
    pub use crate::functions::{
        eval_function, grad_function, FunctionKind, Objective, TestFunction,
    };
    pub use crate::optimizer::{
        interactive_step, line_search_step, run, run_interactive, run_zo_sgd, zo_rank_sgd_step,
        InteractiveParams, InteractiveState, OptimizerConfig, Phase, Trajectory, ValueOracle,
    };
    pub use crate::oracle::{
        argmin_select, exact_rank, noisy_rank, ExactOracle, Metered, NoiseSpec, NoisyOracle,
        OracleRequest, RankingOracle,
    };
    pub use crate::perturbation::{sample_perturbations, PerturbationBatch};
    pub use crate::ranking::RankingOutcome;
    pub use crate::rng::{stream_rng, Stream};
}

// Compile and run the guide's and README's code blocks as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/ranking-oracles.md")]
    pub struct RankingOracles;
    #[doc = include_str!("../../../book/src/comparison-graph.md")]
    pub struct ComparisonGraph;
    #[doc = include_str!("../../../book/src/estimator.md")]
    pub struct Estimator;
    #[doc = include_str!("../../../book/src/zo-ranksgd.md")]
    pub struct ZoRankSgd;
    #[doc = include_str!("../../../book/src/interactive.md")]
    pub struct Interactive;
    #[doc = include_str!("../../../book/src/variance-lab.md")]
    pub struct VarianceLab;
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    pub struct Reproducibility;
    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
}
