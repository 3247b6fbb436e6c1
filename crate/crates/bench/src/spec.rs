//! Experiment descriptions.
//!
//! An experiment is written in TOML:
//!
//! ```toml
//! name = "quadratic-mk"
//! function = "quadratic"
//! dim = 100
//! algorithm = "zo-rank-sgd"
//! seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]
//! noise_sigma = 0.0
//! grid = [[10, 1], [10, 5], [10, 10]]
//!
//! [optimizer]
//! eta = 50.0
//! mu = 0.01
//! m = 10
//! k = 10
//! iterations = 200
//! line_search = { l = 5, gamma = 0.1 }
//! ```
//!
//! Every run is a pure function of `(spec, seed)`.

use std::path::Path;

use rankgrad::functions::{FunctionKind, TestFunction};
use rankgrad::optimizer::OptimizerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Ranking-oracle ZO-RankSGD.
    #[default]
    ZoRankSgd,
    /// Value-oracle two-point ZO-SGD baseline.
    ZoSgd,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ZoRankSgd => "zo-rank-sgd",
            Self::ZoSgd => "zo-sgd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    pub function: FunctionKind,
    pub dim: usize,
    #[serde(default)]
    pub algorithm: Algorithm,
    pub optimizer: OptimizerConfig,
    /// `(m, k)` pairs for grid studies; `optimizer.m`/`k` otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<(usize, usize)>,
    /// Standard deviation of additive oracle noise.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Noise levels for sweeps.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigmas: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Oracle query budget per run; overrides `optimizer.max_queries`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// `x0 = x0_scale * N(0, I)`. Defaults to 10 for the quadratic, 1 for
    /// Rosenbrock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_scale: Option<f64>,
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

impl ExperimentSpec {
    pub fn new(function: FunctionKind, dim: usize, optimizer: OptimizerConfig) -> Self {
        Self {
            name: String::new(),
            function,
            dim,
            algorithm: Algorithm::default(),
            optimizer,
            grid: Vec::new(),
            noise_sigma: 0.0,
            sigmas: Vec::new(),
            seeds: default_seeds(),
            budget: None,
            x0_scale: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Read {
            path: path.into(),
            source,
        })?;
        Self::from_toml(&text).map_err(|source| BenchError::Config {
            path: path.into(),
            source,
        })
    }

    pub fn test_function(&self) -> Result<TestFunction> {
        Ok(TestFunction::new(self.function, self.dim)?)
    }

    pub fn x0_scale(&self) -> f64 {
        self.x0_scale.unwrap_or(match self.function {
            FunctionKind::Quadratic => 10.0,
            FunctionKind::Rosenbrock => 1.0,
        })
    }

    /// Optimizer settings with the budget folded in.
    pub fn effective_config(&self) -> OptimizerConfig {
        let mut c = self.optimizer.clone();
        if self.budget.is_some() {
            c.max_queries = self.budget;
        }
        c
    }

    /// Copy of this spec running `(m, k)`.
    pub fn with_mk(&self, m: usize, k: usize) -> Self {
        let mut s = self.clone();
        s.optimizer.m = m;
        s.optimizer.k = k;
        s.grid.clear();
        s
    }

    pub fn with_noise(&self, sigma: f64) -> Self {
        let mut s = self.clone();
        s.noise_sigma = sigma;
        s.sigmas.clear();
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.test_function()?;
        self.effective_config().validate()?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(BenchError::Invalid(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(BenchError::Invalid(format!(
                "sigmas must be finite and >= 0, got {s}"
            )));
        }
        let scale = self.x0_scale();
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(BenchError::Invalid(format!(
                "x0_scale must be finite and >= 0, got {scale}"
            )));
        }
        if self.seeds.len() < 2 {
            return Err(BenchError::Invalid(format!(
                "need at least 2 seeds, got {}",
                self.seeds.len()
            )));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(BenchError::Invalid("seeds must be distinct".into()));
        }
        for &(m, k) in &self.grid {
            self.with_mk(m, k).effective_config().validate()?;
        }
        Ok(())
    }
}

/// Built-in experiment presets, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("quadratic-mk", include_str!("../presets/quadratic-mk.toml")),
    (
        "rosenbrock-mk",
        include_str!("../presets/rosenbrock-mk.toml"),
    ),
    (
        "quadratic-vs-zo-sgd",
        include_str!("../presets/quadratic-vs-zo-sgd.toml"),
    ),
    (
        "zo-sgd-quadratic",
        include_str!("../presets/zo-sgd-quadratic.toml"),
    ),
    (
        "rosenbrock-vs-zo-sgd",
        include_str!("../presets/rosenbrock-vs-zo-sgd.toml"),
    ),
    (
        "zo-sgd-rosenbrock",
        include_str!("../presets/zo-sgd-rosenbrock.toml"),
    ),
    (
        "quadratic-noise",
        include_str!("../presets/quadratic-noise.toml"),
    ),
    (
        "quadratic-theorem",
        include_str!("../presets/quadratic-theorem.toml"),
    ),
    (
        "quadratic-high-dim",
        include_str!("../presets/quadratic-high-dim.toml"),
    ),
];

pub fn preset(name: &str) -> Option<ExperimentSpec> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ExperimentSpec::from_toml(text).expect("built-in preset parses"))
}
