use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size search over a best-of-`l` selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    /// Number of candidates, including the current point.
    pub l: usize,
    /// Shrinking rate in `(0, 1)`.
    pub gamma: f64,
}

/// Step-size presets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// `eta = sqrt(1 / (d T))`, `mu = sqrt(d / (c_d^2 T))`.
    ///
    /// The convergence constant `c_d` has no closed form; `c_d` here is a
    /// user-supplied stand-in, so only the `sqrt(d / T)` scaling of `mu` is
    /// faithful.
    Theorem { c_d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Step size.
    pub eta: f64,
    /// Smoothing radius.
    pub mu: f64,
    pub m: usize,
    pub k: usize,
    /// Iteration budget `T`.
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_search: Option<LineSearch>,
    /// Multiplies `eta` and `mu` after every iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    /// Overrides `eta` and `mu` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    /// Stop before an iteration that would exceed this many oracle points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_queries: Option<u64>,
}

/// `eta`/`mu` actually used at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub eta: f64,
    pub mu: f64,
    pub m: usize,
    pub k: usize,
    pub line_search: Option<LineSearch>,
}

pub const BENCHMARK_MU: f64 = 0.01;
pub const INTERACTIVE_M: usize = 6;
pub const INTERACTIVE_ETA: f64 = 1.0;
pub const INTERACTIVE_MU: f64 = 0.1;
pub const INTERACTIVE_GAMMA: f64 = 0.5;

impl OptimizerConfig {
    pub fn new(eta: f64, mu: f64, m: usize, k: usize, iterations: usize) -> Self {
        Self {
            eta,
            mu,
            m,
            k,
            iterations,
            line_search: None,
            decay: None,
            schedule: None,
            max_queries: None,
        }
    }

    /// The `(m, k)` study setting: `eta = 50`, `mu = 0.01`, line search with
    /// `l = 5`, `gamma = 0.1`.
    pub fn mk_study(m: usize, k: usize, iterations: usize) -> Self {
        Self::new(50.0, BENCHMARK_MU, m, k, iterations).with_line_search(5, 0.1)
    }

    /// Defaults for human-in-the-loop sessions: six candidates per round,
    /// `eta = 1`, `mu = 0.1`, `gamma = 0.5`, full rankings allowed.
    pub fn interactive() -> Self {
        Self::new(
            INTERACTIVE_ETA,
            INTERACTIVE_MU,
            INTERACTIVE_M,
            INTERACTIVE_M,
            0,
        )
        .with_line_search(INTERACTIVE_M, INTERACTIVE_GAMMA)
    }

    pub fn with_line_search(mut self, l: usize, gamma: f64) -> Self {
        self.line_search = Some(LineSearch { l, gamma });
        self
    }

    pub fn with_decay(mut self, factor: f64) -> Self {
        self.decay = Some(factor);
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = Some(schedule);
        self
    }

    pub fn with_max_queries(mut self, budget: u64) -> Self {
        self.max_queries = Some(budget);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m < 2 {
            return bad(format!("m must be >= 2, got {}", self.m));
        }
        if self.k < 1 || self.k > self.m {
            return bad(format!(
                "k must satisfy 1 <= k <= m = {}, got {}",
                self.m, self.k
            ));
        }
        if self.schedule.is_none() {
            if !(self.eta > 0.0 && self.eta.is_finite()) {
                return bad(format!("eta must be positive, got {}", self.eta));
            }
            if !(self.mu > 0.0 && self.mu.is_finite()) {
                return bad(format!("mu must be positive, got {}", self.mu));
            }
        }
        if let Some(ls) = self.line_search {
            if ls.l < 2 {
                return bad(format!("line search l must be >= 2, got {}", ls.l));
            }
            if !(ls.gamma > 0.0 && ls.gamma < 1.0) {
                return bad(format!(
                    "line search gamma must lie in (0, 1), got {}",
                    ls.gamma
                ));
            }
        }
        if let Some(f) = self.decay {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("decay factor must lie in (0, 1], got {f}"));
            }
        }
        if let Some(Schedule::Theorem { c_d }) = self.schedule {
            if !(c_d > 0.0 && c_d.is_finite()) {
                return bad(format!("theorem schedule needs c_d > 0, got {c_d}"));
            }
            if self.iterations == 0 {
                return bad("theorem schedule needs iterations >= 1".into());
            }
        }
        Ok(())
    }

    /// Initial `(eta, mu)` for dimension `d`, after applying the schedule.
    pub fn base_rates(&self, d: usize) -> (f64, f64) {
        match self.schedule {
            Some(Schedule::Theorem { c_d }) => {
                let t = self.iterations as f64;
                let d = d as f64;
                ((1.0 / (d * t)).sqrt(), (d / (c_d * c_d * t)).sqrt())
            }
            None => (self.eta, self.mu),
        }
    }

    /// Parameters for 1-based iteration `t`.
    pub fn step_params(&self, t: usize, d: usize) -> StepParams {
        let (mut eta, mut mu) = self.base_rates(d);
        if let Some(f) = self.decay {
            let g = f.powi((t - 1) as i32);
            eta *= g;
            mu *= g;
        }
        StepParams {
            eta,
            mu,
            m: self.m,
            k: self.k,
            line_search: self.line_search,
        }
    }

    /// Oracle points per iteration of ZO-RankSGD: `m`, plus `l` with line search.
    pub fn queries_per_iteration(&self) -> u64 {
        (self.m + self.line_search.map_or(0, |ls| ls.l)) as u64
    }
}
