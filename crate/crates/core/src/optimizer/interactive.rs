//! Best-point-memory variant for human feedback.
//!
//! Each round has two phases. In *gradient estimation* the operator ranks any
//! number of `m` perturbations of the best point `x*`; the best of them becomes
//! `x**` and the rank estimate is folded into a running mean `ḡ` of the
//! estimates collected since `x*` last moved. In *line search* the operator
//! picks the best of
//!
//! ```text
//! x*, x**, x* - eta ḡ, x* - eta gamma ḡ, ..., x* - eta gamma^(m-2) ḡ
//! ```
//!
//! (`m + 1` points; exponents start at 0 here, unlike the optimizer line
//! search of [`line_search_step`](super::line_search_step), which starts at 1).
//! If `x*` itself wins, the next round refines `ḡ`; otherwise `x*` moves and
//! the memory resets.

use serde::{Deserialize, Serialize};

use super::config::OptimizerConfig;
use crate::error::{Error, Result};
use crate::estimator::estimate_gradient;
use crate::oracle::{OracleError, OracleRequest, RankingOracle};
use crate::perturbation::{sample_perturbations, PerturbationBatch};
use crate::ranking::RankingOutcome;
use crate::vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    GradientEstimation,
    LineSearch,
}

/// Parameters of the interactive loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractiveParams {
    pub eta: f64,
    pub mu: f64,
    pub m: usize,
    /// Ranking depth requested from the oracle. Human answers may rank fewer.
    pub k: usize,
    pub gamma: f64,
}

impl InteractiveParams {
    pub fn from_config(config: &OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let gamma = config
            .line_search
            .map_or(super::config::INTERACTIVE_GAMMA, |ls| ls.gamma);
        Ok(Self {
            eta: config.eta,
            mu: config.mu,
            m: config.m,
            k: config.k,
            gamma,
        })
    }
}

/// How a line-search answer changed the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionEffect {
    /// `x*` won; keep refining the gradient memory.
    Stay,
    /// The best ranked perturbation won.
    MovedToBatchBest,
    /// The step `x* - eta gamma^exponent ḡ` won.
    MovedAlongMemory { exponent: u32 },
}

impl SelectionEffect {
    pub fn moved(self) -> bool {
        self != SelectionEffect::Stay
    }
}

#[derive(Debug, Clone)]
struct PendingQuery {
    request: OracleRequest,
    batch: Option<PerturbationBatch>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractiveState {
    /// `x*`
    pub best_point: Vec<f64>,
    /// `x**`, the best candidate of the latest ranking round.
    pub batch_best: Vec<f64>,
    /// `ḡ`
    pub gradient_memory: Vec<f64>,
    /// Number of estimates averaged into `ḡ`.
    pub tau: u64,
    pub phase: Phase,
    #[serde(skip)]
    pending: Option<PendingQuery>,
}

impl PartialEq for InteractiveState {
    fn eq(&self, other: &Self) -> bool {
        self.best_point == other.best_point
            && self.batch_best == other.batch_best
            && self.gradient_memory == other.gradient_memory
            && self.tau == other.tau
            && self.phase == other.phase
    }
}

impl InteractiveState {
    pub fn new(x0: Vec<f64>) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::EmptyPoint);
        }
        let d = x0.len();
        Ok(Self {
            batch_best: x0.clone(),
            best_point: x0,
            gradient_memory: vec![0.0; d],
            tau: 0,
            phase: Phase::GradientEstimation,
            pending: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.best_point.len()
    }

    /// True when the last [`interactive_step`] is waiting on an oracle.
    pub fn is_pending(&self) -> bool {
        self.pending.is_some()
    }

    /// The query the state is waiting on, if any.
    pub fn pending_request(&self) -> Option<&OracleRequest> {
        self.pending.as_ref().map(|p| &p.request)
    }

    fn expect_phase(&self, phase: Phase) -> Result<()> {
        if self.phase != phase {
            return Err(Error::InvalidConfig(format!(
                "expected phase {phase:?}, state is in {:?}",
                self.phase
            )));
        }
        Ok(())
    }

    /// Samples the `m` perturbations of `x*` for the next ranking round.
    pub fn sample_round<R: rand::Rng + ?Sized>(
        &self,
        params: &InteractiveParams,
        rng: &mut R,
    ) -> Result<PerturbationBatch> {
        self.expect_phase(Phase::GradientEstimation)?;
        sample_perturbations(&self.best_point, params.m, params.mu, rng)
    }

    /// Folds a ranking of `batch` into the gradient memory.
    pub fn apply_ranking(
        &self,
        batch: &PerturbationBatch,
        outcome: &RankingOutcome,
    ) -> Result<Self> {
        self.expect_phase(Phase::GradientEstimation)?;
        if batch.base_point() != self.best_point.as_slice() {
            return Err(Error::InvalidConfig(
                "batch was not sampled around the current best point".into(),
            ));
        }
        let g = estimate_gradient(batch, outcome)?;
        let tau = self.tau as f64;
        let memory = self
            .gradient_memory
            .iter()
            .zip(&g.vector)
            .map(|(m, gi)| (tau * m + gi) / (tau + 1.0))
            .collect();
        Ok(Self {
            best_point: self.best_point.clone(),
            batch_best: batch.candidates()[outcome.best()].clone(),
            gradient_memory: memory,
            tau: self.tau + 1,
            phase: Phase::LineSearch,
            pending: None,
        })
    }

    /// `[x*, x**, x* - eta gamma^p ḡ for p = 0..=m-2]`
    pub fn selection_candidates(&self, params: &InteractiveParams) -> Result<Vec<Vec<f64>>> {
        self.expect_phase(Phase::LineSearch)?;
        let mut out = Vec::with_capacity(params.m + 1);
        out.push(self.best_point.clone());
        out.push(self.batch_best.clone());
        for p in 0..params.m.saturating_sub(1) {
            out.push(vector::offset(
                &self.best_point,
                -params.eta * params.gamma.powi(p as i32),
                &self.gradient_memory,
            ));
        }
        Ok(out)
    }

    /// Applies the winner (0-based index into [`selection_candidates`](Self::selection_candidates)).
    pub fn apply_selection(
        &self,
        params: &InteractiveParams,
        winner: usize,
    ) -> Result<(Self, SelectionEffect)> {
        let candidates = self.selection_candidates(params)?;
        if winner >= candidates.len() {
            return Err(Error::MalformedOutcome(format!(
                "selection {} out of range 1..={}",
                winner + 1,
                candidates.len()
            )));
        }
        let d = self.dim();
        let (next, effect) = match winner {
            0 => (
                Self {
                    phase: Phase::GradientEstimation,
                    pending: None,
                    ..self.clone()
                },
                SelectionEffect::Stay,
            ),
            w => {
                let effect = if w == 1 {
                    SelectionEffect::MovedToBatchBest
                } else {
                    SelectionEffect::MovedAlongMemory {
                        exponent: (w - 2) as u32,
                    }
                };
                let moved = Self {
                    best_point: candidates[w].clone(),
                    batch_best: self.batch_best.clone(),
                    gradient_memory: vec![0.0; d],
                    tau: 0,
                    phase: Phase::GradientEstimation,
                    pending: None,
                };
                (moved, effect)
            }
        };
        Ok((next, effect))
    }
}

/// What an [`interactive_step`] did.
#[derive(Debug, Clone, PartialEq)]
pub enum StepEvent {
    Ranked {
        batch: PerturbationBatch,
        outcome: RankingOutcome,
    },
    Selected {
        winner: usize,
        effect: SelectionEffect,
    },
    /// The oracle timed out; the state carries the pending query and the next
    /// call resumes it.
    Pending,
}

/// Advances the state machine by one phase.
///
/// A timed-out oracle yields [`StepEvent::Pending`] with the query kept in the
/// returned state. Any other oracle error is returned as `Err`, leaving the
/// caller's state untouched.
pub fn interactive_step<RO, SO, R>(
    state: &InteractiveState,
    params: &InteractiveParams,
    rank_oracle: &mut RO,
    select_oracle: &mut SO,
    rng: &mut R,
) -> Result<(InteractiveState, StepEvent)>
where
    RO: RankingOracle + ?Sized,
    SO: RankingOracle + ?Sized,
    R: rand::Rng + ?Sized,
{
    step_with(state, params, rng, |phase, request| match phase {
        Phase::GradientEstimation => rank_oracle.rank(request),
        Phase::LineSearch => select_oracle.rank(request),
    })
}

fn step_with<R, Q>(
    state: &InteractiveState,
    params: &InteractiveParams,
    rng: &mut R,
    mut ask: Q,
) -> Result<(InteractiveState, StepEvent)>
where
    R: rand::Rng + ?Sized,
    Q: FnMut(Phase, &OracleRequest) -> Result<RankingOutcome, OracleError>,
{
    let (request, batch) = match (&state.pending, state.phase) {
        (Some(p), _) => (p.request.clone(), p.batch.clone()),
        (None, Phase::GradientEstimation) => {
            let batch = state.sample_round(params, rng)?;
            (
                OracleRequest::new(batch.candidates().to_vec(), params.k)?,
                Some(batch),
            )
        }
        (None, Phase::LineSearch) => (
            OracleRequest::select(state.selection_candidates(params)?)?,
            None,
        ),
    };
    let outcome = match ask(state.phase, &request) {
        Ok(outcome) => outcome,
        Err(OracleError::Timeout(_)) => {
            let mut waiting = state.clone();
            waiting.pending = Some(PendingQuery { request, batch });
            return Ok((waiting, StepEvent::Pending));
        }
        Err(e) => return Err(e.into()),
    };
    match (state.phase, batch) {
        (Phase::GradientEstimation, Some(batch)) => {
            let next = state.apply_ranking(&batch, &outcome)?;
            Ok((next, StepEvent::Ranked { batch, outcome }))
        }
        _ => {
            let winner = outcome.best();
            let (next, effect) = state.apply_selection(params, winner)?;
            Ok((next, StepEvent::Selected { winner, effect }))
        }
    }
}

/// Runs `rounds` complete rounds (ranking then selection) against one oracle
/// and returns the state after each round. A timeout aborts the run.
pub fn run_interactive<O, R>(
    x0: Vec<f64>,
    params: &InteractiveParams,
    oracle: &mut O,
    rng: &mut R,
    rounds: usize,
) -> Result<Vec<InteractiveState>>
where
    O: RankingOracle + ?Sized,
    R: rand::Rng + ?Sized,
{
    let mut state = InteractiveState::new(x0)?;
    let mut out = Vec::with_capacity(rounds);
    while out.len() < rounds {
        let (next, event) = step_with(&state, params, rng, |_, request| oracle.rank(request))?;
        if event == StepEvent::Pending {
            return Err(Error::Oracle(OracleError::Timeout(
                next.pending.expect("pending query").request.request_id,
            )));
        }
        if matches!(event, StepEvent::Selected { .. }) {
            out.push(next.clone());
        }
        state = next;
    }
    Ok(out)
}
