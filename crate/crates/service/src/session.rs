//! One interactive optimization session as an event-sourced state machine.
//!
//! Every accepted command appends events to [`Session::events`]; the caller
//! persists the new events before acknowledging. [`Session::replay`] rebuilds
//! a session from its events by re-running the same commands, and checks that
//! every derived event (issued batches, selection effects) comes out
//! identical.

use std::collections::HashMap;
use std::time::Duration;

use rand::RngCore;
use rankgrad::functions::{Objective, TestFunction};
use rankgrad::optimizer::{
    interactive_step, InteractiveParams, InteractiveState, Phase, SelectionEffect, StepEvent,
    TrajectoryRecord, INTERACTIVE_ETA, INTERACTIVE_GAMMA, INTERACTIVE_M, INTERACTIVE_MU,
};
use rankgrad::oracle::{DeferredOracle, Mailbox, OracleError, RequestId};
use rankgrad::rng::{standard_normal_vec, stream_rng, RankRng, Stream};
use rankgrad::vector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::render::{Payload, RenderError, RendererSpec};

/// A field that failed validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid session settings")]
    Invalid(Vec<FieldError>),
    #[error("batch {0} is not pending")]
    StaleBatch(String),
    #[error("batch {batch_id} asks for a {expected}, not a {got}")]
    WrongPhase {
        batch_id: String,
        expected: BatchPhase,
        got: BatchPhase,
    },
    #[error("unknown candidate id {0:?}")]
    UnknownCandidate(String),
    #[error("candidate id {0:?} appears more than once")]
    DuplicateCandidate(String),
    #[error("ranking is empty")]
    EmptyRanking,
    #[error("ranked {got} candidates but at most {max} may be ranked")]
    TooManyRanked { got: usize, max: usize },
    #[error("session is terminated")]
    Terminated,
    #[error("session expired: its batch went unanswered past the deadline")]
    Expired,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Core(#[from] rankgrad::Error),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("event log does not replay: {0}")]
    Replay(String),
}

/// Objective behind a test-mode session; used only for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroundTruth {
    /// `||x||^2`
    Quadratic,
    Rosenbrock,
    /// `||x - point||^2`
    Target {
        point: Vec<f64>,
    },
}

impl GroundTruth {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Quadratic => TestFunction::quadratic(x.len()).value(x),
            Self::Rosenbrock => TestFunction::rosenbrock(x.len()).value(x),
            Self::Target { point } => vector::norm_sq(&vector::sub(x, point)),
        }
    }
}

/// Body of a create request. Omitted fields take the interactive defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub renderer: RendererSpec,
    /// Must equal the renderer's parameter dimension when given.
    pub dim: Option<usize>,
    pub m: Option<usize>,
    /// Deepest ranking accepted; defaults to `m`.
    pub k: Option<usize>,
    pub eta: Option<f64>,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    /// Drives directions and candidate ids; random when omitted.
    pub seed: Option<u64>,
    /// Starting point; a seeded standard normal draw when omitted.
    pub x0: Option<Vec<f64>>,
    pub ground_truth: Option<GroundTruth>,
}

/// Fully resolved settings, as recorded in the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSettings {
    pub renderer: RendererSpec,
    pub m: usize,
    pub k: usize,
    pub eta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub seed: u64,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

impl CreateSession {
    pub fn resolve(self) -> Result<SessionSettings, SessionError> {
        let mut errors = Vec::new();
        let mut bad = |field: &str, message: String| {
            errors.push(FieldError {
                field: field.into(),
                message,
            })
        };
        for (field, message) in self.renderer.problems() {
            bad(&field, message);
        }
        let d = self.renderer.dim();
        if let Some(dim) = self.dim {
            if dim != d {
                bad(
                    "dim",
                    format!("renderer takes {d} parameters, got dim = {dim}"),
                );
            }
        }
        let m = self.m.unwrap_or(INTERACTIVE_M);
        if !(2..=64).contains(&m) {
            bad("m", format!("must lie in 2..=64, got {m}"));
        }
        let k = self.k.unwrap_or(m);
        if k < 1 || k > m {
            bad("k", format!("must satisfy 1 <= k <= m = {m}, got {k}"));
        }
        let eta = self.eta.unwrap_or(INTERACTIVE_ETA);
        if !(eta > 0.0 && eta.is_finite()) {
            bad("eta", format!("must be positive, got {eta}"));
        }
        let mu = self.mu.unwrap_or(INTERACTIVE_MU);
        if !(mu > 0.0 && mu.is_finite()) {
            bad("mu", format!("must be positive, got {mu}"));
        }
        let gamma = self.gamma.unwrap_or(INTERACTIVE_GAMMA);
        if !(gamma > 0.0 && gamma < 1.0) {
            bad("gamma", format!("must lie in (0, 1), got {gamma}"));
        }
        let seed = self.seed.unwrap_or_else(rand::random);
        let x0 = match self.x0 {
            Some(x0) => {
                if x0.len() != d {
                    bad("x0", format!("expected {d} values, got {}", x0.len()));
                } else if x0.iter().any(|v| !v.is_finite()) {
                    bad("x0", "values must be finite".into());
                }
                x0
            }
            None => standard_normal_vec(&mut stream_rng(seed, Stream::InitialPoint), d),
        };
        match &self.ground_truth {
            Some(GroundTruth::Rosenbrock) if d < 2 => bad(
                "ground_truth",
                "rosenbrock needs at least 2 parameters".into(),
            ),
            Some(GroundTruth::Target { point }) if point.len() != d => bad(
                "ground_truth.point",
                format!("expected {d} values, got {}", point.len()),
            ),
            _ => {}
        }
        if !errors.is_empty() {
            return Err(SessionError::Invalid(errors));
        }
        Ok(SessionSettings {
            renderer: self.renderer,
            m,
            k,
            eta,
            mu,
            gamma,
            seed,
            x0,
            ground_truth: self.ground_truth,
        })
    }
}

impl SessionSettings {
    pub fn params(&self) -> InteractiveParams {
        InteractiveParams {
            eta: self.eta,
            mu: self.mu,
            m: self.m,
            k: self.k,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchPhase {
    Rank,
    Select,
}

impl std::fmt::Display for BatchPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Rank => "ranking",
            Self::Select => "selection",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    SessionCreated {
        session_id: String,
        settings: SessionSettings,
    },
    BatchIssued {
        batch_id: String,
        phase: BatchPhase,
        candidate_ids: Vec<String>,
    },
    RankingSubmitted {
        batch_id: String,
        ranking: Vec<String>,
    },
    SelectionSubmitted {
        batch_id: String,
        choice: String,
        effect: SelectionEffect,
    },
    Terminated {
        reason: String,
    },
}

/// One log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    /// Unix time in milliseconds.
    pub at: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// The batch waiting for an answer.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub batch_id: String,
    pub phase: BatchPhase,
    pub candidate_ids: Vec<String>,
    pub points: Vec<Vec<f64>>,
    /// Largest number of candidates an answer may rank.
    pub max_rank: usize,
    pub issued_at: u64,
    request_id: RequestId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub candidate_id: String,
    pub params: Vec<f64>,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchView {
    pub batch_id: String,
    pub phase: BatchPhase,
    pub instruction: String,
    pub max_rank: usize,
    pub issued_at: u64,
    pub candidates: Vec<CandidateView>,
}

impl Batch {
    pub fn instruction(&self) -> String {
        match self.phase {
            BatchPhase::Rank => format!(
                "Please rank the following images from best to worst. Rank as many as you like, from 1 up to {}.",
                self.max_rank
            ),
            BatchPhase::Select => "Please choose the best image.".into(),
        }
    }

    pub fn view(&self, renderer: &RendererSpec) -> Result<BatchView, RenderError> {
        let candidates = self
            .candidate_ids
            .iter()
            .zip(&self.points)
            .map(|(id, x)| {
                Ok(CandidateView {
                    candidate_id: id.clone(),
                    params: x.clone(),
                    payload: renderer.render(x)?,
                })
            })
            .collect::<Result<_, RenderError>>()?;
        Ok(BatchView {
            batch_id: self.batch_id.clone(),
            phase: self.phase,
            instruction: self.instruction(),
            max_rank: self.max_rank,
            issued_at: self.issued_at,
            candidates,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub rankings: u64,
    pub selections: u64,
    pub moves: u64,
    /// Candidates shown in answered batches.
    pub queries: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Terminated { reason: String, at: u64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Submission {
    Ranking(Vec<String>),
    Selection(String),
}

/// Result of an accepted ranking or selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmitOutcome {
    pub batch_id: String,
    pub message: String,
    pub effect: Option<SelectionEffect>,
    pub next_batch: Option<Batch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestView {
    pub params: Vec<f64>,
    pub payload: Payload,
    /// Ground-truth value, for test-mode sessions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusView {
    pub session_id: String,
    #[serde(flatten)]
    pub status: SessionStatus,
    pub created_at: u64,
    pub settings: SessionSettings,
    pub phase: Phase,
    pub tau: u64,
    pub counters: Counters,
    pub pending_batch_id: Option<String>,
    pub state: InteractiveState,
    pub best: BestView,
}

#[derive(Debug)]
pub struct Session {
    id: String,
    settings: SessionSettings,
    params: InteractiveParams,
    created_at: u64,
    state: InteractiveState,
    oracle: DeferredOracle,
    directions: RankRng,
    identifiers: RankRng,
    pending: Option<Batch>,
    status: SessionStatus,
    counters: Counters,
    moves: Vec<TrajectoryRecord>,
    answered: HashMap<String, (Submission, SubmitOutcome)>,
    events: Vec<Event>,
}

impl Session {
    /// Creates the session and issues its first ranking batch.
    pub fn start(id: String, settings: SessionSettings, now: u64) -> Result<Self, SessionError> {
        let params = settings.params();
        let state = InteractiveState::new(settings.x0.clone())?;
        let mut s = Self {
            params,
            created_at: now,
            state,
            oracle: DeferredOracle::new(Mailbox::new(), Some(Duration::ZERO)),
            directions: stream_rng(settings.seed, Stream::Directions),
            identifiers: stream_rng(settings.seed, Stream::Identifiers),
            pending: None,
            status: SessionStatus::Active,
            counters: Counters::default(),
            moves: Vec::new(),
            answered: HashMap::new(),
            events: Vec::new(),
            id: id.clone(),
            settings: settings.clone(),
        };
        s.push(
            now,
            EventKind::SessionCreated {
                session_id: id,
                settings,
            },
        );
        s.issue_batch(now)?;
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn settings(&self) -> &SessionSettings {
        &self.settings
    }

    pub fn state(&self) -> &InteractiveState {
        &self.state
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn pending_batch(&self) -> Option<&Batch> {
        self.pending.as_ref()
    }

    pub fn is_active(&self) -> bool {
        self.status == SessionStatus::Active
    }

    /// One record per accepted move, in the optimizer's trajectory format.
    pub fn moves(&self) -> &[TrajectoryRecord] {
        &self.moves
    }

    fn push(&mut self, at: u64, kind: EventKind) {
        let seq = self.events.len() as u64;
        self.events.push(Event { seq, at, kind });
    }

    fn fresh_id(&mut self, taken: &[String]) -> String {
        loop {
            let id = format!("{:016x}", self.identifiers.next_u64());
            if !taken.contains(&id) && !self.answered.contains_key(&id) {
                return id;
            }
        }
    }

    /// Puts the next oracle query of the state machine up as a batch.
    fn issue_batch(&mut self, now: u64) -> Result<(), SessionError> {
        let (mut rank, mut select) = (self.oracle.clone(), self.oracle.clone());
        let (next, event) = interactive_step(
            &self.state,
            &self.params,
            &mut rank,
            &mut select,
            &mut self.directions,
        )?;
        if event != StepEvent::Pending {
            return Err(SessionError::Replay(
                "oracle answered before a batch was issued".into(),
            ));
        }
        let request = next
            .pending_request()
            .expect("pending step carries its request")
            .clone();
        let phase = match next.phase {
            Phase::GradientEstimation => BatchPhase::Rank,
            Phase::LineSearch => BatchPhase::Select,
        };
        let batch_id = self.fresh_id(&[]);
        let mut candidate_ids = Vec::with_capacity(request.m());
        for _ in 0..request.m() {
            let id = self.fresh_id(&candidate_ids);
            candidate_ids.push(id);
        }
        self.state = next;
        self.push(
            now,
            EventKind::BatchIssued {
                batch_id: batch_id.clone(),
                phase,
                candidate_ids: candidate_ids.clone(),
            },
        );
        self.pending = Some(Batch {
            batch_id,
            phase,
            candidate_ids,
            points: request.points,
            max_rank: request.k,
            issued_at: now,
            request_id: request.request_id,
        });
        Ok(())
    }

    /// Ends the session if its batch has waited longer than `ttl`.
    pub fn expire_if_due(&mut self, ttl: Option<Duration>, now: u64) -> bool {
        let due = match (ttl, &self.pending) {
            (Some(ttl), Some(b)) if self.is_active() => {
                now.saturating_sub(b.issued_at) >= ttl.as_millis() as u64
            }
            _ => false,
        };
        if due {
            self.terminate("expired", now);
        }
        due
    }

    /// Closes the session. Returns `false` (and records nothing) when it was
    /// already closed.
    pub fn terminate(&mut self, reason: &str, now: u64) -> bool {
        if !self.is_active() {
            return false;
        }
        self.oracle.mailbox.cancel();
        self.pending = None;
        self.status = SessionStatus::Terminated {
            reason: reason.into(),
            at: now,
        };
        self.push(
            now,
            EventKind::Terminated {
                reason: reason.into(),
            },
        );
        true
    }

    /// Looks up the pending batch for an answer, or replays a stored outcome
    /// when the same answer was already accepted.
    fn target(
        &self,
        batch_id: &str,
        submission: &Submission,
        phase: BatchPhase,
    ) -> Result<Option<SubmitOutcome>, SessionError> {
        if let Some((previous, outcome)) = self.answered.get(batch_id) {
            return if previous == submission {
                Ok(Some(outcome.clone()))
            } else {
                Err(SessionError::StaleBatch(batch_id.into()))
            };
        }
        match &self.status {
            SessionStatus::Terminated { reason, .. } if reason == "expired" => {
                return Err(SessionError::Expired)
            }
            SessionStatus::Terminated { .. } => return Err(SessionError::Terminated),
            SessionStatus::Active => {}
        }
        match &self.pending {
            Some(b) if b.batch_id == batch_id && b.phase == phase => Ok(None),
            Some(b) if b.batch_id == batch_id => Err(SessionError::WrongPhase {
                batch_id: batch_id.into(),
                expected: b.phase,
                got: phase,
            }),
            _ => Err(SessionError::StaleBatch(batch_id.into())),
        }
    }

    fn index_of(batch: &Batch, id: &str) -> Result<usize, SessionError> {
        batch
            .candidate_ids
            .iter()
            .position(|c| c == id)
            .ok_or_else(|| SessionError::UnknownCandidate(id.into()))
    }

    /// Ranks candidates of the pending rank batch, best first.
    pub fn submit_ranking(
        &mut self,
        batch_id: &str,
        ranking: &[String],
        now: u64,
    ) -> Result<SubmitOutcome, SessionError> {
        let submission = Submission::Ranking(ranking.to_vec());
        if let Some(done) = self.target(batch_id, &submission, BatchPhase::Rank)? {
            return Ok(done);
        }
        let batch = self
            .pending
            .as_ref()
            .expect("target checked the pending batch");
        if ranking.is_empty() {
            return Err(SessionError::EmptyRanking);
        }
        if ranking.len() > batch.max_rank {
            return Err(SessionError::TooManyRanked {
                got: ranking.len(),
                max: batch.max_rank,
            });
        }
        let mut indices = Vec::with_capacity(ranking.len());
        for id in ranking {
            let i = Self::index_of(batch, id)? + 1;
            if indices.contains(&i) {
                return Err(SessionError::DuplicateCandidate(id.clone()));
            }
            indices.push(i);
        }
        self.oracle.mailbox.answer(batch.request_id, &indices)?;
        let shown = batch.candidate_ids.len() as u64;

        let (mut rank, mut select) = (self.oracle.clone(), self.oracle.clone());
        let (next, event) = interactive_step(
            &self.state,
            &self.params,
            &mut rank,
            &mut select,
            &mut self.directions,
        )?;
        if !matches!(event, StepEvent::Ranked { .. }) {
            return Err(SessionError::Replay(format!(
                "expected a ranking step, got {event:?}"
            )));
        }
        self.state = next;
        self.counters.rankings += 1;
        self.counters.queries += shown;
        self.push(
            now,
            EventKind::RankingSubmitted {
                batch_id: batch_id.into(),
                ranking: ranking.to_vec(),
            },
        );
        self.issue_batch(now)?;
        let outcome = SubmitOutcome {
            batch_id: batch_id.into(),
            message: format!(
                "ranking of {} candidates accepted; gradient memory holds {} estimates",
                ranking.len(),
                self.state.tau
            ),
            effect: None,
            next_batch: self.pending.clone(),
        };
        self.answered
            .insert(batch_id.into(), (submission, outcome.clone()));
        Ok(outcome)
    }

    /// Picks the best candidate of the pending select batch.
    pub fn submit_selection(
        &mut self,
        batch_id: &str,
        choice: &str,
        now: u64,
    ) -> Result<SubmitOutcome, SessionError> {
        let submission = Submission::Selection(choice.into());
        if let Some(done) = self.target(batch_id, &submission, BatchPhase::Select)? {
            return Ok(done);
        }
        let batch = self
            .pending
            .as_ref()
            .expect("target checked the pending batch");
        let winner = Self::index_of(batch, choice)?;
        self.oracle
            .mailbox
            .answer(batch.request_id, &[winner + 1])?;
        let shown = batch.candidate_ids.len() as u64;
        let memory_norm = vector::norm(&self.state.gradient_memory);

        let (mut rank, mut select) = (self.oracle.clone(), self.oracle.clone());
        let (next, event) = interactive_step(
            &self.state,
            &self.params,
            &mut rank,
            &mut select,
            &mut self.directions,
        )?;
        let effect = match event {
            StepEvent::Selected { effect, .. } => effect,
            other => {
                return Err(SessionError::Replay(format!(
                    "expected a selection step, got {other:?}"
                )))
            }
        };
        self.state = next;
        self.counters.selections += 1;
        self.counters.queries += shown;
        if effect.moved() {
            self.counters.moves += 1;
            self.moves.push(TrajectoryRecord {
                t: self.counters.moves as usize,
                f: self
                    .settings
                    .ground_truth
                    .as_ref()
                    .map(|g| g.value(&self.state.best_point)),
                grad_norm: memory_norm,
                queries: self.counters.queries,
                eta: self.params.eta,
                mu: self.params.mu,
                accepted_exponent: match effect {
                    SelectionEffect::MovedAlongMemory { exponent } => Some(exponent),
                    _ => None,
                },
            });
        }
        self.push(
            now,
            EventKind::SelectionSubmitted {
                batch_id: batch_id.into(),
                choice: choice.into(),
                effect,
            },
        );
        self.issue_batch(now)?;
        let message = match effect {
            SelectionEffect::Stay => "no move; refining gradient".to_string(),
            SelectionEffect::MovedToBatchBest => {
                "moved to the best ranked candidate; gradient memory reset".into()
            }
            SelectionEffect::MovedAlongMemory { exponent } => {
                format!("moved along the averaged gradient (step shrunk {exponent} times); gradient memory reset")
            }
        };
        let outcome = SubmitOutcome {
            batch_id: batch_id.into(),
            message,
            effect: Some(effect),
            next_batch: self.pending.clone(),
        };
        self.answered
            .insert(batch_id.into(), (submission, outcome.clone()));
        Ok(outcome)
    }

    pub fn status(&self) -> Result<StatusView, RenderError> {
        let best = &self.state.best_point;
        Ok(StatusView {
            session_id: self.id.clone(),
            status: self.status.clone(),
            created_at: self.created_at,
            settings: self.settings.clone(),
            phase: self.state.phase,
            tau: self.state.tau,
            counters: self.counters,
            pending_batch_id: self.pending.as_ref().map(|b| b.batch_id.clone()),
            state: self.state.clone(),
            best: BestView {
                params: best.clone(),
                payload: self.settings.renderer.render(best)?,
                f: self.settings.ground_truth.as_ref().map(|g| g.value(best)),
            },
        })
    }

    /// Rebuilds a session from its log, re-running every command.
    pub fn replay(events: &[Event]) -> Result<Self, SessionError> {
        let mismatch = |msg: String| SessionError::Replay(msg);
        let first = events.first().ok_or_else(|| mismatch("empty log".into()))?;
        let EventKind::SessionCreated {
            session_id,
            settings,
        } = &first.kind
        else {
            return Err(mismatch("log does not start with session_created".into()));
        };
        let mut s = Self::start(session_id.clone(), settings.clone(), first.at)?;
        let mut done = 0;
        loop {
            let produced = s.events.len();
            if events.len() < produced || s.events[done..] != events[done..produced] {
                return Err(mismatch(format!(
                    "derived events differ from the log after event {done}"
                )));
            }
            if produced == events.len() {
                return Ok(s);
            }
            let e = &events[produced];
            match &e.kind {
                EventKind::RankingSubmitted { batch_id, ranking } => {
                    s.submit_ranking(batch_id, ranking, e.at)?;
                }
                EventKind::SelectionSubmitted {
                    batch_id, choice, ..
                } => {
                    s.submit_selection(batch_id, choice, e.at)?;
                }
                EventKind::Terminated { reason } => {
                    s.terminate(reason, e.at);
                }
                other => {
                    return Err(mismatch(format!(
                        "unexpected event at seq {}: {other:?}",
                        e.seq
                    )))
                }
            }
            if s.events.len() == produced {
                return Err(mismatch(format!("event {} had no effect", e.seq)));
            }
            done = produced;
        }
    }
}
