//! Oracle answers that arrive later, from someone else.
//!
//! A [`Mailbox`] holds at most one outstanding request. The asking side posts
//! a request and gets a [`PendingRank`]; the answering side (typically an HTTP
//! handler relaying a human's choice) calls [`Mailbox::answer`] with 1-based
//! indices. Malformed answers are rejected and leave the request pending. A
//! request resolves at most once; later answers to it are reported as stale.

use std::collections::HashSet;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use super::{OracleError, OracleRequest, RankingOracle, RequestId};
use crate::ranking::RankingOutcome;

#[derive(Debug, Default)]
struct State {
    pending: Option<Slot>,
    resolved: HashSet<RequestId>,
    cancelled: bool,
}

#[derive(Debug)]
struct Slot {
    id: RequestId,
    m: usize,
    max_k: usize,
    answer: Option<RankingOutcome>,
}

#[derive(Debug, Default)]
struct Shared {
    state: Mutex<State>,
    ready: Condvar,
}

#[derive(Debug, Clone, Default)]
pub struct Mailbox {
    shared: Arc<Shared>,
}

impl Mailbox {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.shared.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Posts `request`; answers may rank between 1 and `request.k` candidates.
    pub fn post(&self, request: &OracleRequest) -> Result<PendingRank, OracleError> {
        let mut st = self.lock();
        if st.cancelled {
            return Err(OracleError::Cancelled);
        }
        if st.resolved.contains(&request.request_id) {
            return Err(OracleError::Stale(request.request_id));
        }
        match &st.pending {
            Some(slot) if slot.id == request.request_id => {}
            Some(slot) => return Err(OracleError::Busy(slot.id)),
            None => {
                st.pending = Some(Slot {
                    id: request.request_id,
                    m: request.m(),
                    max_k: request.k,
                    answer: None,
                });
            }
        }
        Ok(PendingRank {
            id: request.request_id,
            mailbox: self.clone(),
        })
    }

    /// Currently outstanding request, if any.
    pub fn pending_id(&self) -> Option<RequestId> {
        self.lock().pending.as_ref().map(|s| s.id)
    }

    /// Delivers an answer given as 1-based indices, best first.
    pub fn answer(&self, id: RequestId, ordered_best: &[usize]) -> Result<(), OracleError> {
        let mut st = self.lock();
        if st.cancelled {
            return Err(OracleError::Cancelled);
        }
        if st.resolved.contains(&id) {
            return Err(OracleError::Stale(id));
        }
        let slot = match st.pending.as_mut() {
            Some(slot) if slot.id == id => slot,
            _ => return Err(OracleError::UnknownRequest(id)),
        };
        if slot.answer.is_some() {
            return Err(OracleError::Stale(id));
        }
        if ordered_best.len() > slot.max_k {
            return Err(OracleError::Malformed(format!(
                "ranked {} candidates but at most {} were requested",
                ordered_best.len(),
                slot.max_k
            )));
        }
        let outcome = RankingOutcome::from_one_based(slot.m, ordered_best)
            .map_err(|e| OracleError::Malformed(e.to_string()))?;
        slot.answer = Some(outcome);
        drop(st);
        self.shared.ready.notify_all();
        Ok(())
    }

    /// Cancels the session: waiters and later calls fail with
    /// [`OracleError::Cancelled`].
    pub fn cancel(&self) {
        self.lock().cancelled = true;
        self.shared.ready.notify_all();
    }

    fn take(&self, st: &mut State, id: RequestId) -> Result<Option<RankingOutcome>, OracleError> {
        if st.cancelled {
            return Err(OracleError::Cancelled);
        }
        match st.pending.as_mut() {
            Some(slot) if slot.id == id => {
                if let Some(out) = slot.answer.take() {
                    st.pending = None;
                    st.resolved.insert(id);
                    Ok(Some(out))
                } else {
                    Ok(None)
                }
            }
            _ if st.resolved.contains(&id) => Err(OracleError::Stale(id)),
            _ => Err(OracleError::UnknownRequest(id)),
        }
    }
}

/// Handle to an outstanding request.
#[derive(Debug)]
pub struct PendingRank {
    id: RequestId,
    mailbox: Mailbox,
}

impl PendingRank {
    pub fn request_id(&self) -> RequestId {
        self.id
    }

    /// Non-blocking: the outcome if an answer has arrived.
    pub fn try_take(&self) -> Result<Option<RankingOutcome>, OracleError> {
        let mut st = self.mailbox.lock();
        self.mailbox.take(&mut st, self.id)
    }

    /// Blocks until answered, cancelled, or `timeout` elapses (`None` waits
    /// forever). On timeout the request stays pending.
    pub fn wait(&self, timeout: Option<Duration>) -> Result<RankingOutcome, OracleError> {
        let deadline = timeout.map(|t| Instant::now() + t);
        let mut st = self.mailbox.lock();
        loop {
            if let Some(out) = self.mailbox.take(&mut st, self.id)? {
                return Ok(out);
            }
            st = match deadline {
                None => self
                    .mailbox
                    .shared
                    .ready
                    .wait(st)
                    .unwrap_or_else(|e| e.into_inner()),
                Some(d) => {
                    let now = Instant::now();
                    if now >= d {
                        return Err(OracleError::Timeout(self.id));
                    }
                    self.mailbox
                        .shared
                        .ready
                        .wait_timeout(st, d - now)
                        .unwrap_or_else(|e| e.into_inner())
                        .0
                }
            };
        }
    }
}

/// Posts `request` to `mailbox` and returns the handle that resolves once an
/// answer arrives.
pub fn deferred_rank(
    request: &OracleRequest,
    mailbox: &Mailbox,
) -> Result<PendingRank, OracleError> {
    mailbox.post(request)
}

/// Blocking oracle over a [`Mailbox`]. A timeout is returned as
/// [`OracleError::Timeout`] with the request still pending; calling `rank`
/// again with the same request resumes the wait.
#[derive(Debug, Clone)]
pub struct DeferredOracle {
    pub mailbox: Mailbox,
    pub timeout: Option<Duration>,
}

impl DeferredOracle {
    pub fn new(mailbox: Mailbox, timeout: Option<Duration>) -> Self {
        Self { mailbox, timeout }
    }
}

impl RankingOracle for DeferredOracle {
    fn rank(&mut self, request: &OracleRequest) -> Result<RankingOutcome, OracleError> {
        deferred_rank(request, &self.mailbox)?.wait(self.timeout)
    }
}
