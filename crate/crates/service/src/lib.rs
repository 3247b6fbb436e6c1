//! HTTP service hosting interactive optimization sessions driven by human
//! ranking feedback.
//!
//! Each session alternates two kinds of batches: a *rank* batch of `m`
//! perturbations of the current best point, which the operator ranks (any
//! number of them, best first), and a *select* batch, from which the operator
//! picks the single best candidate. Candidates are rendered by a plug-in (a
//! color swatch or a closed curve) and shipped as base64 payloads.
//!
//! Sessions are event-sourced: every accepted command is appended to a
//! per-session JSONL log before it is acknowledged, and the in-memory index is
//! rebuilt from the logs on startup.

pub mod api;
pub mod config;
pub mod render;
pub mod session;
pub mod store;

pub use api::{router, RankingRequest, SelectionRequest, SubmitResponse};
pub use config::ServiceConfig;
pub use render::{Payload, RendererSpec};
pub use session::{
    BatchPhase, BatchView, CreateSession, GroundTruth, Session, SessionSettings, StatusView,
};
pub use store::Store;
