//! HTTP interface.
//!
//! | method | path                            | body                              |
//! |--------|---------------------------------|-----------------------------------|
//! | POST   | `/sessions`                     | [`CreateSession`]                 |
//! | GET    | `/sessions/{id}`                |                                   |
//! | GET    | `/sessions/{id}/batch`          |                                   |
//! | POST   | `/sessions/{id}/ranking`        | `{"batch_id", "ranking": [ids]}`  |
//! | POST   | `/sessions/{id}/selection`      | `{"batch_id", "choice": id}`      |
//! | GET    | `/sessions/{id}/history`        |                                   |
//! | GET    | `/sessions/{id}/trajectory`     |                                   |
//! | POST   | `/sessions/{id}/terminate`      |                                   |
//!
//! Errors are `{"error": {"code", "message", "fields"?}}` with a matching
//! status: 400 unreadable body, 404 unknown session or no pending batch, 409
//! stale batch or wrong phase, 410 terminated or expired session, 422 invalid
//! content, 500 storage or rendering failure.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rankgrad::optimizer::{write_trajectory, SelectionEffect};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::render::RenderError;
use crate::session::{
    BatchView, CreateSession, Event, FieldError, Session, SessionError, StatusView, SubmitOutcome,
};
use crate::store::{lock, Store, StoreError};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    fields: Vec<FieldError>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            fields: Vec::new(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        if !self.fields.is_empty() {
            body["fields"] = json!(self.fields);
        }
        (self.status, Json(json!({ "error": body }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        use SessionError as E;
        let message = e.to_string();
        match e {
            E::Invalid(fields) => Self {
                fields,
                ..Self::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "invalid_settings",
                    message,
                )
            },
            E::StaleBatch(_) => Self::new(StatusCode::CONFLICT, "stale_batch", message),
            E::WrongPhase { .. } => Self::new(StatusCode::CONFLICT, "wrong_phase", message),
            E::UnknownCandidate(_) => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "unknown_candidate",
                message,
            ),
            E::DuplicateCandidate(_) => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "duplicate_candidate",
                message,
            ),
            E::EmptyRanking => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_ranking", message)
            }
            E::TooManyRanked { .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "too_many_ranked", message)
            }
            E::Terminated => Self::new(StatusCode::GONE, "terminated", message),
            E::Expired => Self::new(StatusCode::GONE, "expired", message),
            E::Oracle(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_answer", message),
            E::Core(_) | E::Render(_) | E::Replay(_) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
            }
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownSession(id) => Self::new(
                StatusCode::NOT_FOUND,
                "unknown_session",
                format!("unknown session {id}"),
            ),
            StoreError::Session(e) => e.into(),
            StoreError::Io(e) => {
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", e.to_string())
            }
        }
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "render", e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankingRequest {
    pub batch_id: String,
    /// Candidate ids, best first.
    pub ranking: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionRequest {
    pub batch_id: String,
    pub choice: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreatedResponse {
    pub session: StatusView,
    pub batch: BatchView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub accepted_batch_id: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect: Option<SelectionEffect>,
    pub next_batch: Option<BatchView>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryResponse {
    pub session_id: String,
    pub events: Vec<Event>,
}

fn submit_response(session: &Session, out: SubmitOutcome) -> ApiResult<SubmitResponse> {
    let renderer = &session.settings().renderer;
    Ok(SubmitResponse {
        accepted_batch_id: out.batch_id,
        message: out.message,
        effect: out.effect,
        next_batch: out.next_batch.map(|b| b.view(renderer)).transpose()?,
    })
}

async fn create(
    State(store): State<Arc<Store>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(request) = body?;
    let shared = store.create(request)?;
    let s = lock(&shared);
    let batch = s
        .pending_batch()
        .expect("new sessions have a batch")
        .view(&s.settings().renderer)?;
    tracing::info!(session = s.id(), "session created");
    Ok((
        StatusCode::CREATED,
        Json(CreatedResponse {
            session: s.status()?,
            batch,
        }),
    ))
}

async fn status(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<Json<StatusView>> {
    let shared = store.get(&id)?;
    let mut s = lock(&shared);
    store.update(&mut s, |_, _| Ok(()))?;
    Ok(Json(s.status()?))
}

async fn batch(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<Json<BatchView>> {
    let shared = store.get(&id)?;
    let mut s = lock(&shared);
    store.update(&mut s, |_, _| Ok(()))?;
    match s.pending_batch() {
        Some(b) => Ok(Json(b.view(&s.settings().renderer)?)),
        None if !s.is_active() => Err(ApiError::new(
            StatusCode::GONE,
            "terminated",
            "session is terminated",
        )),
        None => Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "no_pending_batch",
            "no batch is pending",
        )),
    }
}

async fn ranking(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    body: Result<Json<RankingRequest>, JsonRejection>,
) -> ApiResult<Json<SubmitResponse>> {
    let Json(req) = body?;
    let shared = store.get(&id)?;
    let mut s = lock(&shared);
    let out = store.update(&mut s, |s, now| {
        s.submit_ranking(&req.batch_id, &req.ranking, now)
    })?;
    Ok(Json(submit_response(&s, out)?))
}

async fn selection(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    body: Result<Json<SelectionRequest>, JsonRejection>,
) -> ApiResult<Json<SubmitResponse>> {
    let Json(req) = body?;
    let shared = store.get(&id)?;
    let mut s = lock(&shared);
    let out = store.update(&mut s, |s, now| {
        s.submit_selection(&req.batch_id, &req.choice, now)
    })?;
    Ok(Json(submit_response(&s, out)?))
}

async fn history(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<Json<HistoryResponse>> {
    let shared = store.get(&id)?;
    let s = lock(&shared);
    Ok(Json(HistoryResponse {
        session_id: id,
        events: s.events().to_vec(),
    }))
}

async fn trajectory(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    let shared = store.get(&id)?;
    let s = lock(&shared);
    let mut body = Vec::new();
    write_trajectory(&mut body, s.moves())
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body))
}

async fn terminate(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<Json<StatusView>> {
    let shared = store.get(&id)?;
    let mut s = lock(&shared);
    store.update(&mut s, |s, now| Ok(s.terminate("user", now)))?;
    Ok(Json(s.status()?))
}

async fn health() -> &'static str {
    "ok"
}

/// Routes of the service; unmatched paths fall through to `static_dir` when
/// given (the browser UI's build output).
pub fn router(store: Arc<Store>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(status))
        .route("/sessions/{id}/batch", get(batch))
        .route("/sessions/{id}/ranking", post(ranking))
        .route("/sessions/{id}/selection", post(selection))
        .route("/sessions/{id}/history", get(history))
        .route("/sessions/{id}/trajectory", get(trajectory))
        .route("/sessions/{id}/terminate", post(terminate))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}
