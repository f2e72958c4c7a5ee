//! HTTP/JSON front end for elicitation sessions and stored models.
//!
//! | method | path                       | body / result                       |
//! |--------|----------------------------|-------------------------------------|
//! | POST   | `/sessions`                | [`CreateSession`] → session summary |
//! | GET    | `/sessions/{id}`           | full session                        |
//! | GET    | `/sessions/{id}/pending`   | status and pending queries          |
//! | POST   | `/sessions/{id}/answers`   | [`SubmitAnswer`] → session summary  |
//! | GET    | `/sessions/{id}/partition` | latest partition                    |
//! | GET    | `/models/{name}`           | stored model document               |
//! | PUT    | `/models/{name}`           | model document                      |
//! | POST   | `/models/{name}/solve`     | solve outcome                       |
//!
//! Errors come back as `{"error": <code>, "message": <text>}`. A protocol
//! violation is 409, an unknown session or model 404, anything else the
//! client sent wrong 400.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as JsonValue};

use crate::error::{Error, Result};
use crate::formulation::{Attribute, ProblemStatement};
use crate::model::{load_model, save_model, solve_model, to_sorted_json, write_atomic, ModelDocument};
use crate::process::{apply_step, init_session_with, OracleAnswer, Session, SessionConfig};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CreateSession {
    pub seed_attribute: Attribute,
    pub statement: ProblemStatement,
    #[serde(default)]
    pub config: Option<SessionConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubmitAnswer {
    pub answer: OracleAnswer,
    /// Resubmitting with a token already seen returns the first response
    /// without applying the answer again.
    #[serde(default)]
    pub request_token: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct StoredResponse {
    status: u16,
    body: JsonValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SessionRecord {
    session: Session,
    #[serde(default)]
    tokens: BTreeMap<String, StoredResponse>,
}

pub struct AppState {
    store: PathBuf,
    seed: u64,
    sessions: Mutex<HashMap<String, SessionRecord>>,
}

impl AppState {
    /// Opens the store, loading any sessions persisted by an earlier run.
    pub fn open(store: &Path, seed: u64) -> Result<Arc<Self>> {
        std::fs::create_dir_all(store.join("sessions"))?;
        std::fs::create_dir_all(store.join("models"))?;
        let mut sessions = HashMap::new();
        for entry in std::fs::read_dir(store.join("sessions"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            let record: SessionRecord = serde_json::from_str(&text)
                .map_err(|e| Error::ParseError { path: path.display().to_string(), message: e.to_string() })?;
            sessions.insert(record.session.id.clone(), record);
        }
        Ok(Arc::new(AppState { store: store.to_path_buf(), seed, sessions: Mutex::new(sessions) }))
    }

    fn persist(&self, record: &SessionRecord) -> Result<()> {
        let path = self.store.join("sessions").join(format!("{}.json", record.session.id));
        write_atomic(&path, &to_sorted_json(record)?)
    }

    fn model_path(&self, name: &str) -> Result<PathBuf> {
        let ok = !name.is_empty()
            && name.len() <= 128
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
            && !name.starts_with('.');
        if !ok {
            return Err(Error::InvalidArgument(format!("bad model name `{name}`")));
        }
        Ok(self.store.join("models").join(format!("{name}.json")))
    }
}

struct ApiError(StatusCode, Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::ProtocolViolation(_) => StatusCode::CONFLICT,
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError(status, e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(error_body(&self.1))).into_response()
    }
}

fn error_body(e: &Error) -> JsonValue {
    json!({ "error": e.code(), "message": e.to_string() })
}

fn not_found(what: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, Error::UnknownReference(what.to_string()))
}

fn summary(s: &Session) -> JsonValue {
    json!({
        "id": s.id,
        "status": s.status,
        "iterations": s.iterations(),
        "pending": s.pending,
        "partition": s.current,
    })
}

type ApiResult = std::result::Result<Response, ApiError>;

async fn create_session(State(app): State<Arc<AppState>>, Json(req): Json<CreateSession>) -> ApiResult {
    let config = req.config.unwrap_or_else(|| SessionConfig { seed: app.seed, ..Default::default() });
    let session = init_session_with(&req.seed_attribute, req.statement, config)?;
    let record = SessionRecord { session, tokens: BTreeMap::new() };
    app.persist(&record)?;
    let body = summary(&record.session);
    app.sessions.lock().expect("session lock").insert(record.session.id.clone(), record);
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

fn with_session<T>(app: &AppState, id: &str, f: impl FnOnce(&Session) -> T) -> std::result::Result<T, ApiError> {
    let sessions = app.sessions.lock().expect("session lock");
    sessions.get(id).map(|r| f(&r.session)).ok_or_else(|| not_found(&format!("session {id}")))
}

async fn get_session(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let v = with_session(&app, &id, |s| serde_json::to_value(s))?.map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(Json(v).into_response())
}

async fn get_pending(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let v = with_session(&app, &id, |s| json!({ "status": s.status, "pending": s.pending }))?;
    Ok(Json(v).into_response())
}

async fn get_partition(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let v = with_session(&app, &id, |s| json!({ "status": s.status, "partition": s.current }))?;
    Ok(Json(v).into_response())
}

async fn submit_answer(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<SubmitAnswer>,
) -> ApiResult {
    let mut sessions = app.sessions.lock().expect("session lock");
    let record = sessions.get_mut(&id).ok_or_else(|| not_found(&format!("session {id}")))?;
    if let Some(stored) = req.request_token.as_ref().and_then(|t| record.tokens.get(t)) {
        let status = StatusCode::from_u16(stored.status).unwrap_or(StatusCode::OK);
        return Ok((status, Json(stored.body.clone())).into_response());
    }
    let mut next = record.clone();
    let (status, body) = match apply_step(&mut next.session, req.answer) {
        Ok(()) => (StatusCode::OK, summary(&next.session)),
        Err(e) => {
            let ApiError(status, e) = ApiError::from(e);
            (status, error_body(&e))
        }
    };
    if let Some(token) = req.request_token {
        next.tokens.insert(token, StoredResponse { status: status.as_u16(), body: body.clone() });
    }
    if next != *record {
        app.persist(&next)?;
        *record = next;
    }
    Ok((status, Json(body)).into_response())
}

async fn get_model(State(app): State<Arc<AppState>>, UrlPath(name): UrlPath<String>) -> ApiResult {
    let path = app.model_path(&name)?;
    if !path.exists() {
        return Err(not_found(&format!("model {name}")));
    }
    let doc = load_model(&path)?;
    let v = serde_json::to_value(&doc).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(Json(v).into_response())
}

async fn put_model(State(app): State<Arc<AppState>>, UrlPath(name): UrlPath<String>, body: String) -> ApiResult {
    let path = app.model_path(&name)?;
    let doc = ModelDocument::from_json(&body, &format!("models/{name}"))?;
    save_model(&path, &doc)?;
    Ok((StatusCode::OK, Json(json!({ "name": name, "saved": true }))).into_response())
}

async fn solve_stored_model(State(app): State<Arc<AppState>>, UrlPath(name): UrlPath<String>) -> ApiResult {
    let path = app.model_path(&name)?;
    if !path.exists() {
        return Err(not_found(&format!("model {name}")));
    }
    let outcome = solve_model(&load_model(&path)?, app.seed)?;
    let v = serde_json::to_value(&outcome).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(Json(v).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/pending", get(get_pending))
        .route("/sessions/{id}/answers", post(submit_answer))
        .route("/sessions/{id}/partition", get(get_partition))
        .route("/models/{name}", get(get_model).put(put_model))
        .route("/models/{name}/solve", post(solve_stored_model))
        .with_state(state)
}

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub port: u16,
    pub store: PathBuf,
    pub seed: u64,
}

/// Binds to localhost and serves until the task is cancelled.
pub async fn serve(config: ServiceConfig) -> Result<()> {
    let state = AppState::open(&config.store, config.seed)
        .map_err(|e| Error::StartupError(format!("store {}: {e}", config.store.display())))?;
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", config.port))
        .await
        .map_err(|e| Error::StartupError(format!("bind 127.0.0.1:{}: {e}", config.port)))?;
    let addr = listener.local_addr().map_err(|e| Error::StartupError(e.to_string()))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, router(state)).await.map_err(|e| Error::StartupError(e.to_string()))
}
