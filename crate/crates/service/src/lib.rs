//! HTTP sessions for playing instances against the exact engine.
//!
//! Sessions live in memory and expire after an idle hour. Every session is
//! solved once at creation; when that exceeds the budget the engine falls
//! back to greedy play (each such move is marked `heuristic`) and analysis
//! answers 413.

mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use csp_core::catalog::{catalog, catalog_gaps};
use csp_core::format::InstanceFile;
use csp_core::{validate_instance, Instance};
use serde::Deserialize;
use serde_json::{json, Value};

pub use session::{Analysis, HistoryEntry, Mode, MoveError, MoveValue, Session, View, WireMove};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Largest solver budget a session may use.
    pub budget: usize,
    pub idle_expiry: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            budget: csp_core::solver::DEFAULT_BUDGET,
            idle_expiry: Duration::from_secs(3600),
        }
    }
}

type Shared = Arc<Mutex<Session>>;

pub struct AppState {
    config: ServiceConfig,
    sessions: Mutex<HashMap<String, Shared>>,
    catalog: OnceLock<Value>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<AppState> {
        Arc::new(AppState {
            config,
            sessions: Mutex::new(HashMap::new()),
            catalog: OnceLock::new(),
        })
    }

    /// Drops sessions idle for longer than the expiry; returns how many.
    pub fn purge_expired(&self) -> usize {
        let now = Instant::now();
        let mut map = self.sessions.lock().expect("session map");
        let before = map.len();
        map.retain(|_, s| {
            // a session busy in another request is in use, not idle
            s.try_lock()
                .map(|s| now.duration_since(s.last_used) < self.config.idle_expiry)
                .unwrap_or(true)
        });
        before - map.len()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map").len()
    }

    fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.purge_expired();
        self.sessions
            .lock()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {id}")))
    }
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, msg: impl Into<String>) -> ApiError {
        ApiError {
            status,
            body: json!({ "error": msg.into() }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InstanceRef {
    Name(String),
    Inline(Box<InstanceFile>),
}

#[derive(Deserialize)]
struct CreateRequest {
    instance: InstanceRef,
    mode: Mode,
    budget: Option<usize>,
    /// Refuse the session unless exact analysis fits the budget.
    #[serde(default)]
    analysis: bool,
}

fn squash(name: &str) -> String {
    name.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

fn resolve(r: InstanceRef) -> Result<Instance, ApiError> {
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, m);
    let inst = match r {
        InstanceRef::Name(name) => catalog()
            .into_iter()
            .find(|e| squash(&e.name) == squash(&name))
            .map(|e| e.instance)
            .ok_or_else(|| bad(format!("unknown catalog instance {name:?}")))?,
        InstanceRef::Inline(file) => file.into_instance().map_err(|e| bad(e.to_string()))?,
    };
    let problems = validate_instance(&inst);
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(ToString::to_string).collect();
        return Err(bad(format!("invalid instance: {}", text.join("; "))));
    }
    inst.initial_state().map_err(|e| bad(e.to_string()))?;
    Ok(inst)
}

async fn create_game(State(app): State<Arc<AppState>>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    app.purge_expired();
    let req: CreateRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let inst = resolve(req.instance)?;
    let budget = req.budget.unwrap_or(app.config.budget).min(app.config.budget);
    let id = uuid::Uuid::new_v4().to_string();
    let (mode, want_analysis) = (req.mode, req.analysis);
    let made = tokio::task::spawn_blocking(move || Session::new(id, inst, mode, budget))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    if want_analysis && !made.is_exact() {
        return Err(ApiError {
            status: StatusCode::PAYLOAD_TOO_LARGE,
            body: json!({ "error": format!("exact analysis exceeds the budget of {budget} states"), "available": false }),
        });
    }
    let view = made.view(None);
    app.sessions
        .lock()
        .expect("session map")
        .insert(made.id.clone(), Arc::new(Mutex::new(made)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_game(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<View>, ApiError> {
    let s = app.get(&id)?;
    let mut s = s.lock().expect("session");
    s.last_used = Instant::now();
    Ok(Json(s.view(None)))
}

async fn post_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<View>, ApiError> {
    let mv: WireMove = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("move body: {e}")))?;
    let shared = app.get(&id)?;
    let view = tokio::task::spawn_blocking(move || {
        let mut s = shared.lock().expect("session");
        s.last_used = Instant::now();
        s.post_move(mv).map(|reply| s.view(reply))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match view {
        Ok(v) => Ok(Json(v)),
        Err(MoveError::NotYourTurn) => Err(ApiError::new(StatusCode::CONFLICT, "not your turn")),
        Err(MoveError::GameOver) => Err(ApiError::new(StatusCode::CONFLICT, "the game is over")),
        Err(MoveError::Illegal(m)) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, m)),
    }
}

async fn analysis(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = app.get(&id)?;
    let mut s = s.lock().expect("session");
    s.last_used = Instant::now();
    Ok(match s.analysis() {
        Some(a) => Json(a).into_response(),
        None => (StatusCode::PAYLOAD_TOO_LARGE, Json(json!({ "available": false }))).into_response(),
    })
}

fn catalog_json() -> Value {
    let entries: Vec<Value> = catalog()
        .into_iter()
        .map(|e| {
            json!({
                "name": e.name,
                "params": e.params,
                "certificate": e.certificate,
                "note": e.note,
                "instance": InstanceFile::from_instance(&e.instance),
            })
        })
        .collect();
    let missing: Vec<Value> = catalog_gaps()
        .into_iter()
        .map(|(name, why)| json!({ "name": name, "reason": why }))
        .collect();
    json!({ "entries": entries, "missing": missing })
}

async fn get_catalog(State(app): State<Arc<AppState>>) -> Json<Value> {
    let app2 = app.clone();
    if app.catalog.get().is_none() {
        let v = tokio::task::spawn_blocking(catalog_json).await.unwrap_or(Value::Null);
        let _ = app2.catalog.set(v);
    }
    Json(app.catalog.get().cloned().unwrap_or(Value::Null))
}

pub fn router(app: Arc<AppState>) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/:id", get(get_game))
        .route("/games/:id/moves", post(post_move))
        .route("/games/:id/analysis", get(analysis))
        .route("/catalog", get(get_catalog))
        .with_state(app)
}

/// Serves until interrupted, purging idle sessions once a minute.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let app = AppState::new(config);
    let sweeper = app.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.purge_expired();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
