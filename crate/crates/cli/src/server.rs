//! JSON session API and static hosting of the browser client.

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lru::LruCache;
use popctl_core::{generate, parse_nfa, GadgetSpec, Nfa};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::session::{controller_for, NamedSplit, Session, SessionError, SessionView};

pub const DEFAULT_CAPACITY: usize = 64;

/// Sessions by id, least recently used evicted first. Each session has its
/// own lock so moves on one session never wait for another.
pub struct AppState {
    sessions: Mutex<LruCache<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity).unwrap_or(NonZeroUsize::MIN);
        AppState {
            sessions: Mutex::new(LruCache::new(cap)),
        }
    }

    fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.sessions.lock().unwrap().get(id).cloned()
    }

    fn insert(&self, session: Session) {
        let id = session.id().to_string();
        self.sessions
            .lock()
            .unwrap()
            .put(id, Arc::new(Mutex::new(session)));
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateRequest {
    /// Automaton in the text format.
    #[serde(default)]
    pub nfa: Option<String>,
    /// Built-in family such as `split` or `nested:2`, instead of `nfa`.
    #[serde(default)]
    pub gadget: Option<String>,
    pub m: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MoveRequest {
    pub split: NamedSplit,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Session(SessionError),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (code, error, state) = match self {
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, format!("no session {id}"), None),
            ApiError::BadRequest(msg) => (StatusCode::BAD_REQUEST, msg, None),
            ApiError::Session(e) => {
                let code = match e {
                    SessionError::Invalid { .. } | SessionError::NoController(_) => {
                        StatusCode::UNPROCESSABLE_ENTITY
                    }
                    SessionError::NotRunning(_) | SessionError::NothingToUndo => {
                        StatusCode::CONFLICT
                    }
                };
                let state = match &e {
                    SessionError::Invalid { state, .. } => state.clone(),
                    _ => None,
                };
                (code, e.to_string(), state)
            }
        };
        (code, Json(ErrorBody { error, state })).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError::Session(e)
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn load(req: &CreateRequest) -> ApiResult<Nfa> {
    match (&req.nfa, &req.gadget) {
        (Some(text), None) => parse_nfa(text).map_err(|e| ApiError::BadRequest(e.to_string())),
        (None, Some(g)) => {
            let spec: GadgetSpec = g.parse().map_err(ApiError::BadRequest)?;
            generate(&spec).map_err(|e| ApiError::BadRequest(e.to_string()))
        }
        _ => Err(ApiError::BadRequest(
            "give exactly one of `nfa` and `gadget`".into(),
        )),
    }
}

async fn create(
    State(app): State<Arc<AppState>>,
    Json(req): Json<CreateRequest>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let nfa = Arc::new(load(&req)?);
    let m = req.m;
    let session = tokio::task::spawn_blocking(move || {
        let controller = Arc::new(controller_for(&nfa)?);
        Session::new(uuid::Uuid::new_v4().to_string(), nfa, controller, m)
    })
    .await
    .map_err(|e| ApiError::BadRequest(e.to_string()))??;
    let view = session.view();
    app.insert(session);
    Ok((StatusCode::CREATED, Json(view)))
}

fn with_session<T>(
    app: &AppState,
    id: &str,
    f: impl FnOnce(&mut Session) -> Result<T, SessionError>,
) -> ApiResult<T> {
    let s = app.get(id).ok_or_else(|| ApiError::NotFound(id.into()))?;
    let mut guard = s.lock().unwrap();
    Ok(f(&mut guard)?)
}

async fn show(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionView>> {
    with_session(&app, &id, |s| Ok(s.view())).map(Json)
}

async fn play(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> ApiResult<Json<SessionView>> {
    with_session(&app, &id, |s| s.play(&req.split)).map(Json)
}

async fn undo(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionView>> {
    with_session(&app, &id, Session::undo).map(Json)
}

/// API routes, plus the client bundle at `/` when `static_dir` is given.
pub fn router(app: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create))
        .route("/api/sessions/{id}", get(show))
        .route("/api/sessions/{id}/move", post(play))
        .route("/api/sessions/{id}/undo", post(undo))
        .with_state(app);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(port: u16, static_dir: Option<PathBuf>, capacity: usize) -> std::io::Result<()> {
    let app = router(Arc::new(AppState::new(capacity)), static_dir);
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await
}
