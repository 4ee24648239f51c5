//! HTTP session service: remote agents and the play UI drive Break-and-Make
//! episodes over JSON, PNG frames and structured-text snap grids.
//!
//! | method | path | body / result |
//! |---|---|---|
//! | POST | `/sessions` | [`CreateSession`] → [`SessionInfo`] |
//! | GET | `/sessions/{id}` | [`SessionInfo`] |
//! | GET | `/sessions/{id}/frames/{table,hand}.png` | PNG |
//! | GET | `/sessions/{id}/snaps?workspace=&polarity=` | snap records |
//! | POST | `/sessions/{id}/action` | [`ActionRequest`] → [`StepResponse`] |
//! | GET | `/sessions/{id}/score` | [`ScoreReport`], 409 until terminal |
//! | DELETE | `/sessions/{id}` | 204 |
//! | GET | `/shapes`, `/colors` | library listings |

mod error;
mod sessions;

use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use brickmake_core::api::{
    color_listing, shape_listing, ActionRequest, ColorInfo, CreateSession, ObservationMeta, SessionInfo, ShapeInfo,
    StepResponse,
};
use brickmake_core::assembly::Assembly;
use brickmake_core::brickfile::{flatten, parse_ldraw, Polarity, ShapeLibrary};
use brickmake_core::datagen::{random_assembly, DatasetManifest, GeneratorConfig, MANIFEST_FILE};
use brickmake_core::env::{Env, EnvError, Workspace};
use brickmake_core::metrics::ScoreReport;
use serde::Deserialize;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;
use tower_http::trace::TraceLayer;

pub use error::ApiError;
pub use sessions::{Session, SessionStore};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Clone)]
pub struct ServerConfig {
    pub library: Arc<ShapeLibrary>,
    /// Dataset directories, each holding a manifest.
    pub datasets: Vec<PathBuf>,
    pub idle_timeout: Duration,
}

impl ServerConfig {
    pub fn new(library: Arc<ShapeLibrary>) -> Self {
        ServerConfig { library, datasets: Vec::new(), idle_timeout: DEFAULT_IDLE_TIMEOUT }
    }
}

struct Dataset {
    root: PathBuf,
    manifest: DatasetManifest,
}

pub struct AppState {
    library: Arc<ShapeLibrary>,
    datasets: BTreeMap<String, Dataset>,
    pub sessions: SessionStore,
}

impl AppState {
    /// Reads every dataset manifest up front; datasets are keyed by name.
    pub fn new(config: ServerConfig) -> Result<Self, ApiError> {
        let mut datasets = BTreeMap::new();
        for root in config.datasets {
            let manifest = DatasetManifest::read(&root.join(MANIFEST_FILE)).map_err(|e| ApiError::Internal(e.to_string()))?;
            datasets.insert(manifest.name.clone(), Dataset { root, manifest });
        }
        Ok(AppState { library: config.library, datasets, sessions: SessionStore::new(config.idle_timeout) })
    }

    fn target(&self, req: &CreateSession) -> Result<Assembly, ApiError> {
        if let Some(text) = &req.ldraw {
            let doc = parse_ldraw(text).map_err(|e| ApiError::BadRequest(format!("ldraw: {e}")))?;
            return flatten(&doc, &self.library).map_err(|e| ApiError::BadRequest(format!("ldraw: {e}")));
        }
        if let Some(name) = &req.dataset {
            let ds = self.datasets.get(name).ok_or_else(|| ApiError::NotFound(format!("unknown dataset {name}")))?;
            let scene = req.scene.as_deref().ok_or_else(|| ApiError::BadRequest("dataset requires scene".into()))?;
            let entry = ds
                .manifest
                .entries
                .iter()
                .find(|e| e.path == scene)
                .ok_or_else(|| ApiError::NotFound(format!("unknown scene {scene} in {name}")))?;
            return read_scene(&ds.root.join(&entry.path), &self.library);
        }
        match (req.seed, req.size) {
            (Some(seed), Some(size)) => random_assembly(&GeneratorConfig::for_library(&self.library, size, seed), &self.library)
                .map_err(|e| ApiError::BadRequest(e.to_string())),
            _ => Err(ApiError::BadRequest("give ldraw, dataset+scene, or seed+size".into())),
        }
    }
}

fn read_scene(path: &FsPath, library: &ShapeLibrary) -> Result<Assembly, ApiError> {
    brickmake_core::brickfile::read_assembly(path, library).map_err(|e| ApiError::Internal(format!("{}: {e}", path.display())))
}

type AppResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info).delete(delete_session))
        .route("/sessions/{id}/frames/{file}", get(frame))
        .route("/sessions/{id}/snaps", get(snaps))
        .route("/sessions/{id}/action", post(act))
        .route("/sessions/{id}/score", get(score))
        .route("/shapes", get(shapes))
        .route("/colors", get(colors))
        .layer(TraceLayer::new_for_http())
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serve until the listener fails, sweeping idle sessions once a minute.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    let sweeper = Arc::clone(&state);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let gone = sweeper.sessions.sweep();
            if gone > 0 {
                tracing::info!(gone, "expired idle sessions");
            }
        }
    });
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> AppResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> AppResult<(StatusCode, Json<SessionInfo>)> {
    let req: CreateSession = serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let app2 = Arc::clone(&app);
    let env = blocking(move || -> AppResult<Env> {
        let target = app2.target(&req)?;
        let mut config = req.config.clone().unwrap_or_default();
        if req.config.is_none() {
            config.seed = req.seed.unwrap_or(0);
        }
        Env::reset(Arc::clone(&app2.library), target, config).map_err(|e| ApiError::BadRequest(e.to_string()))
    })
    .await??;
    let info_env = env.clone();
    let id = app.sessions.insert(env);
    tracing::info!(session = %id, "created");
    Ok((StatusCode::CREATED, Json(SessionInfo::of(&id, &info_env))))
}

async fn session_info(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> AppResult<Json<SessionInfo>> {
    let s = app.sessions.get(&id)?;
    let env = s.env.lock().await;
    Ok(Json(SessionInfo::of(&id, &env)))
}

async fn delete_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> AppResult<StatusCode> {
    app.sessions.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

fn parse_workspace(s: &str) -> AppResult<Workspace> {
    match s {
        "table" => Ok(Workspace::Table),
        "hand" => Ok(Workspace::Hand),
        other => Err(ApiError::BadRequest(format!("unknown workspace {other}"))),
    }
}

async fn frame(State(app): State<Arc<AppState>>, Path((id, file)): Path<(String, String)>) -> AppResult<Response> {
    let ws = file
        .strip_suffix(".png")
        .ok_or_else(|| ApiError::NotFound(format!("no frame {file}")))
        .and_then(|w| parse_workspace(w).map_err(|_| ApiError::NotFound(format!("no frame {file}"))))?;
    let s = app.sessions.get(&id)?;
    let frame = {
        let env = s.env.lock().await;
        match ws {
            Workspace::Table => Arc::clone(&env.observation().table_frame),
            Workspace::Hand => Arc::clone(&env.observation().hand_frame),
        }
    };
    let png = blocking(move || frame.to_png()).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

#[derive(Deserialize)]
struct SnapQuery {
    workspace: String,
    polarity: String,
}

async fn snaps(State(app): State<Arc<AppState>>, Path(id): Path<String>, Query(q): Query<SnapQuery>) -> AppResult<Response> {
    let ws = parse_workspace(&q.workspace)?;
    let polarity = match q.polarity.as_str() {
        "positive" | "+" => Polarity::Positive,
        "negative" | "-" => Polarity::Negative,
        other => return Err(ApiError::BadRequest(format!("unknown polarity {other}"))),
    };
    let s = app.sessions.get(&id)?;
    let env = s.env.lock().await;
    let obs = env.observation();
    let frame = if ws == Workspace::Table { &obs.table_frame } else { &obs.hand_frame };
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], frame.snaps(polarity).to_records()).into_response())
}

async fn act(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> AppResult<Json<StepResponse>> {
    let s = app.sessions.get(&id)?;
    let req: ActionRequest = serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("malformed action: {e}")))?;
    let mut env = Arc::clone(&s.env).lock_owned().await;
    if env.is_done() {
        return Err(ApiError::Conflict("episode is done".into()));
    }
    let action = match req {
        ActionRequest::Code { code } => env.action_space().decode(code).map_err(|e| ApiError::BadRequest(e.to_string()))?,
        ActionRequest::Record { action } => {
            env.action_space().encode(&action).map_err(|e| ApiError::BadRequest(e.to_string()))?;
            action
        }
    };
    blocking(move || {
        let r = env.step(&action).map_err(|e| match e {
            EnvError::EpisodeDone => ApiError::Conflict(e.to_string()),
            other => ApiError::BadRequest(other.to_string()),
        })?;
        Ok(StepResponse {
            success: r.success,
            failure: r.failure,
            terminal: r.terminal,
            score: r.score,
            observation: ObservationMeta::of(&env),
        })
    })
    .await?
    .map(Json)
}

async fn score(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> AppResult<Json<ScoreReport>> {
    let s = app.sessions.get(&id)?;
    let env = s.env.lock().await;
    env.score().cloned().map(Json).ok_or_else(|| ApiError::Conflict("episode is not over".into()))
}

async fn shapes(State(app): State<Arc<AppState>>) -> Json<Vec<ShapeInfo>> {
    Json(shape_listing(&app.library))
}

async fn colors(State(app): State<Arc<AppState>>) -> Json<Vec<ColorInfo>> {
    Json(color_listing(&app.library))
}

