//! REST facade over the pipeline with file-backed sessions.
//!
//! Mutating requests on one session take that session's lock (FIFO), then
//! load, apply and save on the blocking pool, so concurrent edits are
//! applied in arrival order without interleaving.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};
use ucm_core::gateway::Provider;
use ucm_core::pipeline::{export_session, Clock, ExportFormat, IdSource};
use ucm_core::{Edit, Pipeline, PipelineError, RequirementsDoc, Session, Step};

use crate::store::{SessionStore, StoreError};

pub type SharedProvider = Arc<dyn Provider + Send + Sync>;
pub type AppPipeline = Pipeline<SharedProvider, Box<dyn Clock + Send + Sync>, Box<dyn IdSource + Send + Sync>>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub data_dir: PathBuf,
    /// Allowed browser origin; `*` allows any.
    pub cors_origin: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("ucm-data"),
            cors_origin: "http://localhost:5173".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.into(),
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "E-BAD-REQUEST", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

/// HTTP status for a pipeline failure.
pub fn pipeline_status(e: &PipelineError) -> StatusCode {
    match e {
        PipelineError::StageOrder { .. } | PipelineError::NoModel => StatusCode::CONFLICT,
        PipelineError::Gateway(_) | PipelineError::RepairFailed { .. } | PipelineError::Parse(_) => {
            StatusCode::BAD_GATEWAY
        }
        PipelineError::Prompt(_) => StatusCode::INTERNAL_SERVER_ERROR,
        PipelineError::EmptyRequirements
        | PipelineError::UnknownUseCase(_)
        | PipelineError::UnknownTarget(_)
        | PipelineError::EmptyName
        | PipelineError::InvalidEdit(_)
        | PipelineError::NothingToConfirm(_)
        | PipelineError::InvalidModel(_) => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        ApiError::new(pipeline_status(&e), e.code(), e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

#[derive(Clone)]
pub struct AppState {
    store: SessionStore,
    pipeline: Arc<AppPipeline>,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
}

impl AppState {
    pub fn new(store: SessionStore, pipeline: AppPipeline) -> Self {
        AppState {
            store,
            pipeline: Arc::new(pipeline),
            locks: Arc::default(),
        }
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut map = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(id.to_string()).or_default().clone()
    }

    /// Load, apply `f`, save; serialized per session.
    async fn mutate<F>(&self, id: String, f: F) -> Result<Session, ApiError>
    where
        F: FnOnce(&AppPipeline, &mut Session) -> Result<(), PipelineError> + Send + 'static,
    {
        let _guard = self.lock_for(&id).lock_owned().await;
        let st = self.clone();
        tokio::task::spawn_blocking(move || {
            let mut s = st.store.load(&id)?;
            f(&st.pipeline, &mut s)?;
            st.store.save(&s)?;
            Ok(s)
        })
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "E-INTERNAL", e.to_string()))?
    }

    async fn read(&self, id: String) -> Result<Session, ApiError> {
        let st = self.clone();
        tokio::task::spawn_blocking(move || st.store.load(&id).map_err(ApiError::from))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "E-INTERNAL", e.to_string()))?
    }
}

#[derive(Deserialize)]
struct CreateBody {
    title: String,
    text: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EditsBody {
    List(Vec<Edit>),
    Wrapped { edits: Vec<Edit> },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunBody {
    #[serde(default)]
    usecase_ids: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "version": VERSION }))
}

async fn create_session(
    State(st): State<AppState>,
    body: Result<Json<CreateBody>, JsonRejection>,
) -> Result<(StatusCode, Json<Session>), ApiError> {
    let Json(body) = body?;
    let st2 = st.clone();
    let session = tokio::task::spawn_blocking(move || -> Result<Session, ApiError> {
        let id_hint = body.title.trim().to_lowercase().replace(char::is_whitespace, "-");
        let s = st2.pipeline.start_session(RequirementsDoc {
            id: id_hint,
            title: body.title,
            text: body.text,
        })?;
        st2.store.save(&s)?;
        Ok(s)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "E-INTERNAL", e.to_string()))??;
    Ok((StatusCode::CREATED, Json(session)))
}

async fn list_sessions(State(st): State<AppState>) -> Result<Json<serde_json::Value>, ApiError> {
    let list = tokio::task::spawn_blocking(move || st.store.list())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "E-INTERNAL", e.to_string()))??;
    Ok(Json(json!({ "sessions": list })))
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Session>, ApiError> {
    st.read(id).await.map(Json)
}

async fn run_stage(
    State(st): State<AppState>,
    Path((id, stage)): Path<(String, String)>,
    body: Bytes,
) -> Result<(StatusCode, Json<Session>), ApiError> {
    let step = Step::from_name(&stage)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "E-UNKNOWN-STAGE", format!("no stage `{stage}`")))?;
    let body: RunBody = if body.iter().all(u8::is_ascii_whitespace) {
        RunBody::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    let session = st
        .mutate(id, move |p, s| p.run_stage(s, step, body.usecase_ids.as_deref()))
        .await?;
    Ok((StatusCode::ACCEPTED, Json(session)))
}

async fn apply_edits(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<EditsBody>, JsonRejection>,
) -> Result<Json<Session>, ApiError> {
    let edits = match body?.0 {
        EditsBody::List(v) | EditsBody::Wrapped { edits: v } => v,
    };
    st.mutate(id, move |p, s| p.apply_edits(s, &edits)).await.map(Json)
}

async fn confirm(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Session>, ApiError> {
    st.mutate(id, |p, s| p.confirm(s)).await.map(Json)
}

async fn export(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ExportQuery>,
) -> Result<Response, ApiError> {
    let name = q.format.as_deref().unwrap_or("json");
    let format = ExportFormat::from_name(name)
        .ok_or_else(|| ApiError::bad_request(format!("unknown export format `{name}` (use puml or json)")))?;
    let session = st.read(id).await?;
    let doc = export_session(&session, format)?;
    let content_type = match format {
        ExportFormat::Puml => "text/plain; charset=utf-8",
        ExportFormat::Json => "application/json",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], doc).into_response())
}

async fn model(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = st.read(id).await?;
    match session.model {
        Some(m) => Ok(Json(m).into_response()),
        None => Err(PipelineError::NoModel.into()),
    }
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "E-NOT-FOUND", "no such route")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "E-METHOD", "method not allowed on this route")
}

fn cors(origin: &str) -> CorsLayer {
    let allow = if origin == "*" {
        AllowOrigin::any()
    } else {
        match HeaderValue::from_str(origin) {
            Ok(v) => AllowOrigin::exact(v),
            Err(_) => AllowOrigin::list([]),
        }
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(state: AppState, cors_origin: &str) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/stages/{stage}/run", post(run_stage))
        .route("/sessions/{id}/edits", post(apply_edits))
        .route("/sessions/{id}/confirm", post(confirm))
        .route("/sessions/{id}/export", get(export))
        .route("/sessions/{id}/model", get(model))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(cors(cors_origin))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve_with<F>(listener: tokio::net::TcpListener, app: Router, shutdown: F) -> std::io::Result<()>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

/// Binds `config.bind` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig, pipeline: AppPipeline) -> Result<(), Box<dyn std::error::Error>> {
    let store = SessionStore::open(&config.data_dir)?;
    let app = router(AppState::new(store, pipeline), &config.cors_origin);
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    eprintln!("ucm: listening on http://{}", listener.local_addr()?);
    serve_with(listener, app, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
