//! HTTP/JSON front end for an [`Engine`].
//!
//! Readers take a snapshot `Arc<Engine>` per request; `POST /api/index`
//! builds a fresh index off the async runtime and swaps the snapshot in one
//! step, so a search sees either the old or the new index.

use std::collections::BTreeMap;
use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hnsir_core::api::{
    ErrorBody, ErrorDetail, ExplainResponse, IndexRequest, IndexSummary, SearchResponse,
    StatsResponse,
};
use hnsir_core::index::{index_corpus, IndexError};
use hnsir_core::{DocumentRecord, Engine, EngineError, SearchOptions};
use parking_lot::RwLock;
use tokio::net::TcpListener;

pub struct AppState {
    engine: RwLock<Arc<Engine>>,
    writer: tokio::sync::Mutex<()>,
    default_k: usize,
}

impl AppState {
    pub fn new(engine: Engine, default_k: usize) -> Arc<Self> {
        Arc::new(Self {
            engine: RwLock::new(Arc::new(engine)),
            writer: tokio::sync::Mutex::new(()),
            default_k: default_k.max(1),
        })
    }

    pub fn snapshot(&self) -> Arc<Engine> {
        self.engine.read().clone()
    }

    fn publish(&self, engine: Engine) {
        *self.engine.write() = Arc::new(engine);
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/search", get(search))
        .route("/api/explain", get(explain))
        .route("/api/doc/{id}", get(doc))
        .route("/api/stats", get(stats))
        .route("/api/index", post(reindex))
        .with_state(state)
}

pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr()?, "serving");
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    detail: ErrorDetail,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, detail: ErrorDetail { code: code.into(), message: message.into(), position: None } }
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.detail })).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Parse(p) => {
                let mut err = Self::bad_request("parse_error", p.to_string());
                err.detail.position = Some(p.position);
                err
            }
            EngineError::Index(IndexError::UnknownDoc(id)) => {
                Self::new(StatusCode::NOT_FOUND, "unknown_doc", format!("no document {id:?}"))
            }
            EngineError::Index(IndexError::ZeroK) => Self::bad_request("bad_k", "k must be at least 1"),
            EngineError::Index(other) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string()),
        }
    }
}

type Params = Query<BTreeMap<String, String>>;

fn query_text(params: &BTreeMap<String, String>) -> Result<&str, ApiError> {
    match params.get("q").map(String::as_str) {
        Some(q) if !q.trim().is_empty() => Ok(q),
        _ => Err(ApiError::bad_request("missing_query", "parameter q must be a nonempty query")),
    }
}

fn flag(params: &BTreeMap<String, String>, name: &str) -> Result<bool, ApiError> {
    match params.get(name).map(String::as_str) {
        None | Some("0") | Some("false") => Ok(false),
        Some("1") | Some("true") => Ok(true),
        Some(other) => Err(ApiError::bad_request("bad_flag", format!("{name} must be 0 or 1, got {other:?}"))),
    }
}

async fn search(State(state): State<Arc<AppState>>, Query(params): Params) -> Result<Json<SearchResponse>, ApiError> {
    let q = query_text(&params)?;
    let k = match params.get("k") {
        None => state.default_k,
        Some(k) => k
            .parse()
            .map_err(|_| ApiError::bad_request("bad_k", format!("k must be a positive integer, got {k:?}")))?,
    };
    let opts = SearchOptions { k, fuzzy: flag(&params, "fuzzy")?, synonyms: flag(&params, "synonyms")? };
    let outcome = state.snapshot().search(q, opts)?;
    Ok(Json(SearchResponse { hits: outcome.hits, unknown_terms: outcome.unknown_terms }))
}

async fn explain(State(state): State<Arc<AppState>>, Query(params): Params) -> Result<Json<ExplainResponse>, ApiError> {
    let q = query_text(&params)?;
    let doc = params
        .get("doc")
        .filter(|d| !d.is_empty())
        .ok_or_else(|| ApiError::bad_request("missing_doc", "parameter doc is required"))?;
    let ex = state.snapshot().explain(q, doc, flag(&params, "fuzzy")?, flag(&params, "synonyms")?)?;
    Ok(Json(ExplainResponse { rows: ex.rows, total: ex.total }))
}

async fn doc(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<DocumentRecord>, ApiError> {
    state
        .snapshot()
        .index()
        .doc(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_doc", format!("no document {id:?}")))
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<StatsResponse> {
    let engine = state.snapshot();
    Json(StatsResponse::new(engine.index().stats(), engine.index().mode()))
}

async fn reindex(
    State(state): State<Arc<AppState>>,
    body: Result<Json<IndexRequest>, JsonRejection>,
) -> Result<Json<IndexSummary>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::bad_request("bad_body", e.body_text()))?;
    let _guard = state.writer.lock().await;
    let current = state.snapshot();
    let mode = current.index().mode();
    let built = tokio::task::spawn_blocking(move || index_corpus(req.documents, mode))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(|e| ApiError::bad_request("bad_corpus", e.to_string()))?;
    let summary = built.stats();
    state.publish(current.with_index(built));
    tracing::info!(docs = summary.docs, terms = summary.terms, "index swapped");
    Ok(Json(summary))
}
