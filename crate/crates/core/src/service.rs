//! Read-only JSON service over a finished run directory.
//!
//! | path | payload |
//! |------|---------|
//! | `/v1/topics` | topics with top words and category |
//! | `/v1/query?q=` | ranked topics for free text |
//! | `/v1/topics/{id}/detail` | ranked classes, methods, traces |
//! | `/v1/heatmap` | class-topic shades |
//! | `/v1/categories` | topic categories |
//! | `/v1/clusters?lambda=` | λ-cut of the cached closure |
//! | `/v1/stats` | corpus statistics and run metadata |
//!
//! [`ArtifactService::handle`] is a pure function of the loaded artifacts, so
//! the routes can be exercised without a socket.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::{Json, Router};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::pipeline::{load_run, AnalysisArtifacts, RunManifest};
use crate::query::QueryIndex;
use crate::trace::CorpusStats;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: Value,
}

impl ApiResponse {
    fn ok(body: Value) -> Self {
        ApiResponse { status: 200, body }
    }

    fn error(status: u16, message: impl Into<String>) -> Self {
        ApiResponse {
            status,
            body: json!({ "error": message.into() }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArtifactService {
    pub manifest: RunManifest,
    pub index: QueryIndex,
    pub analysis: AnalysisArtifacts,
    pub stats: CorpusStats,
}

impl ArtifactService {
    /// Loads a run directory. Fails when the run is incomplete or any
    /// artifact no longer matches the manifest.
    pub fn open(dir: &Path) -> Result<Self> {
        let (manifest, index, analysis, stats) = load_run(dir)?;
        Ok(ArtifactService {
            manifest,
            index,
            analysis,
            stats,
        })
    }

    pub fn handle(&self, path: &str, params: &HashMap<String, String>) -> ApiResponse {
        let segments: Vec<&str> = path.trim_matches('/').split('/').collect();
        match segments.as_slice() {
            ["v1", "topics"] => self.topics(),
            ["v1", "query"] => self.query(params),
            ["v1", "topics", id, "detail"] => self.detail(id, params),
            ["v1", "heatmap"] => ApiResponse::ok(json!({
                "classes": self.analysis.class_topic.classes,
                "num_topics": self.analysis.class_topic.num_topics,
                "heatmap": self.analysis.heatmap,
            })),
            ["v1", "categories"] => ApiResponse::ok(json!(self.analysis.categories)),
            ["v1", "clusters"] => self.clusters(params),
            ["v1", "stats"] => ApiResponse::ok(json!({
                "tool_version": self.manifest.tool_version,
                "seed": self.manifest.seed,
                "num_topics": self.index.num_topics,
                "num_classes": self.analysis.class_topic.classes.len(),
                "use_cases": self.stats.rows,
            })),
            _ => ApiResponse::error(404, format!("no route for {path}")),
        }
    }

    fn topics(&self) -> ApiResponse {
        let topics: Vec<Value> = self
            .index
            .topic_words
            .iter()
            .enumerate()
            .map(|(t, words)| {
                json!({
                    "topic": t,
                    "words": words,
                    "categories": self.analysis.categories.memberships.get(t),
                })
            })
            .collect();
        ApiResponse::ok(json!({ "topics": topics }))
    }

    fn limit(params: &HashMap<String, String>) -> std::result::Result<Option<usize>, ApiResponse> {
        match params.get("limit") {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ApiResponse::error(400, format!("bad limit `{v}`"))),
        }
    }

    fn query(&self, params: &HashMap<String, String>) -> ApiResponse {
        let limit = match Self::limit(params) {
            Ok(l) => l,
            Err(resp) => return resp,
        };
        let q = params.get("q").map(String::as_str).unwrap_or("");
        match self.index.query(q, limit) {
            Ok(result) => ApiResponse::ok(json!(result)),
            Err(Error::EmptyQuery) => ApiResponse::error(400, "query has no searchable terms"),
            Err(e) => ApiResponse::error(500, e.to_string()),
        }
    }

    fn detail(&self, id: &str, params: &HashMap<String, String>) -> ApiResponse {
        let Ok(topic) = id.parse::<usize>() else {
            return ApiResponse::error(400, format!("bad topic id `{id}`"));
        };
        let limit = match Self::limit(params) {
            Ok(l) => l,
            Err(resp) => return resp,
        };
        match self.index.drill_down(topic, limit) {
            Ok(detail) => ApiResponse::ok(json!(detail)),
            Err(e) => ApiResponse::error(404, e.to_string()),
        }
    }

    fn clusters(&self, params: &HashMap<String, String>) -> ApiResponse {
        let lambda = match params.get("lambda") {
            None => self.analysis.clusters.lambda,
            Some(v) => match v.parse::<f64>() {
                Ok(l) => l,
                Err(_) => return ApiResponse::error(400, format!("bad lambda `{v}`")),
            },
        };
        match self.analysis.clustering.cut(lambda) {
            Ok(partition) => ApiResponse::ok(json!(partition)),
            Err(e) => ApiResponse::error(400, e.to_string()),
        }
    }
}

struct AppState {
    service: ArtifactService,
    ui_dir: Option<PathBuf>,
}

async fn dispatch(
    State(state): State<Arc<AppState>>,
    uri: Uri,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    let path = uri.path();
    if path == "/v1" || path.starts_with("/v1/") {
        let resp = state.service.handle(path, &params);
        let status = StatusCode::from_u16(resp.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        return (status, Json(resp.body)).into_response();
    }
    match &state.ui_dir {
        Some(dir) => static_file(dir, path),
        None => (StatusCode::NOT_FOUND, "not found").into_response(),
    }
}

fn static_file(dir: &Path, path: &str) -> Response {
    let rel = Path::new(path.trim_start_matches('/'));
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return (StatusCode::BAD_REQUEST, "bad path").into_response();
    }
    let mut file = dir.join(rel);
    if path == "/" || file.is_dir() {
        file = file.join("index.html");
    }
    let mime = match file.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        _ => "application/octet-stream",
    };
    match std::fs::read(&file) {
        Ok(bytes) => ([(header::CONTENT_TYPE, mime)], bytes).into_response(),
        Err(_) => (StatusCode::NOT_FOUND, "not found").into_response(),
    }
}

pub fn router(service: ArtifactService, ui_dir: Option<PathBuf>) -> Router {
    Router::new()
        .fallback(dispatch)
        .with_state(Arc::new(AppState { service, ui_dir }))
}

/// Serves a run directory until the process is stopped.
pub async fn serve(dir: &Path, addr: SocketAddr, ui_dir: Option<PathBuf>) -> Result<()> {
    let service = ArtifactService::open(dir)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(dir, e))?;
    log::info!("serving {} on http://{}", dir.display(), addr);
    axum::serve(listener, router(service, ui_dir))
        .await
        .map_err(|e| Error::io(dir, e))
}
