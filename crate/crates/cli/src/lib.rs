//! HTTP service and corpus handling shared by the `courseqa` binary.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use anyhow::{Context, Result};
use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use courseqa_core::app::Pipeline;
use courseqa_core::kb::{load_corpus, load_corpus_str, Graph, LoadReport, DEMO_CORPUS};

/// Where the knowledge base comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusSource {
    /// The demo corpus compiled into the binary.
    Bundled,
    File(PathBuf),
}

impl CorpusSource {
    pub fn from_arg(path: Option<&Path>) -> Self {
        path.map_or(CorpusSource::Bundled, |p| CorpusSource::File(p.to_owned()))
    }

    pub fn load(&self) -> Result<LoadReport> {
        match self {
            CorpusSource::Bundled => Ok(load_corpus_str(DEMO_CORPUS)),
            CorpusSource::File(p) => {
                load_corpus(p).with_context(|| format!("loading {}", p.display()))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CorpusSource::Bundled => "bundled demo corpus".to_owned(),
            CorpusSource::File(p) => p.display().to_string(),
        }
    }
}

/// Graph snapshot plus pipeline; requests read a snapshot, reloads swap it.
pub struct AppState {
    pub pipeline: Pipeline,
    pub source: CorpusSource,
    graph: RwLock<Arc<Graph>>,
}

impl AppState {
    pub fn new(pipeline: Pipeline, source: CorpusSource, graph: Graph) -> Self {
        AppState {
            pipeline,
            source,
            graph: RwLock::new(Arc::new(graph)),
        }
    }

    pub fn snapshot(&self) -> Arc<Graph> {
        Arc::clone(&self.graph.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Loads the corpus again and swaps it in; the old graph keeps serving until then.
    pub fn reload(&self) -> Result<LoadReport> {
        let report = self.source.load()?;
        let fresh = Arc::new(report.graph.clone());
        *self.graph.write().unwrap_or_else(|e| e.into_inner()) = fresh;
        Ok(report)
    }
}

#[derive(Debug, Deserialize)]
pub struct AskRequest {
    pub question: String,
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    courses: usize,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn ask(
    State(state): State<Arc<AppState>>,
    body: Result<Json<AskRequest>, JsonRejection>,
) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.body_text()),
    };
    if req.question.trim().is_empty() {
        return error(StatusCode::BAD_REQUEST, "empty question");
    }
    let graph = state.snapshot();
    let report = state.pipeline.answer(&req.question, &graph);
    log::info!(
        "ask {:?} -> {} in {:.3} ms",
        req.question,
        report.status.as_str(),
        report.elapsed_ms
    );
    Json(report).into_response()
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health {
        status: "up",
        courses: state.snapshot().stats().courses,
    })
}

async fn stats(State(state): State<Arc<AppState>>) -> Response {
    Json(state.snapshot().stats()).into_response()
}

/// The `/api` routes, plus static files from `static_dir` for everything else.
pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/ask", post(ask))
        .route("/api/health", get(health))
        .route("/api/stats", get(stats))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}
