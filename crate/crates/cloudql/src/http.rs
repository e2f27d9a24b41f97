//! Local HTTP front end: the same pipeline as the CLI behind a small JSON
//! API.
//!
//! Queries run against an immutable pipeline snapshot behind an `Arc`, so
//! any number may run concurrently. Ingestion builds a new snapshot off to
//! the side under a writer mutex and swaps it in atomically; readers always
//! see either the old graph or the new one, never a partial state.
//!
//! Routes:
//! - `GET  /healthz`          — liveness plus graph counters
//! - `POST /query`            — `{"text": "..."}` or `{"ir": "..."}`
//! - `POST /ingest`           — corpus JSONL in the request body

use crate::answer::render_json;
use crate::nlq::CompileError;
use crate::pipeline::{AskError, Pipeline};
use axum::body::Body;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use std::sync::Arc;
use tokio::sync::{Mutex, RwLock};

pub struct ServeState {
    current: RwLock<Arc<Pipeline>>,
    writer: Mutex<()>,
}

impl ServeState {
    pub fn new(pipeline: Pipeline) -> Arc<ServeState> {
        Arc::new(ServeState {
            current: RwLock::new(Arc::new(pipeline)),
            writer: Mutex::new(()),
        })
    }

    async fn snapshot(&self) -> Arc<Pipeline> {
        self.current.read().await.clone()
    }
}

pub fn router(state: Arc<ServeState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/query", post(query))
        .route("/ingest", post(ingest))
        .with_state(state)
}

/// Binds and serves until the process is stopped.
pub async fn serve(state: Arc<ServeState>, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn healthz(State(state): State<Arc<ServeState>>) -> impl IntoResponse {
    let pipeline = state.snapshot().await;
    Json(json!({
        "status": "ok",
        "nodes": pipeline.graph().node_count(),
        "edges": pipeline.graph().edge_count(),
        "version": pipeline.graph().version(),
        "indexed": pipeline.has_index(),
    }))
}

#[derive(Debug, Deserialize)]
struct QueryRequest {
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    ir: Option<String>,
}

fn json_response(status: StatusCode, body: String) -> Response {
    Response::builder()
        .status(status)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body))
        .expect("response builds")
}

async fn query(
    State(state): State<Arc<ServeState>>,
    Json(request): Json<QueryRequest>,
) -> Response {
    let pipeline = state.snapshot().await;
    let asked = match (&request.text, &request.ir) {
        (Some(text), None) => pipeline.ask(text),
        (None, Some(ir)) => pipeline.ask_ir(ir),
        _ => {
            return json_response(
                StatusCode::BAD_REQUEST,
                json!({"error": "provide exactly one of \"text\" or \"ir\""}).to_string(),
            )
        }
    };
    match asked {
        // Identical bytes to the CLI's --format json output.
        Ok(asked) => json_response(StatusCode::OK, render_json(&asked.answer)),
        Err(AskError::Compile(CompileError::UncompilableIntent(residual))) => json_response(
            StatusCode::BAD_REQUEST,
            json!({
                "error": "could not compile the query to a graph pattern",
                "residual_terms": residual,
            })
            .to_string(),
        ),
        Err(e @ (AskError::Parse(_) | AskError::Extract(_) | AskError::Compile(_))) => {
            json_response(
                StatusCode::BAD_REQUEST,
                json!({"error": e.to_string()}).to_string(),
            )
        }
        Err(e) => json_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({"error": e.to_string()}).to_string(),
        ),
    }
}

async fn ingest(State(state): State<Arc<ServeState>>, body: String) -> Response {
    // Serialize writers; build the successor snapshot without holding the
    // read path.
    let _writer = state.writer.lock().await;
    let mut next = (*state.snapshot().await).clone();
    let report = next.ingest_corpus_str(&body);
    let violations = next.graph().validate();
    if !violations.is_empty() {
        let rendered: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return json_response(
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({"error": "corpus broke graph invariants", "violations": rendered}).to_string(),
        );
    }
    *state.current.write().await = Arc::new(next);
    let pipeline = state.snapshot().await;
    json_response(
        StatusCode::OK,
        json!({
            "nodes_loaded": report.nodes_loaded,
            "edges_added": report.edges_added,
            "skipped": report.skipped.len(),
            "total_nodes": pipeline.graph().node_count(),
            "total_edges": pipeline.graph().edge_count(),
        })
        .to_string(),
    )
}
