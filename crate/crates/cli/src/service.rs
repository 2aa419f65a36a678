//! HTTP retrieval endpoint.
//!
//! `GET /retrieve?q=..&walks=..&hops=..&topk=..&seed=..` answers with
//! `{"query": .., "results": [{"listing": .., "score": ..}]}`. Unset
//! parameters fall back to the server defaults.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use xwalk_core::{query_rng, retrieve, Graph, Params, WalkError};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub defaults: Params,
    pub base_seed: u64,
    pub max_walks: u64,
    pub timeout: Duration,
}

#[derive(Clone)]
struct AppState {
    graph: Arc<Graph>,
    config: Arc<ServiceConfig>,
}

#[derive(Debug, Deserialize)]
pub struct RetrieveQuery {
    pub q: String,
    pub walks: Option<u64>,
    pub hops: Option<u32>,
    pub topk: Option<usize>,
    pub seed: Option<u64>,
}

fn error(status: StatusCode, kind: &str, message: impl ToString) -> Response {
    (status, Json(json!({ "error": kind, "message": message.to_string() }))).into_response()
}

pub fn router(graph: Arc<Graph>, config: ServiceConfig) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/retrieve", get(retrieve_handler))
        .with_state(AppState { graph, config: Arc::new(config) })
}

async fn retrieve_handler(State(state): State<AppState>, Query(req): Query<RetrieveQuery>) -> Response {
    let config = &state.config;
    let params = Params {
        walks: req.walks.unwrap_or(config.defaults.walks),
        hops: req.hops.unwrap_or(config.defaults.hops),
        top_k: req.topk.unwrap_or(config.defaults.top_k),
        sampler: config.defaults.sampler,
    };
    if let Err(e) = params.validate() {
        return error(StatusCode::BAD_REQUEST, "bad_request", e);
    }
    if params.walks > config.max_walks {
        return error(
            StatusCode::BAD_REQUEST,
            "bad_request",
            format!("walks {} exceeds limit {}", params.walks, config.max_walks),
        );
    }
    let seed = req.seed.unwrap_or(config.base_seed);
    let graph = Arc::clone(&state.graph);
    let work = tokio::task::spawn_blocking(move || retrieve(&graph, &req.q, &params, &mut query_rng(seed, &req.q)));
    match tokio::time::timeout(config.timeout, work).await {
        Ok(Ok(Ok(result))) => Json(result).into_response(),
        Ok(Ok(Err(WalkError::NoSuchQuery(q)))) => {
            error(StatusCode::NOT_FOUND, "cold_start", format!("query not in graph: {q:?}"))
        }
        Ok(Ok(Err(e))) => error(StatusCode::BAD_REQUEST, "bad_request", e),
        Ok(Err(join)) => error(StatusCode::INTERNAL_SERVER_ERROR, "internal", join),
        // the blocking task runs to completion; only the response is dropped
        Err(_) => error(StatusCode::SERVICE_UNAVAILABLE, "timeout", "retrieval exceeded the time limit"),
    }
}

pub async fn serve(graph: Graph, config: ServiceConfig, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(graph), config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
