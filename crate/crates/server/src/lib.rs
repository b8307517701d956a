//! HTTP JSON service over `edia-core`.
//!
//! Artifacts (embeddings, corpora, language models) and sessions live in
//! a data directory and are reloaded at startup. Ingest and training run
//! as background jobs; everything else answers synchronously. Every
//! response carries an `x-edia-version` header, and JSON bodies are
//! wrapped as `{"result", "provenance"}` or `{"error": {"code", "message"}}`.

pub mod api;
pub mod error;
pub mod extract;
pub mod jobs;
pub mod provenance;
pub mod registry;
pub mod routes;
pub mod session;
pub mod state;

use std::net::SocketAddr;
use std::path::PathBuf;

use axum::extract::{DefaultBodyLimit, Request};
use axum::http::{HeaderName, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;

pub use error::ApiError;
pub use provenance::{Envelope, Provenance};
pub use state::{AppState, Shared};

use routes::{analysis, artifacts, sessions};

pub const VERSION_HEADER: &str = "x-edia-version";
pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_BODY_LIMIT: usize = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub data_dir: PathBuf,
    pub port: u16,
    pub body_limit: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("edia-data"),
            port: DEFAULT_PORT,
            body_limit: DEFAULT_BODY_LIMIT,
        }
    }
}

impl ServerConfig {
    /// Defaults overridden by `EDIA_DATA_DIR` and `EDIA_PORT`.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Ok(dir) = std::env::var("EDIA_DATA_DIR") {
            cfg.data_dir = dir.into();
        }
        if let Some(port) = std::env::var("EDIA_PORT").ok().and_then(|p| p.parse().ok()) {
            cfg.port = port;
        }
        cfg
    }
}

async fn stamp_version(req: Request, next: Next) -> Response {
    let mut res = next.run(req).await;
    res.headers_mut().insert(
        HeaderName::from_static(VERSION_HEADER),
        HeaderValue::from_static(edia_core::VERSION),
    );
    res
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no_route", "no such endpoint")
}

async fn health() -> impl IntoResponse {
    Provenance::default().wrap(serde_json::json!({ "status": "ok" }))
}

pub fn router(state: Shared, body_limit: usize) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/embeddings", get(artifacts::list_embeddings))
        .route(
            "/embeddings/{id}",
            get(artifacts::get_embedding).put(artifacts::put_embedding),
        )
        .route("/corpora", get(artifacts::list_corpora))
        .route("/corpora/{id}", get(artifacts::get_corpus).put(artifacts::put_corpus))
        .route("/lms", get(artifacts::list_lms))
        .route("/lms/{id}", get(artifacts::get_lm))
        .route("/train/embedding", post(artifacts::train_embedding))
        .route("/train/lm", post(artifacts::train_lm))
        .route("/jobs/{id}", get(artifacts::get_job))
        .route("/data/frequency", get(analysis::frequency))
        .route("/data/concordance", get(analysis::concordance))
        .route("/explore/projection", post(analysis::projection))
        .route("/explore/neighbors", post(analysis::neighbors))
        .route("/bias/space", post(analysis::bias_space))
        .route("/bias/scores", post(analysis::bias_scores))
        .route("/bias/scores2d", post(analysis::bias_scores2d))
        .route("/bias/pairs", post(analysis::bias_pairs))
        .route("/bias/diagnostics", post(analysis::bias_diagnostics))
        .route("/bias/compare", post(analysis::bias_compare))
        .route("/sentences/blank", post(analysis::sentences_blank))
        .route("/sentences/pair", post(analysis::sentences_pair))
        .route("/sessions", get(sessions::list).post(sessions::create))
        .route(
            "/sessions/{id}",
            get(sessions::get).put(sessions::replace).delete(sessions::delete),
        )
        .route("/sessions/{id}/lists", get(sessions::lists))
        .route(
            "/sessions/{id}/lists/{name}",
            get(sessions::get_list)
                .put(sessions::put_list)
                .delete(sessions::delete_list),
        )
        .fallback(fallback)
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(middleware::from_fn(stamp_version))
        .with_state(state)
}

/// Binds `0.0.0.0:<port>` and serves until Ctrl-C.
pub async fn serve(cfg: ServerConfig) -> std::io::Result<()> {
    let state = AppState::open(&cfg.data_dir)?;
    let app = router(state, cfg.body_limit);
    let addr = SocketAddr::from(([0, 0, 0, 0], cfg.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!(
        "serving {} on http://{}",
        cfg.data_dir.display(),
        listener.local_addr()?
    );
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
