//! Prediction API over a trained model.
//!
//! * `POST /api/predict` takes `{"grid": ["DRE", ...]}` and returns one entry
//!   per EVSE with predicted `tau_kw`, `p_tot_kwh` and a `reachable` flag.
//! * `GET /api/health` answers 503 until the model is loaded, then 200 with
//!   its `model_id` and window size `m`.
//!
//! The model is loaded once and shared read-only between handlers.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use evsim::mlp::{load_model, MlpModel};
use evsim::predict::{predict_layout, PredictRequest};
use evsim::Layout;
use serde::Serialize;
use serde_json::json;
use tower_http::cors::CorsLayer;

/// Shared handle to the model, empty until loading finishes.
#[derive(Clone, Default)]
pub struct AppState {
    model: Arc<OnceLock<Arc<MlpModel>>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_model(model: MlpModel) -> Self {
        let state = Self::default();
        state.set_model(model);
        state
    }

    /// Installs the model; later calls are ignored.
    pub fn set_model(&self, model: MlpModel) {
        let _ = self.model.set(Arc::new(model));
    }

    pub fn model(&self) -> Option<Arc<MlpModel>> {
        self.model.get().cloned()
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: msg.into() })).into_response()
}

async fn health(State(state): State<AppState>) -> Response {
    match state.model() {
        Some(m) => Json(json!({
            "status": "ok",
            "model_id": m.config.model_id,
            "m": m.config.features.m,
        }))
        .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "loading" })),
        )
            .into_response(),
    }
}

async fn predict(
    State(state): State<AppState>,
    body: Result<Json<PredictRequest>, JsonRejection>,
) -> Response {
    let Some(model) = state.model() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "model not loaded");
    };
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.body_text()),
    };
    let layout = match Layout::from_rows(&req.grid) {
        Ok(l) => l,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    match predict_layout(&model, &layout) {
        Ok(resp) => Json(resp).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/predict", post(predict))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Loads the model on a blocking thread and installs it into `state`.
pub fn spawn_model_load(
    path: PathBuf,
    state: AppState,
) -> tokio::task::JoinHandle<evsim::Result<()>> {
    tokio::task::spawn_blocking(move || {
        let model = load_model(&path)?;
        tracing::info!(
            model_id = model.config.model_id,
            path = %path.display(),
            "model loaded"
        );
        state.set_model(model);
        Ok(())
    })
}

/// Serves until Ctrl-C. The socket is bound before the model finishes
/// loading, so health checks see 503 in the meantime.
pub async fn serve(addr: SocketAddr, model_path: PathBuf) -> std::io::Result<()> {
    let state = AppState::new();
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let loader = spawn_model_load(model_path, state.clone());
    tokio::spawn(async move {
        match loader.await {
            Ok(Ok(())) => {}
            Ok(Err(e)) => tracing::error!("model load failed: {e}"),
            Err(e) => tracing::error!("model loader panicked: {e}"),
        }
    });
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
