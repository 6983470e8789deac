//! HTTP reward service.
//!
//! | Route                | Body                     | Reply                          |
//! |----------------------|--------------------------|--------------------------------|
//! | `POST /verify`       | [`VerifyRequest`]        | [`VerifyResponse`]             |
//! | `POST /verify_batch` | array of `VerifyRequest` | array of [`BatchItem`]         |
//! | `GET /health`        |                          | [`Health`]                     |
//!
//! An unparseable candidate is a normal outcome (200, reward -1). Transport
//! errors are 400 for a malformed body, 404 for an unknown `task_id`, 422 for
//! an inline task that fails validation, 413 for an oversized batch and 503
//! when `max_in_flight` evaluations are already running.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use qverify_core::dataset::{validate_record, TaskRecord};
use qverify_core::hamiltonian::{HamiltonianWire, IsingHamiltonian};
use qverify_core::reward::{hierarchical_reward_with, Clock, RewardBreakdown, RewardConfig, Stage, Task};
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::config::{config_digest, Config};

/// Wall-clock milliseconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock(Instant);

impl StdClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for StdClock {
    fn now_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

/// Scores `qasm` with real timings, stopping the optimizer after `timeout`.
pub fn evaluate(qasm: &str, task: &Task, config: &RewardConfig, timeout: Duration) -> RewardBreakdown {
    let clock = StdClock::start();
    let deadline = Instant::now() + timeout;
    hierarchical_reward_with(qasm, task, config, &clock, &mut || Instant::now() >= deadline)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineTask {
    pub hamiltonian: HamiltonianWire,
    pub qasm_gt: String,
    pub e_min: f64,
    pub e_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRequest {
    pub qasm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<InlineTask>,
    /// Partial reward config merged over the server's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResponse {
    pub reward: f64,
    pub valid: bool,
    pub errors: Vec<String>,
    pub trace: Vec<Stage>,
    pub timing_ms: BTreeMap<Stage, f64>,
    pub config_digest: String,
    pub breakdown: RewardBreakdown,
}

impl VerifyResponse {
    pub fn new(breakdown: RewardBreakdown, config_digest: String) -> Self {
        Self {
            reward: breakdown.total,
            valid: breakdown.syntax_ok,
            errors: breakdown.errors.clone(),
            trace: breakdown.stages_run.clone(),
            timing_ms: breakdown.timing_ms.clone(),
            config_digest,
            breakdown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchItem {
    pub status: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<VerifyResponse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub dataset_size: usize,
    pub config_digest: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("dataset record {id}: {message}")]
    Record { id: String, message: String },
    #[error("duplicate task id {0}")]
    Duplicate(String),
}

/// Immutable after startup; shared by every request.
#[derive(Debug)]
pub struct AppState {
    tasks: HashMap<String, Arc<Task>>,
    reward: RewardConfig,
    digest: String,
    max_batch: usize,
    timeout: Duration,
    permits: Arc<Semaphore>,
}

impl AppState {
    /// Validates every record; any failure refuses startup.
    pub fn new(records: &[TaskRecord], config: &Config) -> Result<Self, ServerError> {
        let mut tasks = HashMap::with_capacity(records.len());
        for r in records {
            let task = validate_record(r, config.dataset.f_threshold).map_err(|e| ServerError::Record {
                id: r.id.clone(),
                message: e.to_string(),
            })?;
            if tasks.insert(r.id.clone(), Arc::new(task)).is_some() {
                return Err(ServerError::Duplicate(r.id.clone()));
            }
        }
        Ok(Self {
            tasks,
            reward: config.reward,
            digest: config_digest(&config.reward),
            max_batch: config.server.max_batch,
            timeout: Duration::from_millis(config.server.request_timeout_ms),
            permits: Arc::new(Semaphore::new(config.server.max_in_flight.max(1))),
        })
    }

    pub fn dataset_size(&self) -> usize {
        self.tasks.len()
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }
}

pub type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/verify", post(verify))
        .route("/verify_batch", post(verify_batch))
        .route("/health", get(health))
        .with_state(state)
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

/// Merges `overrides` into `base` key by key, recursing into tables.
fn merge(base: &mut serde_json::Value, overrides: &serde_json::Value) {
    match (base, overrides) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, o) => *b = o.clone(),
    }
}

/// The server config with request overrides applied. Overrides may lower but
/// never raise the qubit cap or the step budget.
fn effective_config(state: &AppState, overrides: Option<&serde_json::Value>) -> Result<RewardConfig, ApiError> {
    let Some(o) = overrides else {
        return Ok(state.reward);
    };
    if !o.is_object() {
        return Err(bad_request("config overrides must be an object"));
    }
    let mut base = serde_json::to_value(state.reward).expect("config serializes");
    merge(&mut base, o);
    let mut cfg: RewardConfig =
        serde_json::from_value(base).map_err(|e| bad_request(format!("invalid config override: {e}")))?;
    cfg.max_qubits = cfg.max_qubits.min(state.reward.max_qubits);
    cfg.optimizer.max_steps = cfg.optimizer.max_steps.min(state.reward.optimizer.max_steps);
    Ok(cfg)
}

fn resolve(state: &AppState, req: &VerifyRequest) -> Result<(Arc<Task>, RewardConfig), ApiError> {
    let task = match (&req.task_id, &req.task) {
        (Some(id), None) => state
            .tasks
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown task_id `{id}`")))?,
        (None, Some(t)) => {
            let unprocessable = |e: String| ApiError(StatusCode::UNPROCESSABLE_ENTITY, format!("invalid inline task: {e}"));
            let h = IsingHamiltonian::try_from(t.hamiltonian.clone()).map_err(|e| unprocessable(e.to_string()))?;
            Arc::new(Task::from_qasm(h, &t.qasm_gt, t.e_min, t.e_max).map_err(|e| unprocessable(e.to_string()))?)
        }
        _ => return Err(bad_request("exactly one of `task_id` and `task` is required")),
    };
    Ok((task, effective_config(state, req.config.as_ref())?))
}

async fn run_one(state: Shared, req: VerifyRequest) -> Result<VerifyResponse, ApiError> {
    let (task, cfg) = resolve(&state, &req)?;
    let timeout = state.timeout;
    let breakdown = tokio::task::spawn_blocking(move || evaluate(&req.qasm, &task, &cfg, timeout))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("evaluation failed: {e}")))?;
    Ok(VerifyResponse::new(breakdown, config_digest(&cfg)))
}

fn admit(state: &AppState) -> Result<tokio::sync::OwnedSemaphorePermit, ApiError> {
    state
        .permits
        .clone()
        .try_acquire_owned()
        .map_err(|_| ApiError(StatusCode::SERVICE_UNAVAILABLE, "server at capacity".into()))
}

async fn verify(State(state): State<Shared>, body: Bytes) -> Result<Json<VerifyResponse>, ApiError> {
    let req: VerifyRequest =
        serde_json::from_slice(&body).map_err(|e| bad_request(format!("malformed request: {e}")))?;
    let _permit = admit(&state)?;
    Ok(Json(run_one(state.clone(), req).await?))
}

async fn verify_batch(State(state): State<Shared>, body: Bytes) -> Result<Json<Vec<BatchItem>>, ApiError> {
    let items: Vec<serde_json::Value> =
        serde_json::from_slice(&body).map_err(|e| bad_request(format!("malformed batch: {e}")))?;
    if items.len() > state.max_batch {
        return Err(ApiError(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("batch of {} exceeds the maximum {}", items.len(), state.max_batch),
        ));
    }
    let _permit = admit(&state)?;
    let handles: Vec<_> = items
        .into_iter()
        .map(|v| {
            let state = state.clone();
            tokio::spawn(async move {
                let req: VerifyRequest =
                    serde_json::from_value(v).map_err(|e| bad_request(format!("malformed request: {e}")))?;
                run_one(state, req).await
            })
        })
        .collect();
    let mut out = Vec::with_capacity(handles.len());
    for h in handles {
        out.push(match h.await {
            Ok(Ok(resp)) => BatchItem {
                status: 200,
                result: Some(resp),
                error: None,
            },
            Ok(Err(ApiError(code, msg))) => BatchItem {
                status: code.as_u16(),
                result: None,
                error: Some(msg),
            },
            Err(e) => BatchItem {
                status: 500,
                result: None,
                error: Some(e.to_string()),
            },
        });
    }
    Ok(Json(out))
}

async fn health(State(state): State<Shared>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        dataset_size: state.dataset_size(),
        config_digest: state.digest.clone(),
    })
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve<F>(listener: tokio::net::TcpListener, state: Shared, shutdown: F) -> std::io::Result<()>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
