//! JSON API over a trained model. State is loaded once and never mutated.

use crate::commands::{load_schema, Context, AUDIT_FILE, CV_FILE, METRICS_FILE};
use crate::error::CliError;
use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use drugshap_core::clinical::{
    build_prompt, classify_response, ApiKey, AuditSink, ClinicalReport, JsonlAuditSink, LlmClient, LlmClientConfig,
    Provenance, ResponseClass,
};
use drugshap_core::dataset::{ColumnKind, DatasetError, ImputedValue, RawValue};
use drugshap_core::explain::{tree_shap, waterfall, ExplanationRecord, ShapExplanation, Waterfall};
use drugshap_core::persist::{load_artifact, load_model, sha256_hex};
use drugshap_core::{EncodingSchema, GbdtModel};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// Everything a request handler reads.
pub struct AppState {
    pub model: GbdtModel,
    pub model_sha256: String,
    pub schema: EncodingSchema,
    pub resistance_threshold: f64,
    pub top_k: usize,
    /// Last training and cross-validation results, as written by the CLI.
    pub metrics: Value,
    pub llm: LlmClientConfig,
    pub api_key: Option<ApiKey>,
    pub audit: Arc<dyn AuditSink>,
}

impl AppState {
    /// Load model, schema and metrics artifacts named by the configuration.
    /// The API key is optional; without it summaries report as unavailable.
    pub fn from_context(ctx: &Context) -> Result<Self, CliError> {
        let c = &ctx.config;
        let loaded = load_model(&c.model_path)
            .map_err(|e| CliError::new("artifact", format!("{}: {e}", c.model_path.display())))?;
        let schema = load_schema(ctx)?;
        if schema.feature_names() != loaded.model.feature_names {
            return Err(CliError::new("artifact", "schema and model feature names differ"));
        }
        std::fs::create_dir_all(&c.artifacts_dir)?;
        let metrics = json!({
            "training": read_optional(&ctx.artifact(METRICS_FILE), "training_metrics")?,
            "cross_validation": read_optional(&ctx.artifact(CV_FILE), "cv_report")?
                .map(|mut v| { if let Some(o) = v.as_object_mut() { o.remove("fold_assignments"); } v }),
        });
        Ok(Self {
            model: loaded.model,
            model_sha256: loaded.file_sha256,
            schema,
            resistance_threshold: c.resistance_threshold,
            top_k: c.top_k,
            metrics,
            llm: c.llm.clone(),
            api_key: ApiKey::from_env(&c.llm.api_key_env).ok(),
            audit: Arc::new(JsonlAuditSink::open(ctx.artifact(AUDIT_FILE))?),
        })
    }
}

fn read_optional(path: &Path, kind: &str) -> Result<Option<Value>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(load_artifact::<Value>(kind, path)?.data))
}

/// Error body `{code, message}` with its HTTP status.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "code": self.code, "message": self.message }))).into_response()
    }
}

impl From<DatasetError> for ApiError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::UnknownColumn(_) => ApiError::new(StatusCode::BAD_REQUEST, "unknown_column", e.to_string()),
            DatasetError::InvalidValue { .. } => ApiError::new(StatusCode::BAD_REQUEST, "invalid_value", e.to_string()),
            DatasetError::SchemaMismatch { column, .. } => ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "schema_violation",
                format!("missing value for column {column}"),
            ),
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "schema_violation", other.to_string()),
        }
    }
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
}

/// Raw (pre-encoding) feature assignment keyed by column name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    #[serde(default)]
    pub request_id: Option<String>,
    pub features: BTreeMap<String, RawValue>,
    /// Ask `/report` for an LLM summary.
    #[serde(default)]
    pub summarize: bool,
}

impl PredictRequest {
    /// The caller's id, or one derived from the features so that identical
    /// requests get identical ids.
    pub fn resolved_id(&self) -> String {
        self.request_id.clone().unwrap_or_else(|| {
            let digest = sha256_hex(&serde_json::to_vec(&self.features).expect("features serialize"));
            format!("req-{}", &digest[..16])
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplanationPayload {
    #[serde(flatten)]
    pub record: ExplanationRecord,
    pub waterfall: Waterfall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryStatus {
    NotRequested,
    Ok,
    Unavailable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictResponse {
    pub request_id: String,
    pub predicted_ln_ic50: f64,
    pub response: ResponseClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<ExplanationPayload>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportResponse {
    pub request_id: String,
    #[serde(flatten)]
    pub report: ClinicalReport,
    pub summary_status: SummaryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_error: Option<String>,
}

struct Scored {
    id: String,
    row: Vec<f64>,
    explanation: ShapExplanation,
    response: ResponseClass,
}

fn parse(body: &Bytes) -> Result<PredictRequest, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", e.to_string()))
}

fn score(state: &AppState, req: &PredictRequest) -> Result<Scored, ApiError> {
    let row = state.schema.encode_assignment(&req.features)?;
    let explanation = tree_shap(&state.model, &row).map_err(internal)?;
    let response = classify_response(explanation.prediction, state.resistance_threshold).map_err(internal)?;
    Ok(Scored { id: req.resolved_id(), row, explanation, response })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/schema", get(schema))
        .route("/metrics", get(metrics))
        .route("/predict", post(predict))
        .route("/explain", post(explain))
        .route("/report", post(report))
        .with_state(state)
}

/// `router` plus the web bundle served under `/` when `static_dir` is set.
pub fn app(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let r = router(state);
    match static_dir {
        Some(dir) => r.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => r,
    }
}

async fn schema(State(state): State<Arc<AppState>>) -> Json<Value> {
    let s = &state.schema;
    let columns: Vec<Value> = s
        .feature_columns()
        .into_iter()
        .map(|c| {
            let default = match s.imputation_values.get(&c) {
                Some(ImputedValue::Text(t)) => json!(t),
                Some(ImputedValue::Real(v)) => json!(v),
                None => Value::Null,
            };
            match s.categorical_levels.get(&c) {
                Some(levels) => json!({ "name": c.key(), "kind": "categorical", "levels": levels, "default": default }),
                None => json!({
                    "name": c.key(),
                    "kind": if c.kind() == ColumnKind::Numeric { "numeric" } else { "categorical" },
                    "default": default,
                }),
            }
        })
        .collect();
    Json(json!({
        "columns": columns,
        "feature_names": s.feature_names(),
        "target": s.target_column.key(),
        "resistance_threshold": state.resistance_threshold,
        "top_k": state.top_k,
        "model_sha256": state.model_sha256,
    }))
}

async fn metrics(State(state): State<Arc<AppState>>) -> Json<Value> {
    Json(state.metrics.clone())
}

async fn predict(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<PredictResponse>, ApiError> {
    let req = parse(&body)?;
    let s = score(&state, &req)?;
    Ok(Json(PredictResponse {
        request_id: s.id,
        predicted_ln_ic50: s.explanation.prediction,
        response: s.response,
        explanation: None,
    }))
}

async fn explain(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<PredictResponse>, ApiError> {
    let req = parse(&body)?;
    let s = score(&state, &req)?;
    let names = &state.model.feature_names;
    let payload = ExplanationPayload {
        record: ExplanationRecord::new(&s.explanation, names, &s.row),
        waterfall: waterfall(&s.explanation, names, &s.row),
    };
    Ok(Json(PredictResponse {
        request_id: s.id,
        predicted_ln_ic50: s.explanation.prediction,
        response: s.response,
        explanation: Some(payload),
    }))
}

/// A failed summary answers 502 but still carries the full report body.
async fn report(State(state): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<ReportResponse>), ApiError> {
    let req = parse(&body)?;
    let s = score(&state, &req)?;
    let drug = match req.features.get("DRUG_NAME") {
        Some(RawValue::Text(t)) => t.clone(),
        Some(RawValue::Number(v)) => v.to_string(),
        None => String::new(),
    };
    let mut report = ClinicalReport::from_explanation(
        &drug,
        &s.explanation,
        &state.model.feature_names,
        state.resistance_threshold,
        state.top_k,
        Provenance::now(state.model_sha256.clone()),
    )
    .map_err(internal)?;
    let (summary_status, summary_error) = if !req.summarize {
        (SummaryStatus::NotRequested, None)
    } else {
        match summarize(&state, &report).await {
            Ok(text) => {
                report.summary_text = Some(text);
                (SummaryStatus::Ok, None)
            }
            Err(e) => {
                log::warn!("summary unavailable for {}: {e}", s.id);
                (SummaryStatus::Unavailable, Some(e))
            }
        }
    };
    let status = match summary_status {
        SummaryStatus::Unavailable => StatusCode::BAD_GATEWAY,
        _ => StatusCode::OK,
    };
    Ok((status, Json(ReportResponse { request_id: s.id, report, summary_status, summary_error })))
}

async fn summarize(state: &Arc<AppState>, report: &ClinicalReport) -> Result<String, String> {
    let prompt = build_prompt(report).map_err(|e| e.to_string())?;
    let key = state
        .api_key
        .clone()
        .ok_or_else(|| format!("environment variable {} is not set", state.llm.api_key_env))?;
    let client = LlmClient::new(state.llm.clone(), key, Arc::clone(&state.audit)).map_err(|e| e.to_string())?;
    tokio::task::spawn_blocking(move || client.summarize(&prompt))
        .await
        .map_err(|e| e.to_string())?
        .map(|r| r.text)
        .map_err(|e| e.to_string())
}

/// Bind and serve until Ctrl-C.
pub async fn serve(state: Arc<AppState>, bind: &str, port: u16, static_dir: Option<&Path>) -> Result<(), CliError> {
    let listener = tokio::net::TcpListener::bind((bind, port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
