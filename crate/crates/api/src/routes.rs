use std::collections::HashMap;

use axum::extract::{Path, Query, State};
use axum::http::{Method, Uri};
use axum::routing::get;
use axum::{Json, Router};
use dao_portal_core::catalog::MetricRun;
use dao_portal_core::payload::{ApiPayload, DaoId, RunId};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::state::AppState;

pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 200;
pub const MAX_MULTI_IDS: usize = 200;

pub fn routes() -> Router<AppState> {
    Router::new()
        .route("/api/v1/daos", get(list_daos))
        .route("/api/v1/daos/metrics/multi", get(multi_metrics))
        .route("/api/v1/daos/{id}/enhanced_metrics", get(enhanced_metrics))
        .route("/api/v1/daos/{id}/runs", get(list_runs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaoSummary {
    pub dao_id: DaoId,
    pub dao_name: String,
    pub chain_id: u64,
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageEnvelope {
    pub items: Vec<DaoSummary>,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: RunId,
    pub created_at: String,
    pub source_path: String,
    pub content_digest: String,
}

impl From<&MetricRun> for RunSummary {
    fn from(r: &MetricRun) -> Self {
        Self {
            run_id: r.run_id,
            created_at: r.created_at.clone(),
            source_path: r.source_path.clone(),
            content_digest: r.content_digest.clone(),
        }
    }
}

/// One entry of a multi response: the payload, or a marker for an id the
/// catalog does not know.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MultiItem {
    Found(Box<ApiPayload>),
    Missing { dao_id: u64, error: String },
}

type Params = Query<HashMap<String, String>>;

fn parse_u64(name: &'static str, raw: &str) -> Result<u64, ApiError> {
    raw.trim().parse().map_err(|_| ApiError::invalid(name, format!("`{raw}` is not a non-negative integer")))
}

fn ranged(params: &HashMap<String, String>, name: &'static str, default: usize, max: usize) -> Result<usize, ApiError> {
    let Some(raw) = params.get(name) else { return Ok(default) };
    let v = parse_u64(name, raw)?;
    if v < 1 || v > max as u64 {
        return Err(ApiError::invalid(name, format!("must be between 1 and {max}, got {v}")));
    }
    Ok(v as usize)
}

fn dao_id(raw: &str) -> Result<DaoId, ApiError> {
    raw.parse().map(DaoId).map_err(|_| ApiError::UnknownDao(raw.to_string()))
}

async fn list_daos(State(state): State<AppState>, Query(params): Params) -> Result<Json<PageEnvelope>, ApiError> {
    let page = ranged(&params, "page", 1, usize::MAX)?;
    let page_size = ranged(&params, "page_size", DEFAULT_PAGE_SIZE, MAX_PAGE_SIZE)?;
    let view = state.view();
    let served: Vec<_> = view.daos().filter_map(|d| view.latest_run(d.dao_id).map(|run| (d, run))).collect();
    let items = served
        .iter()
        .skip((page - 1).saturating_mul(page_size))
        .take(page_size)
        .map(|(d, run)| DaoSummary {
            dao_id: d.dao_id,
            dao_name: d.dao_name.clone(),
            chain_id: d.chain_id,
            timestamp: run.timestamp.clone(),
        })
        .collect();
    Ok(Json(PageEnvelope { items, total: served.len(), page, page_size }))
}

async fn enhanced_metrics(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Params,
) -> Result<Json<ApiPayload>, ApiError> {
    let id = dao_id(&id)?;
    let run_id = params.get("run_id").map(|r| parse_u64("run_id", r).map(RunId)).transpose()?;
    Ok(Json(state.view().payload(id, run_id)?))
}

async fn multi_metrics(State(state): State<AppState>, Query(params): Params) -> Result<Json<Vec<MultiItem>>, ApiError> {
    let raw = params.get("dao_ids").ok_or_else(|| ApiError::invalid("dao_ids", "is required"))?;
    let ids = raw.split(',').map(|s| parse_u64("dao_ids", s)).collect::<Result<Vec<_>, _>>()?;
    if ids.len() > MAX_MULTI_IDS {
        return Err(ApiError::invalid(
            "dao_ids",
            format!("at most {MAX_MULTI_IDS} ids per request, got {}", ids.len()),
        ));
    }
    let view = state.view();
    let items = ids
        .into_iter()
        .map(|id| match view.payload(DaoId(id), None) {
            Ok(p) => MultiItem::Found(Box::new(p)),
            Err(_) => MultiItem::Missing { dao_id: id, error: "unknown".into() },
        })
        .collect();
    Ok(Json(items))
}

async fn list_runs(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Vec<RunSummary>>, ApiError> {
    let id = dao_id(&id)?;
    let view = state.view();
    let runs = view.runs(id).filter(|r| !r.is_empty()).ok_or_else(|| ApiError::UnknownDao(id.to_string()))?;
    Ok(Json(runs.into_iter().map(RunSummary::from).collect()))
}

pub async fn not_found(uri: Uri) -> ApiError {
    ApiError::NotFound(uri.path().to_string())
}

pub async fn method_not_allowed(method: Method) -> ApiError {
    ApiError::MethodNotAllowed(method.to_string())
}
