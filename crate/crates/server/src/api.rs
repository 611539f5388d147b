//! Request envelopes and endpoint handlers.

use crate::error::{json_response, ApiError};
use crate::AppState;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::Response;
use pbm_core::catalog::attribute_catalog;
use pbm_core::cohort::{apply_filters, case_details, Facet, FilterSpec, QueryError, SplitSpec};
use pbm_core::ingest::{list_procedures, CaseSet};
use pbm_core::model::{BloodComponent, CaseRecord};
use pbm_core::provenance::{share_url, WorkspaceState};
use pbm_core::stats::bins::BinSpec;
use pbm_core::stats::{dotplot, dumbbell, heatmap, DumbbellSort, HeatmapParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const DEFAULT_PAGE_SIZE: usize = 50;

/// Optional bin layout override. Unit components take only `cap`; cell
/// salvage takes `width` and `cap` in mL.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinRequest {
    pub width: Option<f64>,
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapRequest {
    #[serde(default)]
    pub filter: FilterSpec,
    pub facet: Facet,
    pub component: BloodComponent,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub context: Vec<String>,
    #[serde(default)]
    pub bins: Option<BinRequest>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumbbellRequest {
    #[serde(default)]
    pub filter: FilterSpec,
    pub facet: Facet,
    pub sort: DumbbellSort,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotplotRequest {
    #[serde(default)]
    pub filter: FilterSpec,
    pub facet: Facet,
    pub x_attr: String,
    pub y_attr: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasesRequest {
    #[serde(default)]
    pub filter: FilterSpec,
    #[serde(default)]
    pub page: usize,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
}

fn default_page_size() -> usize {
    DEFAULT_PAGE_SIZE
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CasesPage {
    /// Cases matching the filter, across all pages.
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub cases: Vec<CaseRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SavedState {
    pub id: String,
    pub view_url: String,
    pub edit_url: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetStatus {
    pub source: String,
    pub cases: usize,
    pub loaded_at: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Status {
    pub dataset: Option<DatasetStatus>,
    pub saved_states: usize,
}

#[derive(Debug, Deserialize)]
pub struct LoadParams {
    pub mode: Option<String>,
}

/// Parses a JSON body strictly; the error names the path of the first bad
/// field where serde can tell.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    let parsed: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let err = ApiError::bad_request(e.inner().to_string());
        if path == "." {
            err
        } else {
            err.with_field(path)
        }
    })?;
    Ok(parsed)
}

fn dataset(state: &AppState) -> Result<Arc<CaseSet>, ApiError> {
    state.dataset.clone().ok_or_else(ApiError::no_dataset)
}

fn ok<T: Serialize>(value: &T) -> Response {
    json_response(StatusCode::OK, value)
}

fn bin_spec(component: BloodComponent, req: &BinRequest) -> Result<BinSpec, QueryError> {
    let invalid = |e: pbm_core::stats::StatsError| QueryError::new("bins", e.to_string());
    if component.is_continuous() {
        BinSpec::continuous(
            req.width.unwrap_or(pbm_core::stats::bins::DEFAULT_SALVAGE_WIDTH_ML),
            req.cap.unwrap_or(pbm_core::stats::bins::DEFAULT_SALVAGE_CAP_ML),
        )
        .map_err(invalid)
    } else {
        if req.width.is_some_and(|w| w != 1.0) {
            return Err(QueryError::new("bins.width", "unit components always use width 1"));
        }
        let cap = req.cap.unwrap_or(pbm_core::stats::bins::DEFAULT_UNIT_CAP as f64);
        if cap.fract() != 0.0 || cap < 1.0 || cap > u32::MAX as f64 {
            return Err(QueryError::new("bins.cap", format!("unit cap must be a positive integer, got {cap}")));
        }
        BinSpec::discrete(component, cap as u32).map_err(invalid)
    }
}

pub async fn procedures(State(state): State<AppState>) -> Result<Response, ApiError> {
    let cs = dataset(&state)?;
    Ok(ok(&list_procedures(&cs)))
}

pub async fn query_heatmap(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: HeatmapRequest = parse_body(&body)?;
    let cs = dataset(&state)?;
    let sel = apply_filters(&cs, &req.filter)?;
    let bins = req.bins.as_ref().map(|b| bin_spec(req.component, b)).transpose()?;
    let params = HeatmapParams {
        facet: req.facet,
        split: req.split,
        component: req.component,
        context: req.context,
        bins,
    };
    Ok(ok(&heatmap(&sel, &params)?))
}

pub async fn query_dumbbell(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: DumbbellRequest = parse_body(&body)?;
    let cs = dataset(&state)?;
    let sel = apply_filters(&cs, &req.filter)?;
    Ok(ok(&dumbbell(&sel, req.facet, req.sort, &state.thresholds)))
}

pub async fn query_dotplot(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: DotplotRequest = parse_body(&body)?;
    let cs = dataset(&state)?;
    let sel = apply_filters(&cs, &req.filter)?;
    Ok(ok(&dotplot(&sel, req.facet, &req.x_attr, &req.y_attr)?))
}

pub async fn query_cases(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CasesRequest = parse_body(&body)?;
    let cs = dataset(&state)?;
    let sel = apply_filters(&cs, &req.filter)?;
    let cases = case_details(&sel, req.page, req.page_size)?;
    Ok(ok(&CasesPage {
        total: sel.len(),
        page: req.page,
        page_size: req.page_size,
        cases,
    }))
}

pub async fn save_state(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let ws: WorkspaceState = parse_body(&body)?;
    let store = state.store.clone();
    // fsync happens inside save; keep it off the async workers
    let id = tokio::task::spawn_blocking(move || store.save(&ws))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e.to_string()))??;
    Ok(json_response(
        StatusCode::CREATED,
        &SavedState {
            id: id.to_string(),
            view_url: share_url("", id, true),
            edit_url: share_url("", id, false),
        },
    ))
}

pub async fn load_state(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<LoadParams>,
) -> Result<Response, ApiError> {
    // edit mode returns the state as saved
    let view_mode = match params.mode.as_deref() {
        None | Some("edit") => None,
        Some("view") => Some(true),
        Some(other) => {
            return Err(ApiError::bad_request(format!("mode must be 'view' or 'edit', got '{other}'")).with_field("mode"))
        }
    };
    Ok(ok(&state.store.load(&id, view_mode)?))
}

pub async fn thresholds(State(state): State<AppState>) -> Response {
    ok(state.thresholds.as_ref())
}

pub async fn catalog() -> Response {
    ok(&attribute_catalog())
}

pub async fn status(State(state): State<AppState>) -> Response {
    ok(&Status {
        dataset: state.dataset.as_ref().map(|cs| DatasetStatus {
            source: cs.source().to_string(),
            cases: cs.len(),
            loaded_at: cs.loaded_at().to_rfc3339(),
        }),
        saved_states: state.store.len(),
    })
}

pub async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this endpoint")
}
