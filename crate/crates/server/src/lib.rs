//! HTTP API over a loaded case set, plus the share-state store.

pub mod api;
pub mod error;

use axum::routing::{get, post};
use axum::Router;
use pbm_core::ingest::CaseSet;
use pbm_core::provenance::StateStore;
use pbm_core::thresholds::ClinicalThresholds;
use std::sync::Arc;

pub use error::{ApiError, ErrorBody};

/// Shared, read-only apart from the store's own locking.
#[derive(Clone)]
pub struct AppState {
    pub dataset: Option<Arc<CaseSet>>,
    pub thresholds: Arc<ClinicalThresholds>,
    pub store: Arc<StateStore>,
}

impl AppState {
    pub fn new(dataset: Option<CaseSet>, thresholds: ClinicalThresholds, store: StateStore) -> Self {
        Self {
            dataset: dataset.map(Arc::new),
            thresholds: Arc::new(thresholds),
            store: Arc::new(store),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/procedures", get(api::procedures))
        .route("/api/query/heatmap", post(api::query_heatmap))
        .route("/api/query/dumbbell", post(api::query_dumbbell))
        .route("/api/query/dotplot", post(api::query_dotplot))
        .route("/api/query/cases", post(api::query_cases))
        .route("/api/state", post(api::save_state))
        .route("/api/state/{id}", get(api::load_state))
        .route("/api/config/thresholds", get(api::thresholds))
        .route("/api/catalog", get(api::catalog))
        .route("/api/status", get(api::status))
        .fallback(api::not_found)
        .method_not_allowed_fallback(api::method_not_allowed)
        .with_state(state)
}
