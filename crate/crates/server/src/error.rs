use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use pbm_core::cohort::QueryError;
use pbm_core::provenance::StoreError;
use serde::{Deserialize, Serialize};

/// Body of every non-success response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub field: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
                field: None,
            },
        }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.body.field = Some(field.into());
        self
    }

    pub fn no_dataset() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "no_dataset", "no dataset is loaded")
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_request", message)
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_query", e.message.clone()).with_field(e.field)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => Self::new(StatusCode::NOT_FOUND, "state_not_found", e.to_string()),
            StoreError::InvalidState(_) => Self::new(StatusCode::BAD_REQUEST, "invalid_state", e.to_string()),
            StoreError::Io { .. } | StoreError::Corrupt { .. } => {
                tracing::error!("state store: {e}");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", "could not access saved states")
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, &self.body)
    }
}

/// Serializes with serde_json directly so equal values give equal bytes.
pub fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    match serde_json::to_vec(value) {
        Ok(bytes) => {
            let mut resp = (status, bytes).into_response();
            resp.headers_mut()
                .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            resp
        }
        Err(e) => {
            tracing::error!("serializing response: {e}");
            let body = br#"{"code":"internal_error","message":"response could not be encoded","field":null}"#;
            let mut resp = (StatusCode::INTERNAL_SERVER_ERROR, body.as_slice()).into_response();
            resp.headers_mut()
                .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
            resp
        }
    }
}
