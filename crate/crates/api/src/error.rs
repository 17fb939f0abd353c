use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use dao_portal_core::catalog::CatalogError;
use serde::Serialize;

/// Every non-2xx response body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub detail: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown DAO {0}")]
    UnknownDao(String),
    #[error("unknown run {0}")]
    UnknownRun(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("no route for {0}")]
    NotFound(String),
    #[error("method {0} is not allowed; the API is read-only")]
    MethodNotAllowed(String),
    #[error("catalog error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ApiError::InvalidParameter { name, reason: reason.into() }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownDao(_) | ApiError::UnknownRun(_) | ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::InvalidParameter { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::MethodNotAllowed(_) => StatusCode::METHOD_NOT_ALLOWED,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ApiError::UnknownDao(_) => "unknown_dao",
            ApiError::UnknownRun(_) => "unknown_run",
            ApiError::InvalidParameter { .. } => "invalid_parameter",
            ApiError::NotFound(_) => "not_found",
            ApiError::MethodNotAllowed(_) => "method_not_allowed",
            ApiError::Internal(_) => "internal",
        }
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::UnknownDao(id) => ApiError::UnknownDao(id),
            CatalogError::UnknownRun(run) => ApiError::UnknownRun(run.to_string()),
            CatalogError::RunDaoMismatch { run_id, .. } => ApiError::UnknownRun(run_id.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let body = ErrorBody { error: self.code(), detail: self.to_string() };
        (self.status(), Json(body)).into_response()
    }
}
