use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use crosscheck_core::{ExplainError, Issue, PlanError};
use serde::Serialize;
use thiserror::Error;

use super::canonical_response;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
    #[error("`{0}` was scheduled; there is nothing to explain")]
    NotFailed(String),
    #[error("plan is at revision {current}, request expected {expected}")]
    Stale { current: u64, expected: String },
    #[error("{0}")]
    Invalid(PlanError),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "<[Issue]>::is_empty")]
    issues: &'a [Issue],
    #[serde(skip_serializing_if = "Option::is_none")]
    revision: Option<u64>,
}

impl ApiError {
    fn status(&self) -> (StatusCode, &'static str) {
        match self {
            ApiError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            ApiError::UnknownActivity(_) => (StatusCode::NOT_FOUND, "unknown_activity"),
            ApiError::NotFailed(_) => (StatusCode::NOT_FOUND, "not_failed"),
            ApiError::Stale { .. } => (StatusCode::CONFLICT, "stale_revision"),
            ApiError::Invalid(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_plan"),
            ApiError::Unprocessable(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_request"),
            ApiError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            ApiError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        }
    }
}

impl From<ExplainError> for ApiError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::UnknownActivity(id) => ApiError::UnknownActivity(id),
            ExplainError::NotFailed(id) => ApiError::NotFailed(id),
            ExplainError::Plan(p) => ApiError::Invalid(p),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.status();
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!("{self}");
        }
        let issues = match &self {
            ApiError::Invalid(p) => p.issues.as_slice(),
            _ => &[],
        };
        let revision = match &self {
            ApiError::Stale { current, .. } => Some(*current),
            _ => None,
        };
        let message = match &self {
            ApiError::Invalid(_) => "invalid plan".to_string(),
            other => other.to_string(),
        };
        canonical_response(
            status,
            &ErrorBody {
                error: code,
                message,
                issues,
                revision,
            },
        )
    }
}
