//! Wire form of failures: an HTTP status, a stable machine code and a message.

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use kwsp_core::model::Violation;
use kwsp_core::ErrorCode;
use serde::{Deserialize, Serialize};

/// Codes raised by the transport itself rather than by a platform operation.
pub const UNAUTHORIZED: &str = "Unauthorized";
pub const BAD_REQUEST: &str = "BadRequest";
pub const NOT_FOUND: &str = "NotFound";

pub const TRANSPORT_CODES: &[&str] = &[UNAUTHORIZED, BAD_REQUEST, NOT_FOUND];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

/// HTTP status for each platform error code.
pub fn status_of(code: ErrorCode) -> StatusCode {
    use ErrorCode::*;
    match code {
        EmptyContent | InvalidKind | MissingProvenance | ParseError | InvalidLimit | EmptyText | InvalidSegment
        | OverlappingSegments | EmptyDenominator => StatusCode::BAD_REQUEST,
        ValidationError | ValidationFailed | DanglingEndpoint | DanglingSupport | DanglingEvidence | AmbiguousIeType
        | DsCycle | NotGrounded | UnknownActivity | UnknownParent => StatusCode::UNPROCESSABLE_ENTITY,
        UnknownRecord | UnknownNode | UnknownTaskType | UnknownSession => StatusCode::NOT_FOUND,
        NonEmptyTarget | StaleVersion | InstanceBusy | SessionClosed | NoCurrentActivity => StatusCode::CONFLICT,
        StorageFailure => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_owned(),
            message: message.into(),
            violations: Vec::new(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, BAD_REQUEST, message)
    }

    pub fn unauthorized() -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, UNAUTHORIZED, "missing or wrong access token")
    }

    pub fn not_found(path: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, NOT_FOUND, format!("no endpoint at `{path}`"))
    }

    pub fn status_code(&self) -> StatusCode {
        StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }
}

impl From<kwsp_core::Error> for ApiError {
    fn from(err: kwsp_core::Error) -> Self {
        let code = err.code();
        ApiError {
            status: status_of(code).as_u16(),
            code: code.as_str().to_owned(),
            message: err.to_string(),
            violations: err.violations().to_vec(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        ApiError::bad_request(rejection.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(rejection: QueryRejection) -> Self {
        ApiError::bad_request(rejection.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status_code(), Json(self)).into_response()
    }
}
