use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use routerisk_core::decision::DecisionError;
use routerisk_core::fusion::FusionError;
use routerisk_core::netmodel::NetworkError;
use routerisk_core::pipeline::PipelineError;
use routerisk_core::sequential::SessionError;

use crate::store::StoreError;

/// Error body: `{code, message, detail}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub detail: Value,
}

#[derive(Debug, Clone)]
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
                detail: Value::Null,
            },
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.body.detail = detail;
        self
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn unprocessable(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            // bad covariates or data are the caller's fault
            PipelineError::Ingest(e) => ApiError::bad_request("invalid_input", e.to_string()),
            PipelineError::Fusion(FusionError::InvalidPrior(_) | FusionError::InvalidLikelihood(_))
            | PipelineError::Fusion(FusionError::InvalidIntegration(_)) => {
                ApiError::bad_request("invalid_input", e.to_string())
            }
            other => ApiError::unprocessable("pipeline_error", other.to_string()),
        }
    }
}

impl From<DecisionError> for ApiError {
    fn from(e: DecisionError) -> Self {
        match &e {
            DecisionError::MissingProbability(_)
            | DecisionError::ProbabilityOutOfRange { .. }
            | DecisionError::UnknownLink(_)
            | DecisionError::InvalidUtility(_)
            | DecisionError::Network(NetworkError::Invalid(_) | NetworkError::UnknownLink(_) | NetworkError::UnknownNode(_)) => {
                ApiError::bad_request("invalid_input", e.to_string())
            }
            _ => ApiError::unprocessable("decision_error", e.to_string()),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Decision(d) => d.into(),
            SessionError::InvalidWeights { .. } | SessionError::InvalidConditional { .. } => {
                ApiError::bad_request("invalid_input", e.to_string())
            }
            SessionError::NotAdjacent { .. }
            | SessionError::Revisit { .. }
            | SessionError::RouteComplete(_)
            | SessionError::UnknownLink(_) => ApiError::unprocessable("illegal_observation", e.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", e.to_string()),
            StoreError::Stale { expected, current } => {
                ApiError::new(StatusCode::CONFLICT, "stale_revision", e.to_string())
                    .with_detail(serde_json::json!({ "expected": expected, "current": current }))
            }
            StoreError::Exists(_) => ApiError::new(StatusCode::CONFLICT, "session_exists", e.to_string()),
            StoreError::Session(s) => s.into(),
            StoreError::Io(_) | StoreError::Corrupt { .. } => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e.to_string())
            }
        }
    }
}
