use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ssakit::SsaError;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session '{id}'"))
    }
}

impl From<SsaError> for ApiError {
    fn from(e: SsaError) -> Self {
        let status = match e {
            SsaError::OverlappingGroups { .. } => StatusCode::CONFLICT,
            SsaError::NotForecastable { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            SsaError::NotConverged { .. } | SsaError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}
