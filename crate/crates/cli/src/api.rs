//! JSON-over-HTTP service under `/v1`.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use breakglass::scenario::ScenarioDocument;
use breakglass::taxonomy::Calibration;
use breakglass::Error;
use serde::{Deserialize, Serialize};

use crate::report::{self, BreakevenRequest, FitRequest, SentimentRequest, SimulateRequest};

/// Largest `n_trials` accepted by `/v1/simulate`.
pub const MAX_TRIALS: usize = 10_000_000;

/// Structured error body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub field: Option<String>,
    pub message: String,
}

impl ErrorBody {
    pub fn from_error(e: &Error) -> Self {
        ErrorBody {
            code: e.code().to_string(),
            field: e.field().map(str::to_string),
            message: e.to_string(),
        }
    }
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain { .. } | Error::InsufficientData(_) | Error::Degenerate(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            Error::Schema(_) | Error::Parse(_) => StatusCode::BAD_REQUEST,
            Error::Io(_) => return ApiError::internal(),
        };
        ApiError {
            status,
            body: ErrorBody::from_error(&e),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                code: "schema_error".into(),
                field: None,
                message: r.body_text(),
            },
        }
    }
}

impl ApiError {
    fn internal() -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ErrorBody {
                code: "internal".into(),
                field: None,
                message: "internal error".into(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Body<T> = Result<Json<T>, JsonRejection>;

#[derive(Clone)]
struct AppState {
    calibration: Arc<Calibration>,
}

pub fn router(calibration: Calibration) -> Router {
    let state = AppState {
        calibration: Arc::new(calibration),
    };
    Router::new()
        .route("/v1/evaluate", post(evaluate))
        .route("/v1/rank", post(rank))
        .route("/v1/breakeven", post(breakeven))
        .route("/v1/simulate", post(simulate))
        .route("/v1/fit", post(fit))
        .route("/v1/sentiment/aggregate", post(sentiment))
        .route("/v1/defaults", get(defaults))
        .route("/v1/health", get(health))
        .with_state(state)
}

fn scenario(body: Body<ScenarioDocument>) -> Result<ScenarioDocument, ApiError> {
    let Json(doc) = body?;
    Ok(doc.validate()?)
}

async fn evaluate(State(s): State<AppState>, body: Body<ScenarioDocument>) -> ApiResult<report::CostReport> {
    let doc = scenario(body)?;
    Ok(Json(report::evaluate(&doc, &s.calibration, &[])?))
}

async fn rank(State(s): State<AppState>, body: Body<ScenarioDocument>) -> ApiResult<report::CostReport> {
    let doc = scenario(body)?;
    Ok(Json(report::rank(&doc, &s.calibration)?))
}

async fn breakeven(State(s): State<AppState>, body: Body<BreakevenRequest>) -> ApiResult<report::BreakevenReport> {
    let Json(req) = body?;
    let doc = req.scenario.validate()?;
    Ok(Json(report::breakeven(&doc, &s.calibration, req.a, req.b)?))
}

async fn simulate(State(s): State<AppState>, body: Body<SimulateRequest>) -> ApiResult<report::SimulateReport> {
    let Json(mut req) = body?;
    if req.n_trials > MAX_TRIALS {
        return Err(Error::domain("n_trials", format!("at most {MAX_TRIALS} trials per request")).into());
    }
    req.scenario = req.scenario.validate()?;
    let out = tokio::task::spawn_blocking(move || report::run_simulation(&req, &s.calibration))
        .await
        .map_err(|_| ApiError::internal())??;
    Ok(Json(out))
}

async fn fit(body: Body<FitRequest>) -> ApiResult<report::FitReport> {
    let Json(req) = body?;
    let out = tokio::task::spawn_blocking(move || report::fit(&req))
        .await
        .map_err(|_| ApiError::internal())??;
    Ok(Json(out))
}

async fn sentiment(body: Body<SentimentRequest>) -> ApiResult<report::SentimentReport> {
    let Json(req) = body?;
    Ok(Json(report::sentiment(&req)?))
}

async fn defaults(State(s): State<AppState>) -> Json<report::DefaultsReport> {
    Json(report::defaults(&s.calibration))
}

async fn health(State(s): State<AppState>) -> Json<report::Health> {
    Json(report::health(&s.calibration))
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(addr: &str, calibration: Calibration) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(calibration))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
