//! HTTP JSON API holding SSA sessions for interactive grouping.
//!
//! Every session owns one series and its decomposition. Clients inspect
//! eigentriples, submit groupings and request forecasts of named groups.

mod error;
mod store;

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use ssakit::periodogram::{frequencies, periodogram};
use ssakit::predict::{IntervalKind, NoiseModel};
use ssakit::{
    bootstrap_group_intervals, decompose, forecast, reconstruct, wcor_of_series, BootstrapOptions, Centering,
    Decomposition, ForecastMethod, Grouping, Method, Series, SvdOptions,
};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::ApiError;
pub use store::{Session, SessionStore};

#[derive(Debug, Clone)]
pub struct Config {
    /// Largest accepted series length; longer uploads get 413.
    pub max_series_len: usize,
    /// Sessions kept before the least recently used one is evicted.
    pub max_sessions: usize,
    /// Allowed CORS origin; any origin when `None`.
    pub cors_origin: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self { max_series_len: 1_000_000, max_sessions: 64, cors_origin: None }
    }
}

#[derive(Debug)]
pub struct AppState {
    pub config: Config,
    pub sessions: SessionStore,
}

pub fn app(config: Config) -> Router {
    let cors = match &config.cors_origin {
        Some(origin) => match HeaderValue::from_str(origin) {
            Ok(v) => CorsLayer::new().allow_origin(AllowOrigin::exact(v)),
            Err(_) => CorsLayer::new(),
        },
        None => CorsLayer::new().allow_origin(AllowOrigin::any()),
    }
    .allow_methods(tower_http::cors::Any)
    .allow_headers([header::CONTENT_TYPE]);
    // room for the largest accepted series written as JSON numbers
    let body_limit = config.max_series_len.saturating_mul(32).max(1 << 20);
    let state = Arc::new(AppState { sessions: SessionStore::new(config.max_sessions), config });
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/components/{m}", get(get_component))
        .route("/sessions/{id}/grouping", put(put_grouping))
        .route("/sessions/{id}/forecast", post(post_forecast))
        .route("/sessions/{id}/wcor", get(get_wcor))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(state)
}

type Shared = State<Arc<AppState>>;

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn session(state: &AppState, id: &str) -> Result<Arc<Session>, ApiError> {
    state.sessions.get(id).ok_or_else(|| ApiError::not_found(id))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

fn json_bytes(value: &impl Serialize) -> Result<Bytes, ApiError> {
    serde_json::to_vec(value)
        .map(Bytes::from)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

fn json_response(status: StatusCode, bytes: Bytes) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    series: Vec<f64>,
    #[serde(rename = "L")]
    window: Option<usize>,
    k: Option<usize>,
    #[serde(default = "basic")]
    method: Method,
    #[serde(default = "no_centering")]
    centering: Centering,
}

fn basic() -> Method {
    Method::Basic
}

fn no_centering() -> Centering {
    Centering::None
}

const DEFAULT_COMPONENTS: usize = 10;

fn descriptor(s: &Session) -> Value {
    let dec = &s.decomposition;
    let w = dec.window();
    let groups: Value = serde_json::from_str(&s.grouping.to_json()).unwrap_or(Value::Null);
    json!({
        "id": s.id,
        "N": w.series_len(),
        "L": w.window_len(),
        "K": w.lagged_count(),
        "d": dec.len(),
        "method": dec.method(),
        "centering": dec.centering(),
        "sigmas": dec.sigmas(),
        "contributions": dec.contributions(),
        "grouping": groups,
        "created": s.created,
    })
}

async fn create_session(State(state): Shared, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = parse_body(&body)?;
    let n = req.series.len();
    if n > state.config.max_series_len {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("series of length {n} exceeds the limit of {}", state.config.max_series_len),
        ));
    }
    let dec = blocking(move || {
        let series = Series::new(req.series)?;
        let window = req.window.unwrap_or_else(|| ssakit::default_window(series.len(), req.method));
        let cfg = ssakit::WindowConfig::new(series.len(), window)?;
        let k = req.k.unwrap_or(DEFAULT_COMPONENTS.min(cfg.min_dim()));
        Ok(decompose(&series, window, k, req.method, req.centering, &SvdOptions::default())?)
    })
    .await?;
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let s = state.sessions.insert(Session {
        id: uuid::Uuid::new_v4().simple().to_string(),
        created,
        decomposition: Arc::new(dec),
        grouping: Arc::new(Grouping::new()),
        grouping_response: None,
    });
    Ok((StatusCode::CREATED, Json(descriptor(&s))).into_response())
}

async fn get_session(State(state): Shared, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = session(&state, &id)?;
    Ok(Json(descriptor(&s)))
}

async fn get_component(State(state): Shared, Path((id, m)): Path<(String, String)>) -> Result<Response, ApiError> {
    let s = session(&state, &id)?;
    let dec = s.decomposition.clone();
    let m: usize = m
        .parse()
        .map_err(|_| ApiError::bad_request(format!("component index '{m}' is not a positive integer")))?;
    if m == 0 || m > dec.len() {
        return Err(ApiError::bad_request(format!("component index {m} out of range 1..={}", dec.len())));
    }
    let bytes = blocking(move || {
        let t = &dec.triples()[m - 1];
        json_bytes(&json!({
            "index": m,
            "sigma": t.sigma,
            "lambda": t.lambda(),
            "contribution": dec.contributions()[m - 1],
            "eigenvector": t.u,
            "factor": t.v,
            "elementary": dec.elementary(m - 1)?,
            "periodogram": periodogram(&t.u),
            "frequencies": frequencies(t.u.len()),
        }))
    })
    .await?;
    Ok(json_response(StatusCode::OK, bytes))
}

fn grouping_payload(dec: &Decomposition, grouping: &Grouping) -> Result<Value, ApiError> {
    let rec = reconstruct(dec, grouping)?;
    let names: Vec<&String> = rec.groups.keys().collect();
    let series: Vec<Vec<f64>> = rec.groups.values().cloned().collect();
    let wcor = if series.is_empty() {
        Vec::new()
    } else {
        wcor_of_series(&series, dec.window())?.rows()
    };
    let groups: Value = serde_json::from_str(&grouping.to_json()).unwrap_or(Value::Null);
    Ok(json!({
        "grouping": groups,
        "groups": rec.groups,
        "residual": rec.residual,
        "centering": rec.centering,
        "wcor": { "names": names, "values": wcor },
    }))
}

async fn put_grouping(State(state): Shared, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let s = session(&state, &id)?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("request body is not UTF-8"))?;
    let grouping = Grouping::from_json(text)?;
    if let Some(cached) = &s.grouping_response {
        if *s.grouping == grouping {
            return Ok(json_response(StatusCode::OK, cached.clone()));
        }
    }
    let base = s.clone();
    let (grouping, bytes) = blocking(move || {
        grouping.validate(base.decomposition.len())?;
        let bytes = json_bytes(&grouping_payload(&base.decomposition, &grouping)?)?;
        Ok((grouping, bytes))
    })
    .await?;
    state
        .sessions
        .set_grouping(&s, Arc::new(grouping), bytes.clone())
        .ok_or_else(|| ApiError::not_found(&id))?;
    Ok(json_response(StatusCode::OK, bytes))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForecastRequest {
    group: String,
    h: usize,
    #[serde(default = "recurrent")]
    method: ForecastMethod,
    intervals: Option<IntervalRequest>,
}

fn recurrent() -> ForecastMethod {
    ForecastMethod::Recurrent
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalRequest {
    #[serde(rename = "B")]
    replications: Option<usize>,
    level: Option<f64>,
    seed: Option<u64>,
    kind: Option<IntervalKind>,
    noise: Option<NoiseModel>,
}

async fn post_forecast(State(state): Shared, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let s = session(&state, &id)?;
    let req: ForecastRequest = parse_body(&body)?;
    let group = s
        .grouping
        .get(&req.group)
        .ok_or_else(|| ApiError::bad_request(format!("unknown group '{}'", req.group)))?
        .to_vec();
    let dec = s.decomposition.clone();
    let bytes = blocking(move || {
        let result = match req.intervals {
            None => forecast(&dec, &group, req.h, req.method)?,
            Some(iv) => {
                if dec.method() != Method::Basic || dec.centering() != Centering::None {
                    return Err(ApiError::bad_request("intervals need a Basic SSA session without centering"));
                }
                let defaults = BootstrapOptions::default();
                let opts = BootstrapOptions {
                    replications: iv.replications.unwrap_or(defaults.replications),
                    level: iv.level.unwrap_or(defaults.level),
                    seed: iv.seed.unwrap_or(defaults.seed),
                    kind: iv.kind.unwrap_or(defaults.kind),
                    noise: iv.noise.unwrap_or(defaults.noise),
                    method: req.method,
                };
                bootstrap_group_intervals(dec.series(), dec.window().window_len(), &group, req.h, &opts)?
            }
        };
        json_bytes(&result)
    })
    .await?;
    Ok(json_response(StatusCode::OK, bytes))
}

async fn get_wcor(State(state): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = session(&state, &id)?;
    let dec = s.decomposition.clone();
    let bytes = blocking(move || {
        let w = ssakit::wcor(&dec, dec.len())?;
        json_bytes(&json!({ "size": w.size(), "values": w.rows(), "zero_norm": w.zero_norm() }))
    })
    .await?;
    Ok(json_response(StatusCode::OK, bytes))
}
