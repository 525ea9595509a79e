//! HTTP access to a baked light field.
//!
//! * `GET /metadata` describes the loaded field.
//! * `POST /frame` takes a pose as JSON and answers with a PNG, plus the
//!   `X-Render-Micros` and `X-Coverage-Percent` headers.
//!
//! The field is shared read-only between handlers; renders run on the
//! blocking pool behind a semaphore sized by the worker count.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Value};
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, CorsLayer};

use sflight::lightfield::LightField;
use sflight::render::{render_png, FrameRequest, SamplingMode};

pub const MIN_SIZE: u32 = 16;
pub const MAX_SIZE: u32 = 2048;
pub const RENDER_MICROS: &str = "x-render-micros";
pub const COVERAGE_PERCENT: &str = "x-coverage-percent";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub m: u32,
    pub n: u32,
    pub radius: f64,
    pub center: [f64; 3],
    pub hemisphere: bool,
    pub texel_format: &'static str,
    pub suggested_orbit_radius: f64,
}

impl Metadata {
    pub fn of(lf: &LightField) -> Self {
        let g = lf.geometry();
        Self {
            m: g.origins,
            n: g.directions,
            radius: g.radius,
            center: g.center.to_array(),
            hemisphere: g.hemisphere_only,
            texel_format: "rgba8",
            suggested_orbit_radius: 2.5 * g.radius,
        }
    }
}

enum FieldState {
    Loading,
    Ready(Arc<LightField>),
    Failed(String),
}

#[derive(Clone)]
pub struct AppState {
    field: Arc<RwLock<FieldState>>,
    workers: Arc<Semaphore>,
}

impl AppState {
    /// State whose field is still being loaded; handlers answer 503 until
    /// [`AppState::set_field`] is called.
    pub fn loading(workers: usize) -> Self {
        Self {
            field: Arc::new(RwLock::new(FieldState::Loading)),
            workers: Arc::new(Semaphore::new(workers.max(1))),
        }
    }

    pub fn ready(field: LightField, workers: usize) -> Self {
        let s = Self::loading(workers);
        s.set_field(field);
        s
    }

    pub fn set_field(&self, field: LightField) {
        *self.field.write().expect("field lock") = FieldState::Ready(Arc::new(field));
    }

    pub fn set_failed(&self, reason: String) {
        *self.field.write().expect("field lock") = FieldState::Failed(reason);
    }

    fn field(&self) -> Result<Arc<LightField>, Response> {
        match &*self.field.read().expect("field lock") {
            FieldState::Ready(f) => Ok(f.clone()),
            FieldState::Loading => Err(error(StatusCode::SERVICE_UNAVAILABLE, None, "field is loading")),
            FieldState::Failed(why) => Err(error(StatusCode::SERVICE_UNAVAILABLE, None, &format!("field failed to load: {why}"))),
        }
    }
}

/// Which browser origins may call the API.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Cors {
    /// Any `http(s)://localhost` or `127.0.0.1` origin, any port.
    #[default]
    Localhost,
    /// Exactly these origins; `*` allows everything.
    Origins(Vec<String>),
}

impl Cors {
    fn layer(&self) -> CorsLayer {
        let allow = match self {
            Cors::Localhost => AllowOrigin::predicate(|origin: &HeaderValue, _| {
                origin.to_str().map(is_local_origin).unwrap_or(false)
            }),
            Cors::Origins(list) if list.iter().any(|o| o == "*") => AllowOrigin::any(),
            Cors::Origins(list) => AllowOrigin::list(list.iter().filter_map(|o| HeaderValue::from_str(o).ok())),
        };
        CorsLayer::new()
            .allow_origin(allow)
            .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
            .allow_headers([header::CONTENT_TYPE])
            .expose_headers([HeaderName::from_static(RENDER_MICROS), HeaderName::from_static(COVERAGE_PERCENT)])
    }
}

fn is_local_origin(origin: &str) -> bool {
    let rest = origin
        .strip_prefix("http://")
        .or_else(|| origin.strip_prefix("https://"))
        .unwrap_or("");
    let host = rest.rsplit_once(':').map_or(rest, |(h, port)| if port.chars().all(|c| c.is_ascii_digit()) { h } else { rest });
    matches!(host, "localhost" | "127.0.0.1" | "[::1]")
}

pub fn router(state: AppState, cors: &Cors) -> Router {
    Router::new()
        .route("/metadata", get(metadata))
        .route("/frame", post(frame))
        .with_state(state)
        .layer(cors.layer())
}

async fn metadata(State(state): State<AppState>) -> Response {
    match state.field() {
        Ok(f) => Json(Metadata::of(&f)).into_response(),
        Err(r) => r,
    }
}

async fn frame(State(state): State<AppState>, body: Bytes) -> Response {
    let field = match state.field() {
        Ok(f) => f,
        Err(r) => return r,
    };
    let req = match parse_pose(&body) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    let Ok(_permit) = state.workers.clone().acquire_owned().await else {
        return error(StatusCode::SERVICE_UNAVAILABLE, None, "server shutting down");
    };
    let rendered = tokio::task::spawn_blocking(move || {
        let start = Instant::now();
        let out = render_png(&field, &req);
        (out, start.elapsed())
    })
    .await;
    match rendered {
        Ok((Ok((png, frame)), took)) => (
            StatusCode::OK,
            [
                (header::CONTENT_TYPE, "image/png".to_string()),
                (HeaderName::from_static(RENDER_MICROS), took.as_micros().to_string()),
                (HeaderName::from_static(COVERAGE_PERCENT), format!("{:.3}", frame.coverage_percent())),
            ],
            png,
        )
            .into_response(),
        // The pose was validated, so a camera error means a degenerate view.
        Ok((Err(e), _)) => error(StatusCode::BAD_REQUEST, None, &e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, None, &e.to_string()),
    }
}

fn error(status: StatusCode, field: Option<&str>, message: &str) -> Response {
    (status, Json(json!({ "error": message, "field": field }))).into_response()
}

/// Request validation failure, naming the offending field.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseError {
    pub status: StatusCode,
    pub field: Option<&'static str>,
    pub message: String,
}

impl PoseError {
    fn bad(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            field: Some(field),
            message: message.into(),
        }
    }
}

impl IntoResponse for PoseError {
    fn into_response(self) -> Response {
        error(self.status, self.field, &self.message)
    }
}

/// Parses and validates a pose body.
pub fn parse_pose(body: &[u8]) -> Result<FrameRequest, PoseError> {
    let v: Value = serde_json::from_slice(body).map_err(|e| PoseError {
        status: StatusCode::BAD_REQUEST,
        field: None,
        message: format!("body is not valid JSON: {e}"),
    })?;
    let obj = v.as_object().ok_or(PoseError {
        status: StatusCode::BAD_REQUEST,
        field: None,
        message: "body must be a JSON object".into(),
    })?;
    let eye = vec3(obj, "eye")?;
    let look_at = vec3(obj, "look_at")?;
    let up = vec3(obj, "up")?;
    let fov_deg = obj
        .get("fov_deg")
        .and_then(Value::as_f64)
        .ok_or_else(|| PoseError::bad("fov_deg", "fov_deg must be a number"))?;
    if !(fov_deg > 0.0 && fov_deg < 180.0) {
        return Err(PoseError::bad("fov_deg", "fov_deg must lie in (0, 180)"));
    }
    let width = size(obj, "width")?;
    let height = size(obj, "height")?;
    let mode = match obj.get("mode") {
        None => SamplingMode::Filtered,
        Some(m) => m
            .as_str()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PoseError::bad("mode", "mode must be \"nearest\" or \"filtered\""))?,
    };
    let req = FrameRequest {
        eye,
        look_at,
        up,
        fov_deg,
        width,
        height,
        mode,
    };
    req.camera().map_err(|e| {
        let field = match e {
            sflight::camera::CameraError::DegenerateUp => "up",
            _ => "look_at",
        };
        PoseError::bad(field, e.to_string())
    })?;
    Ok(req)
}

fn vec3(obj: &serde_json::Map<String, Value>, name: &'static str) -> Result<[f64; 3], PoseError> {
    let bad = || PoseError::bad(name, format!("{name} must be an array of 3 finite numbers"));
    let arr = obj.get(name).and_then(Value::as_array).ok_or_else(bad)?;
    if arr.len() != 3 {
        return Err(bad());
    }
    let mut out = [0.0; 3];
    for (o, v) in out.iter_mut().zip(arr) {
        *o = v.as_f64().filter(|x| x.is_finite()).ok_or_else(bad)?;
    }
    Ok(out)
}

fn size(obj: &serde_json::Map<String, Value>, name: &'static str) -> Result<u32, PoseError> {
    let v = obj
        .get(name)
        .and_then(Value::as_u64)
        .ok_or_else(|| PoseError::bad(name, format!("{name} must be a positive integer")))?;
    if v > MAX_SIZE as u64 {
        return Err(PoseError {
            status: StatusCode::PAYLOAD_TOO_LARGE,
            field: Some(name),
            message: format!("{name} exceeds {MAX_SIZE}"),
        });
    }
    if v < MIN_SIZE as u64 {
        return Err(PoseError::bad(name, format!("{name} is below {MIN_SIZE}")));
    }
    Ok(v as u32)
}

/// Binds `addr` and serves until the process ends. The field at `path` is
/// loaded in the background; requests get 503 until it is ready.
pub async fn serve(addr: SocketAddr, path: PathBuf, workers: usize, cors: Cors, ready: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let state = AppState::loading(workers);
    let loader = state.clone();
    tokio::task::spawn_blocking(move || match sflight::lplf::load(&path) {
        Ok(f) => loader.set_field(f),
        Err(e) => loader.set_failed(e.to_string()),
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    ready(listener.local_addr()?);
    axum::serve(listener, router(state, &cors)).await
}
