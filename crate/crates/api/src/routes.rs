use std::num::NonZeroU64;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use polorg_core::json::ModelJson;
use polorg_core::{
    access_report, format, influence_rank, model_from_json, parse_str, propagate, to_dot, to_svg, whatif, Code, Diagnostic, EntityId,
    InfluenceMode, PropagationParams, RenderOptions, Scenario, Span,
};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::Session;

const REVISION_HEADER: &str = "x-polorg-revision";

pub fn router(session: Session, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/model", get(get_model).put(put_model))
        .route("/propagate", post(post_propagate))
        .route("/whatif", post(post_whatif))
        .route("/rank", get(get_rank))
        .route("/access", get(get_access))
        .route("/render.svg", get(render_svg))
        .route("/render.dot", get(render_dot))
        .route("/save", post(save))
        .fallback(not_found)
        .with_state(session);
    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(not_found),
    }
}

enum ApiError {
    Invalid(Vec<Diagnostic>),
    Stale(u64),
    BadRequest(String),
    NotFound,
    Internal(Diagnostic),
}

impl From<polorg_core::Error> for ApiError {
    fn from(e: polorg_core::Error) -> Self {
        ApiError::Invalid(e.diagnostics())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Invalid(diagnostics) => (StatusCode::UNPROCESSABLE_ENTITY, json!({ "diagnostics": diagnostics })),
            ApiError::Stale(current) => (StatusCode::CONFLICT, json!({ "error": "stale revision", "revision": current })),
            ApiError::BadRequest(msg) => (StatusCode::BAD_REQUEST, json!({ "error": msg })),
            ApiError::NotFound => (StatusCode::NOT_FOUND, json!({ "error": "not found" })),
            ApiError::Internal(d) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "diagnostics": [d] })),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T = Json<Value>> = Result<T, ApiError>;

async fn not_found() -> ApiError {
    ApiError::NotFound
}

fn json_syntax(e: serde_json::Error) -> ApiError {
    let span = (e.line() > 0).then(|| Span { line: e.line(), column: e.column().max(1), length: 1 });
    ApiError::Invalid(vec![Diagnostic::new(Code::Syntax, format!("invalid JSON: {e}"), span)])
}

/// An empty body stands for the type's default.
fn body_or_default<T: Default + for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(json_syntax)
}

async fn get_model(State(session): State<Session>) -> Json<Value> {
    let snap = session.snapshot();
    Json(json!({
        "revision": snap.revision,
        "model": ModelJson::from(&snap.model),
        "source": format(&snap.model),
    }))
}

#[derive(Deserialize)]
struct RevisionQuery {
    revision: Option<u64>,
}

fn expected_revision(headers: &HeaderMap, query: &RevisionQuery) -> ApiResult<Option<u64>> {
    let Some(value) = headers.get(header::IF_MATCH) else {
        return Ok(query.revision);
    };
    let text = value.to_str().unwrap_or_default().trim();
    let text = text.strip_prefix("W/").unwrap_or(text).trim_matches('"');
    text.parse().map(Some).map_err(|_| ApiError::BadRequest(format!("If-Match must carry a revision number, got `{text}`")))
}

async fn put_model(State(session): State<Session>, headers: HeaderMap, Query(query): Query<RevisionQuery>, body: String) -> ApiResult {
    let expected = expected_revision(&headers, &query)?;
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|ct| ct.starts_with("application/json"))
        || body.trim_start().starts_with('{');
    let (model, warnings) = if is_json {
        (model_from_json(&body).map_err(ApiError::Invalid)?, Vec::new())
    } else {
        let parsed = parse_str(&body);
        match parsed.model {
            Some(m) => (m, parsed.diagnostics),
            None => return Err(ApiError::Invalid(parsed.diagnostics)),
        }
    };
    let snap = session.replace(model, expected).map_err(ApiError::Stale)?;
    Ok(Json(json!({ "revision": snap.revision, "diagnostics": warnings })))
}

async fn post_propagate(State(session): State<Session>, body: Bytes) -> ApiResult {
    let scenario: Scenario = body_or_default(&body)?;
    let snap = session.snapshot();
    let trace = propagate(&snap.model, &scenario)?;
    Ok(Json(json!({ "revision": snap.revision, "trace": trace })))
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfRequest {
    #[serde(default)]
    scenarios: Vec<NamedScenario>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NamedScenario {
    name: String,
    #[serde(default)]
    scenario: Scenario,
}

async fn post_whatif(State(session): State<Session>, body: Bytes) -> ApiResult {
    let request: WhatIfRequest = body_or_default(&body)?;
    let scenarios: Vec<(String, Scenario)> = request.scenarios.into_iter().map(|s| (s.name, s.scenario)).collect();
    let snap = session.snapshot();
    let table = whatif(&snap.model, &scenarios)?;
    Ok(Json(json!({ "revision": snap.revision, "whatif": table })))
}

#[derive(Deserialize)]
struct RankQuery {
    threshold: Option<NonZeroU64>,
    mode: Option<InfluenceMode>,
}

async fn get_rank(State(session): State<Session>, Query(q): Query<RankQuery>) -> Json<Value> {
    let mut params = PropagationParams::default();
    if let Some(t) = q.threshold {
        params.cascade_threshold = t;
    }
    if let Some(m) = q.mode {
        params.influence_mode = m;
    }
    let snap = session.snapshot();
    let ranking = influence_rank(&snap.model, &params);
    Json(json!({ "revision": snap.revision, "ranking": ranking.entries }))
}

#[derive(Deserialize)]
struct AccessQuery {
    entry: Option<String>,
}

async fn get_access(State(session): State<Session>, Query(q): Query<AccessQuery>) -> ApiResult {
    let mut entries = std::collections::BTreeSet::new();
    for raw in q.entry.as_deref().unwrap_or_default().split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let id = EntityId::new(raw).map_err(|_| polorg_core::Error::BadEntry(format!("`{raw}` is not an entity id")))?;
        entries.insert(id);
    }
    let snap = session.snapshot();
    let report = access_report(&snap.model, &entries)?;
    Ok(Json(json!({ "revision": snap.revision, "entries": entries, "access": report })))
}

#[derive(Deserialize)]
struct RenderQuery {
    moods: Option<bool>,
    informal: Option<bool>,
    cap: Option<NonZeroU64>,
}

impl RenderQuery {
    fn options(&self) -> RenderOptions {
        let d = RenderOptions::default();
        RenderOptions {
            show_moods: self.moods.unwrap_or(d.show_moods),
            show_informal: self.informal.unwrap_or(d.show_informal),
            parallel_line_cap: self.cap.unwrap_or(d.parallel_line_cap),
            ..d
        }
    }
}

fn document(content_type: &'static str, revision: u64, body: String) -> Response {
    let mut resp = ([(header::CONTENT_TYPE, content_type)], body).into_response();
    resp.headers_mut().insert(REVISION_HEADER, HeaderValue::from(revision));
    resp
}

async fn render_svg(State(session): State<Session>, Query(q): Query<RenderQuery>) -> Response {
    let snap = session.snapshot();
    document("image/svg+xml", snap.revision, to_svg(&snap.model, &q.options()))
}

async fn render_dot(State(session): State<Session>, Query(q): Query<RenderQuery>) -> Response {
    let snap = session.snapshot();
    document("text/plain; charset=utf-8", snap.revision, to_dot(&snap.model, &q.options()))
}

async fn save(State(session): State<Session>) -> ApiResult {
    let Some(path) = session.origin() else {
        return Err(ApiError::BadRequest("no model file to save to; start the server with one".into()));
    };
    let snap = session.snapshot();
    tokio::fs::write(path, format(&snap.model))
        .await
        .map_err(|e| ApiError::Internal(Diagnostic::new(Code::Io, format!("cannot write {}: {e}", path.display()), None)))?;
    Ok(Json(json!({ "revision": snap.revision, "path": path.display().to_string() })))
}
