//! REST API over in-memory scheduling sessions.
//!
//! Every payload is canonical JSON. `GET .../sched` and `GET .../report`
//! return exactly the `.sched.json` and `.explain.json` files that
//! `crosscheck run` writes for the same plan revision.

mod error;
mod session;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use crosscheck_core::explain::{energy_consumers, peak_power_users, EnergyConsumer, PowerUser};
use crosscheck_core::io::{
    schedule_document, serialize_schedule, to_canonical_string, PlacedEntry, PlanDocument,
};
use crosscheck_core::scheduler::{loads_of, power_profile, simulate_soc, ValidIntervals};
use crosscheck_core::{
    parse_plan, Activity, Interval, IntervalSet, Issue, Phase2Reason, PlanError, Strictness, TimePoint,
};
use serde::{Deserialize, Serialize};

pub use error::ApiError;
pub use session::{Session, Snapshot, Store};

type AppState = Arc<Store>;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_summary))
        .route("/sessions/{id}/schedule", get(schedule_lanes))
        .route("/sessions/{id}/sched", get(schedule_file))
        .route("/sessions/{id}/report", get(report_file))
        .route("/sessions/{id}/activities/{aid}", get(activity_detail).patch(patch_activity))
        .route("/sessions/{id}/activities/{aid}/explanation", get(activity_explanation))
        .route("/sessions/{id}/energy", get(energy_at))
        .route("/sessions/{id}/power", get(power_at))
        .with_state(store)
}

pub(crate) fn canonical_response<T: Serialize + ?Sized>(status: StatusCode, body: &T) -> Response {
    text_response(status, to_canonical_string(body))
}

fn text_response(status: StatusCode, text: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], text).into_response()
}

fn etag(revision: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{revision}\"")).expect("digits are a valid header value")
}

fn with_etag(mut response: Response, revision: u64) -> Response {
    response.headers_mut().insert(header::ETAG, etag(revision));
    response
}

fn session(store: &Store, id: &str) -> Result<Arc<Session>, ApiError> {
    store.get(id).ok_or_else(|| ApiError::UnknownSession(id.to_string()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(format!("worker task failed: {e}")))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

#[derive(Serialize)]
struct SessionSummary {
    session: String,
    revision: u64,
    activities: usize,
    complete: bool,
    failed: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<Issue>,
}

impl SessionSummary {
    fn of(id: &str, snap: &Snapshot, warnings: Vec<Issue>) -> Self {
        Self {
            session: id.to_string(),
            revision: snap.revision,
            activities: snap.plan.len(),
            complete: snap.schedule.is_complete(),
            failed: snap.schedule.failed().map(|r| r.activity.clone()).collect(),
            warnings,
        }
    }
}

#[derive(Deserialize)]
struct CreateQuery {
    #[serde(default)]
    lenient: bool,
}

async fn create_session(
    State(store): State<AppState>,
    q: Result<Query<CreateQuery>, QueryRejection>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let strictness = if query(q)?.lenient {
        Strictness::Lenient
    } else {
        Strictness::Strict
    };
    let parsed = parse_plan(&body, strictness).map_err(ApiError::Invalid)?;
    let warnings = parsed.warnings;
    let snapshot = blocking(move || Snapshot::build(parsed.plan, 1)).await?;
    let session = store
        .create(snapshot)
        .map_err(|e| ApiError::Internal(format!("cannot persist session: {e}")))?;
    let snap = session.snapshot();
    tracing::info!(session = %session.id, activities = snap.plan.len(), "created session");
    let mut response = canonical_response(StatusCode::CREATED, &SessionSummary::of(&session.id, &snap, warnings));
    let location = HeaderValue::from_str(&format!("/sessions/{}", session.id)).expect("uuid is a valid header");
    response.headers_mut().insert(header::LOCATION, location);
    Ok(with_etag(response, snap.revision))
}

async fn session_summary(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let snap = session(&store, &id)?.snapshot();
    Ok(with_etag(
        canonical_response(StatusCode::OK, &SessionSummary::of(&id, &snap, Vec::new())),
        snap.revision,
    ))
}

#[derive(Deserialize)]
struct StepQuery {
    step: Option<usize>,
}

#[derive(Serialize)]
struct PendingEntry {
    id: String,
    priority: u32,
    step: usize,
}

#[derive(Serialize)]
struct FailedEntry {
    id: String,
    step: usize,
    outcome: &'static str,
    phase2_reasons: Vec<Phase2Reason>,
}

/// The three activity timelines plus profiles at one scheduling step.
#[derive(Serialize)]
struct Lanes {
    revision: u64,
    step: usize,
    steps: usize,
    plan_bounds: Interval,
    scheduled: Vec<PlacedEntry>,
    yet_to_schedule: Vec<PendingEntry>,
    failed: Vec<FailedEntry>,
    awake: IntervalSet,
    soc: Vec<(TimePoint, f64)>,
    power: Vec<(TimePoint, f64)>,
}

async fn schedule_lanes(
    State(store): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<StepQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let snap = session(&store, &id)?.snapshot();
    let steps = snap.plan.len();
    let step = query(q)?.step.unwrap_or(steps);
    if step > steps {
        return Err(ApiError::Unprocessable(format!("step {step} is past the last step ({steps})")));
    }
    let partial = snap.schedule.at_step(step);
    let cfg = snap.plan.config();
    let doc = schedule_document(&partial, cfg);
    let lanes = Lanes {
        revision: snap.revision,
        step,
        steps,
        plan_bounds: cfg.plan_bounds,
        scheduled: doc.placed,
        yet_to_schedule: snap.plan.activities()[step..]
            .iter()
            .enumerate()
            .map(|(i, a)| PendingEntry {
                id: a.id.clone(),
                priority: a.priority,
                step: step + i + 1,
            })
            .collect(),
        failed: partial
            .failed()
            .map(|r| FailedEntry {
                id: r.activity.clone(),
                step: r.step,
                outcome: r.outcome.tag(),
                phase2_reasons: r.phase2_reasons(),
            })
            .collect(),
        awake: doc.awake,
        soc: doc.soc,
        power: doc.power,
    };
    Ok(with_etag(canonical_response(StatusCode::OK, &lanes), snap.revision))
}

async fn schedule_file(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let snap = session(&store, &id)?.snapshot();
    let text = serialize_schedule(&snap.schedule, snap.plan.config());
    Ok(with_etag(text_response(StatusCode::OK, text), snap.revision))
}

async fn report_file(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let snap = session(&store, &id)?.snapshot();
    let revision = snap.revision;
    let text = blocking(move || snap.report()).await??;
    Ok(with_etag(text_response(StatusCode::OK, text), revision))
}

#[derive(Serialize)]
struct ActivityDetail<'a> {
    revision: u64,
    id: &'a str,
    step: usize,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    start: Option<TimePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    end: Option<TimePoint>,
    valid: &'a ValidIntervals,
    activity: &'a Activity,
}

async fn activity_detail(
    State(store): State<AppState>,
    Path((id, aid)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let snap = session(&store, &id)?.snapshot();
    let act = snap.plan.get(&aid).ok_or_else(|| ApiError::UnknownActivity(aid.clone()))?;
    let record = snap
        .schedule
        .step_record(&aid)
        .ok_or_else(|| ApiError::Internal(format!("no step recorded for `{aid}`")))?;
    let placed = snap.schedule.get(&aid);
    let detail = ActivityDetail {
        revision: snap.revision,
        id: &act.id,
        step: record.step,
        status: record.outcome.tag(),
        start: placed.map(|p| p.start),
        end: placed.map(|p| p.end),
        valid: &record.valid,
        activity: act,
    };
    Ok(with_etag(canonical_response(StatusCode::OK, &detail), snap.revision))
}

async fn activity_explanation(
    State(store): State<AppState>,
    Path((id, aid)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let snap = session(&store, &id)?.snapshot();
    let revision = snap.revision;
    let explanation = blocking(move || snap.explanation(&aid)).await??;
    Ok(with_etag(canonical_response(StatusCode::OK, explanation.as_ref()), revision))
}

#[derive(Deserialize)]
struct TimeQuery {
    t: TimePoint,
}

#[derive(Serialize)]
struct EnergyView {
    revision: u64,
    t: TimePoint,
    soc: f64,
    total_wh: f64,
    consumers: Vec<EnergyConsumer>,
}

async fn energy_at(
    State(store): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<TimeQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let snap = session(&store, &id)?.snapshot();
    let t = query(q)?.t;
    let cfg = snap.plan.config();
    if t < cfg.plan_start() || t > cfg.plan_end() {
        return Err(ApiError::Unprocessable(format!("t={t} is outside the plan bounds {}", cfg.plan_bounds)));
    }
    let consumers = energy_consumers(&snap.schedule, cfg, t);
    let view = EnergyView {
        revision: snap.revision,
        t,
        soc: simulate_soc(&snap.schedule, cfg).value_at(t),
        total_wh: consumers.iter().map(|c| c.energy_wh).sum(),
        consumers,
    };
    Ok(with_etag(canonical_response(StatusCode::OK, &view), snap.revision))
}

#[derive(Serialize)]
struct PowerView {
    revision: u64,
    t: TimePoint,
    total_w: f64,
    users: Vec<PowerUser>,
}

async fn power_at(
    State(store): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<TimeQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let snap = session(&store, &id)?.snapshot();
    let t = query(q)?.t;
    let cfg = snap.plan.config();
    if !cfg.plan_bounds.contains(t) {
        return Err(ApiError::Unprocessable(format!("t={t} is outside the plan bounds {}", cfg.plan_bounds)));
    }
    let view = PowerView {
        revision: snap.revision,
        t,
        total_w: power_profile(cfg, &loads_of(&snap.schedule)).value_at(t),
        users: peak_power_users(&snap.schedule, t),
    };
    Ok(with_etag(canonical_response(StatusCode::OK, &view), snap.revision))
}

/// Revision named by an `If-Match` header: `"3"`, `W/"3"` or `3`; `*` matches any.
fn if_match(headers: &HeaderMap) -> Result<Option<String>, ApiError> {
    let Some(value) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    let text = value
        .to_str()
        .map_err(|_| ApiError::BadRequest("If-Match is not valid text".into()))?
        .trim();
    if text == "*" {
        return Ok(None);
    }
    let text = text.strip_prefix("W/").unwrap_or(text);
    Ok(Some(text.trim_matches('"').to_string()))
}

/// Replaces the given top-level fields of activity `aid` in the plan's
/// document form and re-validates the whole document.
fn apply_edit(snap: &Snapshot, aid: &str, body: &[u8]) -> Result<crosscheck_core::Plan, ApiError> {
    let edit: serde_json::Value = serde_json::from_slice(body)
        .map_err(|e| ApiError::Invalid(PlanError::single("$", format!("edit is not valid JSON: {e}"))))?;
    let serde_json::Value::Object(fields) = edit else {
        return Err(ApiError::Invalid(PlanError::single("$", "edit must be a JSON object")));
    };
    if let Some(new_id) = fields.get("id") {
        if new_id.as_str() != Some(aid) {
            return Err(ApiError::Invalid(PlanError::single("$.id", "activity ids cannot be changed")));
        }
    }
    let mut doc = serde_json::to_value(PlanDocument::from_plan(&snap.plan)).expect("plans serialize");
    let activities = doc["activities"].as_array_mut().expect("document has activities");
    let index = activities
        .iter()
        .position(|a| a["id"].as_str() == Some(aid))
        .ok_or_else(|| ApiError::UnknownActivity(aid.to_string()))?;
    let target = activities[index].as_object_mut().expect("activities are objects");
    for (key, value) in fields {
        target.insert(key, value);
    }
    let bytes = serde_json::to_vec(&doc).expect("JSON values serialize");
    let parsed = parse_plan(&bytes, Strictness::Strict).map_err(ApiError::Invalid)?;
    Ok(parsed.plan)
}

async fn patch_activity(
    State(store): State<AppState>,
    Path((id, aid)): Path<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let session = session(&store, &id)?;
    let expected = if_match(&headers)?;
    let _writer = session.writer.lock().await;
    let current = session.snapshot();
    if current.plan.get(&aid).is_none() {
        return Err(ApiError::UnknownActivity(aid));
    }
    if let Some(expected) = expected {
        if expected != current.revision.to_string() {
            return Err(ApiError::Stale {
                current: current.revision,
                expected,
            });
        }
    }
    let plan = apply_edit(&current, &aid, &body)?;
    let revision = current.revision + 1;
    let next = Arc::new(blocking(move || Snapshot::build(plan, revision)).await?);
    store
        .save(&session.id, &next)
        .map_err(|e| ApiError::Internal(format!("cannot persist revision: {e}")))?;
    session.replace(next.clone());
    tracing::info!(session = %id, activity = %aid, revision, "rescheduled after edit");
    Ok(with_etag(
        canonical_response(StatusCode::OK, &SessionSummary::of(&id, &next, Vec::new())),
        revision,
    ))
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(addr: std::net::SocketAddr, store: Arc<Store>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
