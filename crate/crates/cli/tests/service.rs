use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use crosscheck_cli::{router, Store};
use crosscheck_core::io::{build_report, serialize_explanation, serialize_schedule};
use crosscheck_core::{parse_plan, run_scheduler, Strictness};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn plan_text(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(format!("{name}.plan.json"));
    std::fs::read_to_string(path).unwrap()
}

struct Reply {
    status: StatusCode,
    etag: Option<String>,
    text: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<String>, if_match: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(tag) = if_match {
        req = req.header(header::IF_MATCH, tag);
    }
    let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let etag = resp
        .headers()
        .get(header::ETAG)
        .map(|v| v.to_str().unwrap().to_string());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        etag,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, None, None).await
}

async fn create(app: &Router, name: &str) -> String {
    let r = call(app, Method::POST, "/sessions", Some(plan_text(name)), None).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
    assert_eq!(r.etag.as_deref(), Some("\"1\""));
    r.json()["session"].as_str().unwrap().to_string()
}

fn app() -> Router {
    router(Arc::new(Store::new()))
}

#[tokio::test]
async fn create_and_summarize() {
    let app = app();
    let id = create(&app, "uhf_window").await;
    let s = get(&app, &format!("/sessions/{id}")).await.json();
    assert_eq!(s["revision"], 1);
    assert_eq!(s["failed"], json!(["relay_science"]));
    assert_eq!(s["complete"], false);
}

#[tokio::test]
async fn invalid_plan_is_unprocessable() {
    let app = app();
    let r = call(&app, Method::POST, "/sessions", Some("{\"format_version\": 1, \"bogus\": 2}".into()), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["issues"][0]["path"], "$.bogus");
    let r = call(&app, Method::POST, "/sessions?lenient=true", Some("{\"format_version\": 1, \"bogus\": 2}".into()), None).await;
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.json()["warnings"][0]["path"], "$.bogus");
}

#[tokio::test]
async fn unknown_session_and_activity_are_not_found() {
    let app = app();
    assert_eq!(get(&app, "/sessions/nope/schedule").await.status, StatusCode::NOT_FOUND);
    let id = create(&app, "desk").await;
    let r = get(&app, &format!("/sessions/{id}/activities/ghost")).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["error"], "unknown_activity");
    let r = get(&app, &format!("/sessions/{id}/activities/ghost/explanation")).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    let r = get(&app, &format!("/sessions/{id}/activities/mastcam_mosaic/explanation")).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["error"], "not_failed");
}

#[tokio::test]
async fn step_zero_has_only_pending_lane() {
    let app = app();
    let id = create(&app, "dependency_resource").await;
    let lanes = get(&app, &format!("/sessions/{id}/schedule?step=0")).await.json();
    assert_eq!(lanes["scheduled"], json!([]));
    assert_eq!(lanes["failed"], json!([]));
    assert_eq!(lanes["yet_to_schedule"].as_array().unwrap().len(), lanes["steps"].as_u64().unwrap() as usize);

    let full = get(&app, &format!("/sessions/{id}/schedule")).await.json();
    assert_eq!(full["yet_to_schedule"], json!([]));
    assert_eq!(full["failed"][0]["id"], "apxs_placement");
    assert_eq!(full["failed"][0]["outcome"], "failed_phase1");

    let r = get(&app, &format!("/sessions/{id}/schedule?step=99")).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = get(&app, &format!("/sessions/{id}/schedule?step=minus")).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn lanes_partition_the_plan_at_every_step() {
    let app = app();
    let id = create(&app, "dependency_resource").await;
    let steps = get(&app, &format!("/sessions/{id}/schedule")).await.json()["steps"].as_u64().unwrap();
    for k in 0..=steps {
        let lanes = get(&app, &format!("/sessions/{id}/schedule?step={k}")).await.json();
        let n = ["scheduled", "yet_to_schedule", "failed"]
            .iter()
            .map(|lane| lanes[lane].as_array().unwrap().len())
            .sum::<usize>();
        assert_eq!(n as u64, steps, "step {k}");
        assert_eq!(lanes["yet_to_schedule"].as_array().unwrap().len() as u64, steps - k);
    }
}

#[tokio::test]
async fn activity_detail_has_valid_intervals() {
    let app = app();
    let id = create(&app, "uhf_window").await;
    let d = get(&app, &format!("/sessions/{id}/activities/relay_science")).await.json();
    assert_eq!(d["status"], "failed_phase1");
    assert_eq!(d["step"], 3);
    assert_eq!(d["valid"]["final"], json!([]));
    assert_eq!(d["valid"]["per_kind"]["execution"], json!([[30000, 36001]]));
    let d = get(&app, &format!("/sessions/{id}/activities/navcam_pan")).await.json();
    assert_eq!(d["status"], "scheduled");
    assert!(d["start"].is_i64());
}

#[tokio::test]
async fn explanation_is_cached_and_matches_core() {
    let store = Arc::new(Store::new());
    let app = router(store.clone());
    let id = create(&app, "peak_power").await;
    let uri = format!("/sessions/{id}/activities/chemcam_lidar/explanation");
    let a = get(&app, &uri).await;
    let b = get(&app, &uri).await;
    assert_eq!(a.status, StatusCode::OK);
    assert_eq!(a.text, b.text);
    assert_eq!(store.get(&id).unwrap().snapshot().cached_explanations(), 1);
    let e = a.json();
    assert_eq!(e["phase"], "phase2");
    assert!(e["phase2"]["reasons"].as_array().unwrap().contains(&json!("peak_power_exceeded")));
    assert!(!e["notes"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn files_are_byte_identical_to_cli_output() {
    let app = app();
    for name in ["desk", "uhf_window", "dependency_resource", "state_requirement", "low_energy", "peak_power", "preheat_operability"] {
        let id = create(&app, name).await;
        let plan = parse_plan(plan_text(name).as_bytes(), Strictness::Strict).unwrap().plan;
        let schedule = run_scheduler(&plan);
        let sched = get(&app, &format!("/sessions/{id}/sched")).await;
        assert_eq!(sched.text, serialize_schedule(&schedule, plan.config()), "{name}");
        let report = get(&app, &format!("/sessions/{id}/report")).await;
        let expected = serialize_explanation(&build_report(&plan, &schedule, None).unwrap());
        assert_eq!(report.text, expected, "{name}");
    }
}

#[tokio::test]
async fn energy_and_power_views() {
    let app = app();
    let id = create(&app, "desk").await;
    let e = get(&app, &format!("/sessions/{id}/energy?t=21600")).await.json();
    assert_eq!(e["consumers"], json!([]));
    assert_eq!(e["total_wh"], 0.0);
    let e = get(&app, &format!("/sessions/{id}/energy?t=64800")).await.json();
    let consumers = e["consumers"].as_array().unwrap();
    assert!(consumers.windows(2).all(|w| w[0]["energy_wh"].as_f64() >= w[1]["energy_wh"].as_f64()));
    assert!(consumers.iter().any(|c| c["id"] == "mastcam_mosaic"));

    let p = get(&app, &format!("/sessions/{id}/power?t=32400")).await.json();
    assert!(p["users"].as_array().unwrap().iter().any(|u| u["id"] == "mastcam_mosaic"));
    let sum: f64 = p["users"].as_array().unwrap().iter().map(|u| u["watts"].as_f64().unwrap()).sum();
    assert!((sum - p["total_w"].as_f64().unwrap()).abs() < 1e-6);

    assert_eq!(get(&app, &format!("/sessions/{id}/energy?t=1")).await.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(get(&app, &format!("/sessions/{id}/power?t=64800")).await.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(get(&app, &format!("/sessions/{id}/power")).await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn widening_a_window_schedules_the_activity() {
    let app = app();
    let id = create(&app, "uhf_window").await;
    let uri = format!("/sessions/{id}/activities/relay_science");
    let edit = json!({"windows": [{"start": 30000, "end": 44000}]}).to_string();
    let r = call(&app, Method::PATCH, &uri, Some(edit.clone()), Some("\"1\"")).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    assert_eq!(r.etag.as_deref(), Some("\"2\""));
    assert_eq!(r.json()["complete"], true);
    let lanes = get(&app, &format!("/sessions/{id}/schedule")).await.json();
    assert!(lanes["scheduled"].as_array().unwrap().iter().any(|p| p["id"] == "relay_science"));

    // Same result as posting the edited plan from scratch.
    let mut doc: Value = serde_json::from_str(&plan_text("uhf_window")).unwrap();
    for a in doc["activities"].as_array_mut().unwrap() {
        if a["id"] == "relay_science" {
            a["windows"] = json!([{"start": 30000, "end": 44000}]);
        }
    }
    let fresh = call(&app, Method::POST, "/sessions", Some(doc.to_string()), None).await.json();
    let fresh_id = fresh["session"].as_str().unwrap();
    let a = get(&app, &format!("/sessions/{id}/sched")).await.text;
    let b = get(&app, &format!("/sessions/{fresh_id}/sched")).await.text;
    assert_eq!(a, b);
    let plan = parse_plan(doc.to_string().as_bytes(), Strictness::Strict).unwrap().plan;
    assert_eq!(a, serialize_schedule(&run_scheduler(&plan), plan.config()));
}

#[tokio::test]
async fn stale_and_invalid_edits_are_rejected() {
    let app = app();
    let id = create(&app, "uhf_window").await;
    let uri = format!("/sessions/{id}/activities/relay_science");
    let ok = json!({"energy_rate": 5.0}).to_string();
    assert_eq!(call(&app, Method::PATCH, &uri, Some(ok.clone()), Some("\"1\"")).await.status, StatusCode::OK);
    let r = call(&app, Method::PATCH, &uri, Some(ok.clone()), Some("\"1\"")).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["revision"], 2);

    let bad = json!({"windows": [{"start": 40000, "end": 30000}]}).to_string();
    let r = call(&app, Method::PATCH, &uri, Some(bad), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(r.json()["issues"][0]["path"].as_str().unwrap().contains("windows[0]"));
    let r = call(&app, Method::PATCH, &uri, Some(json!({"colour": 1}).to_string()), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = call(&app, Method::PATCH, &uri, Some(json!({"id": "other"}).to_string()), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = call(&app, Method::PATCH, &uri, Some("[1]".into()), None).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let r = call(&app, Method::PATCH, &format!("/sessions/{id}/activities/ghost"), Some(ok.clone()), None).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);

    // Rejected edits leave the revision alone.
    assert_eq!(get(&app, &format!("/sessions/{id}")).await.json()["revision"], 2);
    // A no-op edit still bumps the revision.
    let r = call(&app, Method::PATCH, &uri, Some("{}".into()), Some("W/\"2\"")).await;
    assert_eq!(r.json()["revision"], 3);
}

#[tokio::test]
async fn edits_invalidate_cached_explanations() {
    let store = Arc::new(Store::new());
    let app = router(store.clone());
    let id = create(&app, "low_energy").await;
    let uri = format!("/sessions/{id}/activities/mastcam_mosaic");
    assert_eq!(get(&app, &format!("{uri}/explanation")).await.status, StatusCode::OK);
    assert_eq!(store.get(&id).unwrap().snapshot().cached_explanations(), 1);
    let r = call(&app, Method::PATCH, &uri, Some(json!({"energy_rate": 10.0}).to_string()), None).await;
    assert_eq!(r.json()["complete"], true);
    assert_eq!(store.get(&id).unwrap().snapshot().cached_explanations(), 0);
    assert_eq!(get(&app, &format!("{uri}/explanation")).await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn concurrent_edits_serialize() {
    let app = app();
    let id = create(&app, "desk").await;
    let uri = format!("/sessions/{id}/activities/mastcam_mosaic");
    let tasks: Vec<_> = (0..8)
        .map(|i| {
            let app = app.clone();
            let uri = uri.clone();
            tokio::spawn(async move {
                call(&app, Method::PATCH, &uri, Some(json!({"energy_rate": 10.0 + i as f64}).to_string()), None).await
            })
        })
        .collect();
    let mut revisions = Vec::new();
    for t in tasks {
        let r = t.await.unwrap();
        assert_eq!(r.status, StatusCode::OK);
        revisions.push(r.json()["revision"].as_u64().unwrap());
    }
    revisions.sort();
    assert_eq!(revisions, (2..=9).collect::<Vec<_>>());
}

#[tokio::test]
async fn persisted_sessions_reload() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let app = router(Arc::new(Store::persistent(dir.path()).unwrap()));
        let id = create(&app, "uhf_window").await;
        let uri = format!("/sessions/{id}/activities/relay_science");
        let edit = json!({"windows": [{"start": 30000, "end": 44000}]}).to_string();
        assert_eq!(call(&app, Method::PATCH, &uri, Some(edit), None).await.status, StatusCode::OK);
        id
    };
    assert!(dir.path().join(&id).join("rev-2.plan.json").exists());
    let store = Arc::new(Store::persistent(dir.path()).unwrap());
    assert_eq!(store.len(), 1);
    let app = router(store);
    let s = get(&app, &format!("/sessions/{id}")).await.json();
    assert_eq!(s["revision"], 2);
    assert_eq!(s["complete"], true);
}
