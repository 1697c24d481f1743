use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use popctl_cli::server::{router, AppState};
use popctl_cli::session::{SessionView, Status};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(b) => Body::from(b.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let code = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (code, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn app() -> Router {
    router(Arc::new(AppState::new(64)), None)
}

async fn create_split(app: &Router, m: u64) -> SessionView {
    let (code, v) = call(
        app,
        "POST",
        "/api/sessions",
        Some(json!({"gadget": "split", "m": m})),
    )
    .await;
    assert_eq!(code, StatusCode::CREATED, "{v}");
    serde_json::from_value(v).unwrap()
}

fn even(view: &SessionView) -> Value {
    let mut split = serde_json::Map::new();
    for (q, succ) in &view.legal_successors {
        let c = view.counts[q];
        let k = succ.len() as u64;
        let row: serde_json::Map<String, Value> = succ
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), json!(c / k + u64::from((i as u64) < c % k))))
            .filter(|(_, n)| n != &json!(0))
            .collect();
        split.insert(q.clone(), Value::Object(row));
    }
    json!({ "split": split })
}

#[tokio::test]
async fn view_has_the_documented_fields() {
    let app = app();
    let (_, v) = call(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"gadget": "split", "m": 4})),
    )
    .await;
    for field in [
        "counts",
        "proposedAction",
        "legalSuccessors",
        "status",
        "step",
    ] {
        assert!(v.get(field).is_some(), "missing {field} in {v}");
    }
    assert_eq!(v["proposedAction"], "delta");
    assert_eq!(v["counts"]["q0"], 4);
    assert_eq!(v["legalSuccessors"]["q0"], json!(["q1", "q2"]));
    assert_eq!(v["status"], "Running");
    assert_eq!(v["step"], 0);
}

#[tokio::test]
async fn even_play_wins_within_six_moves() {
    let app = app();
    let mut view = create_split(&app, 4).await;
    let id = view.id.clone();
    let mut moves = 0;
    while view.status == Status::Running {
        let (code, v) = call(
            &app,
            "POST",
            &format!("/api/sessions/{id}/move"),
            Some(even(&view)),
        )
        .await;
        assert_eq!(code, StatusCode::OK, "{v}");
        view = serde_json::from_value(v).unwrap();
        moves += 1;
        assert!(moves <= 6);
    }
    assert_eq!(view.status, Status::Won);
    assert_eq!(view.counts["f"], 4);
    let (code, v) = call(&app, "GET", &format!("/api/sessions/{id}"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(serde_json::from_value::<SessionView>(v).unwrap(), view);
    let (code, _) = call(
        &app,
        "POST",
        &format!("/api/sessions/{id}/move"),
        Some(json!({"split": {}})),
    )
    .await;
    assert_eq!(code, StatusCode::CONFLICT);
}

#[tokio::test]
async fn illegal_splits_are_rejected_with_the_state() {
    let app = app();
    let view = create_split(&app, 4).await;
    let uri = format!("/api/sessions/{}/move", view.id);
    let (code, v) = call(
        &app,
        "POST",
        &uri,
        Some(json!({"split": {"q0": {"q1": 3}}})),
    )
    .await;
    assert_eq!(code, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["state"], "q0");
    assert!(v["error"]
        .as_str()
        .unwrap()
        .contains("moves 3 agents, expected 4"));
    let (code, v) = call(&app, "POST", &uri, Some(json!({"split": {"q0": {"f": 4}}}))).await;
    assert_eq!(code, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["state"], "q0");
    let (_, v) = call(&app, "GET", &format!("/api/sessions/{}", view.id), None).await;
    assert_eq!(v["step"], 0);
}

#[tokio::test]
async fn undo_restores_the_previous_view() {
    let app = app();
    let view = create_split(&app, 4).await;
    let id = &view.id;
    let (code, _) = call(&app, "POST", &format!("/api/sessions/{id}/undo"), None).await;
    assert_eq!(code, StatusCode::CONFLICT);
    let (_, moved) = call(
        &app,
        "POST",
        &format!("/api/sessions/{id}/move"),
        Some(even(&view)),
    )
    .await;
    assert_eq!(moved["step"], 1);
    assert_eq!(moved["counts"]["q1"], 2);
    assert_eq!(moved["counts"]["q2"], 2);
    let (code, v) = call(&app, "POST", &format!("/api/sessions/{id}/undo"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(serde_json::from_value::<SessionView>(v).unwrap(), view);
}

#[tokio::test]
async fn unknown_ids_and_bad_requests() {
    let app = app();
    let (code, v) = call(&app, "GET", "/api/sessions/nope", None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
    assert!(v["error"].as_str().unwrap().contains("nope"));
    let (code, _) = call(&app, "POST", "/api/sessions/nope/undo", None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
    let (code, _) = call(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"gadget": "linear:2", "m": 2})),
    )
    .await;
    assert_eq!(code, StatusCode::UNPROCESSABLE_ENTITY);
    let (code, _) = call(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"nfa": "garbage", "m": 2})),
    )
    .await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    let (code, _) = call(&app, "POST", "/api/sessions", Some(json!({"m": 2}))).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    let (code, _) = call(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"gadget": "split", "m": 0})),
    )
    .await;
    assert_eq!(code, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn text_automata_are_accepted() {
    let app = app();
    let text = "states: a f\ninit: a\ntarget: f\nalphabet: x\na x f\nf x f\n";
    let (code, v) = call(
        &app,
        "POST",
        "/api/sessions",
        Some(json!({"nfa": text, "m": 3})),
    )
    .await;
    assert_eq!(code, StatusCode::CREATED);
    assert_eq!(v["proposedAction"], "x");
}

#[tokio::test]
async fn least_recently_used_session_is_evicted() {
    let state = Arc::new(AppState::new(2));
    let app = router(Arc::clone(&state), None);
    let a = create_split(&app, 2).await;
    let b = create_split(&app, 2).await;
    call(&app, "GET", &format!("/api/sessions/{}", a.id), None).await;
    let _c = create_split(&app, 2).await;
    assert_eq!(state.len(), 2);
    assert_eq!(
        call(&app, "GET", &format!("/api/sessions/{}", a.id), None)
            .await
            .0,
        StatusCode::OK
    );
    assert_eq!(
        call(&app, "GET", &format!("/api/sessions/{}", b.id), None)
            .await
            .0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn static_bundle_is_served_at_root() {
    let dir = tempfile::TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("index.html"),
        "<!doctype html><title>play</title>",
    )
    .unwrap();
    let app = router(Arc::new(AppState::new(4)), Some(dir.path().to_path_buf()));
    let resp = app
        .clone()
        .oneshot(Request::builder().uri("/").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    assert!(body.starts_with(b"<!doctype html>"));
    let (code, _) = call(&app, "GET", "/api/sessions/x", None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn concurrent_moves_on_distinct_sessions() {
    let app = app();
    let mut handles = Vec::new();
    for _ in 0..8 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            let mut view = create_split(&app, 5).await;
            while view.status == Status::Running {
                let (_, v) = call(
                    &app,
                    "POST",
                    &format!("/api/sessions/{}/move", view.id),
                    Some(even(&view)),
                )
                .await;
                view = serde_json::from_value(v).unwrap();
            }
            view.status
        }));
    }
    for h in handles {
        assert_eq!(h.await.unwrap(), Status::Won);
    }
}
