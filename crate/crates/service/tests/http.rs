use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use csp_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> axum::Router {
    router(AppState::new(ServiceConfig {
        budget: 1_000_000,
        idle_expiry: Duration::from_secs(3600),
    }))
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn create(app: &axum::Router, body: Value) -> (StatusCode, Value) {
    call(app, "POST", "/games", Some(body)).await
}

#[tokio::test]
async fn human_plays_wheel_and_engine_answers_two_ahead() {
    let app = app();
    let (st, v) = create(&app, json!({"instance": "wheel5", "mode": {"kind": "human_vs_engine", "human": "I"}})).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(v["turn"], "I");
    let id = v["id"].as_str().unwrap().to_string();
    let (st, v) = call(&app, "POST", &format!("/games/{id}/moves"), Some(json!({"piece": 0, "target": 2}))).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["engine_reply"], json!({"piece": 0, "target": 4}));
    assert_eq!((v["score_i"].as_u64(), v["score_ii"].as_u64()), (Some(1), Some(1)));
    let (st, g) = call(&app, "GET", &format!("/games/{id}"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(g["history"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn move_errors_map_to_statuses() {
    let app = app();
    let (_, v) = create(&app, json!({"instance": "wheel-3", "mode": {"kind": "human_vs_engine", "human": "I"}})).await;
    let id = v["id"].as_str().unwrap().to_string();
    let uri = format!("/games/{id}/moves");
    let (st, e) = call(&app, "POST", &uri, Some(json!({"piece": 0, "target": 0}))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(e["error"].is_string());
    let (st, _) = call(&app, "POST", &uri, Some(json!({"bogus": 1}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    // finished engine-only game: nobody's turn
    let (_, v) = create(&app, json!({"instance": "wheel-3", "mode": {"kind": "engine_vs_engine"}})).await;
    let id = v["id"].as_str().unwrap();
    let (st, _) = call(&app, "POST", &format!("/games/{id}/moves"), Some(json!({"piece": 0, "target": 1}))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (st, _) = call(&app, "GET", "/games/nope", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn inline_instances_are_validated() {
    let app = app();
    let bad = json!({"version": 1, "directed": false, "vertices": 2, "edges": [[0, 1]],
        "customers": [0], "starts_i": [0], "starts_ii": [0], "passing_allowed": false});
    let (st, e) = create(&app, json!({"instance": bad, "mode": {"kind": "human_vs_human"}})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST, "{e}");
    let good = json!({"version": 1, "directed": false, "vertices": 2, "edges": [[0, 1]],
        "customers": [1], "starts_i": [0], "starts_ii": [0], "passing_allowed": false});
    let (st, v) = create(&app, json!({"instance": good, "mode": {"kind": "human_vs_human"}})).await;
    assert_eq!(st, StatusCode::CREATED);
    let id = v["id"].as_str().unwrap();
    let (_, v) = call(&app, "POST", &format!("/games/{id}/moves"), Some(json!({"piece": 0, "target": 1}))).await;
    assert_eq!(v["terminal"], true);
    assert_eq!(v["outcome"], "Ended(1)");
    let (st, a) = call(&app, "GET", &format!("/games/{id}/analysis"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(a["value"], "Ended(1)");
    assert_eq!(a["moves"], json!([]));
    let (st, _) = create(&app, json!({"instance": "no-such", "mode": {"kind": "human_vs_human"}})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = call(&app, "POST", "/games", None).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn zugzwang_analysis_has_only_losing_moves() {
    let app = app();
    let (_, v) = create(&app, json!({"instance": "zugzwang", "mode": {"kind": "human_vs_human"}})).await;
    let id = v["id"].as_str().unwrap();
    let (st, a) = call(&app, "GET", &format!("/games/{id}/analysis"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(a["exact"], true);
    let moves = a["moves"].as_array().unwrap();
    assert!(!moves.is_empty());
    for m in moves {
        let s = m["value"].as_str().unwrap();
        let margin: i32 = s.trim_start_matches("Ended(").trim_end_matches(')').parse().unwrap();
        assert!(margin <= -1, "{s}");
    }
}

#[tokio::test]
async fn over_budget_analysis_is_refused() {
    let app = router(AppState::new(ServiceConfig {
        budget: 50,
        idle_expiry: Duration::from_secs(3600),
    }));
    let (st, v) = create(&app, json!({"instance": "wheel-9", "mode": {"kind": "human_vs_human"}})).await;
    assert_eq!(st, StatusCode::CREATED);
    let id = v["id"].as_str().unwrap();
    let (st, a) = call(&app, "GET", &format!("/games/{id}/analysis"), None).await;
    assert_eq!(st, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(a, json!({"available": false}));
    let (st, e) = create(&app, json!({"instance": "wheel-9", "mode": {"kind": "human_vs_human"}, "analysis": true})).await;
    assert_eq!(st, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(e["available"], false);
}

#[tokio::test]
async fn engine_vs_engine_matches_solver_value() {
    let app = app();
    let (_, v) = create(&app, json!({"instance": "wheel-7", "mode": {"kind": "engine_vs_engine"}})).await;
    assert_eq!(v["terminal"], true);
    assert_eq!(v["outcome"], v["start_value"]);
    assert_eq!(v["outcome"], "Ended(-5)");
}

#[tokio::test]
async fn idle_sessions_expire() {
    let state = AppState::new(ServiceConfig {
        budget: 1_000_000,
        idle_expiry: Duration::from_millis(50),
    });
    let app = router(state.clone());
    let (_, v) = create(&app, json!({"instance": "wheel-3", "mode": {"kind": "human_vs_human"}})).await;
    let id = v["id"].as_str().unwrap().to_string();
    assert_eq!(state.session_count(), 1);
    tokio::time::sleep(Duration::from_millis(80)).await;
    let (st, _) = call(&app, "GET", &format!("/games/{id}"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(state.session_count(), 0);
}

#[tokio::test]
async fn catalog_lists_entries() {
    let app = app();
    let (st, c) = call(&app, "GET", "/catalog", None).await;
    assert_eq!(st, StatusCode::OK);
    let names: Vec<&str> = c["entries"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"wheel-5") && names.contains(&"zugzwang"));
    assert!(c["missing"].is_array());
}
