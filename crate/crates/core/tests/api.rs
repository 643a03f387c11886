mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use common::Toy;
use http_body_util::BodyExt;
use pastsearch::sample::*;
use pastsearch::service::router;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Reply {
    status: StatusCode,
    headers: axum::http::HeaderMap,
    bytes: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.bytes)))
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header(header::CONTENT_TYPE, "application/json");
    }
    let req = req.body(Body::from(body.unwrap_or("").to_owned())).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let headers = res.headers().clone();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, headers, bytes }
}

fn app(toy: &Toy) -> Router {
    router(Arc::new(toy.engine()), &["http://localhost:5173".to_owned()])
}

fn new_session(start: i32, end: i32) -> String {
    json!({
        "motivation": "memory of the terror",
        "period": {"label": "French Revolution", "start_year": start, "end_year": end},
        "roots": [FRENCH_REVOLUTION]
    })
    .to_string()
}

async fn create(app: &Router) -> String {
    let r = call(app, Method::POST, "/sessions", Some(&new_session(1789, 1799))).await;
    assert_eq!(r.status, StatusCode::CREATED);
    r.json()["session"]["session_id"].as_str().unwrap().to_owned()
}

fn assert_error(r: &Reply, status: StatusCode, code: &str) {
    assert_eq!(r.status, status, "{}", String::from_utf8_lossy(&r.bytes));
    let body = r.json();
    assert_eq!(body["error"], code);
    assert!(body["message"].is_string());
    assert_eq!(body.as_object().unwrap().len(), 2);
}

#[tokio::test]
async fn categories_typeahead() {
    let toy = Toy::new(5, 1);
    let app = app(&toy);
    let r = call(&app, Method::GET, "/categories?q=French", None).await;
    assert_eq!(r.status, StatusCode::OK);
    let hits = r.json();
    let labels: Vec<&str> = hits.as_array().unwrap().iter().map(|m| m["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["French Revolution", "French First Republic"]);
    let r = call(&app, Method::GET, "/categories?q=", None).await;
    assert_eq!(r.json(), json!([]));
    let r = call(&app, Method::GET, "/categories?q=e&k=1", None).await;
    assert_eq!(r.json().as_array().unwrap().len(), 1);
    let r = call(&app, Method::GET, "/categories?q=e&k=abc", None).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_query");
}

#[tokio::test]
async fn session_creation_errors() {
    let toy = Toy::new(5, 1);
    let app = app(&toy);
    let r = call(&app, Method::POST, "/sessions", Some(&new_session(1800, 1700))).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_period");
    let body = json!({"period": {"start_year": 1789, "end_year": 1799}, "roots": ["http://x.org/Category:None"]});
    let r = call(&app, Method::POST, "/sessions", Some(&body.to_string())).await;
    assert_error(&r, StatusCode::NOT_FOUND, "unknown_category");
    let r = call(&app, Method::POST, "/sessions", Some("{not json")).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_body");
    let r = call(&app, Method::POST, "/sessions", Some(r#"{"roots": []}"#)).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_body");
    let r = call(&app, Method::GET, "/sessions/nope/assessment", None).await;
    assert_error(&r, StatusCode::NOT_FOUND, "session_not_found");
    let r = call(&app, Method::GET, "/nowhere", None).await;
    assert_error(&r, StatusCode::NOT_FOUND, "not_found");
}

#[tokio::test]
async fn full_workflow() {
    let toy = Toy::new(30, 7);
    let app = app(&toy);
    let r = call(&app, Method::POST, "/sessions", Some(&new_session(1789, 1799))).await;
    assert_eq!(r.status, StatusCode::CREATED);
    let created = r.json();
    let id = created["session"]["session_id"].as_str().unwrap().to_owned();
    assert_eq!(created["categories"].as_array().unwrap().len(), 3);
    assert_eq!(created["categories"][0]["entities"][0]["class"], "borderline");

    let r = call(&app, Method::GET, &format!("/sessions/{id}/assessment"), None).await;
    assert_eq!(r.status, StatusCode::OK);
    let a = r.json();
    for c in a["categories"].as_array().unwrap() {
        assert!(c["preview"].as_array().unwrap().len() <= 5);
    }

    let decision = json!({"action": "deselect", "target_kind": "entity", "target": REIGN_OF_TERROR}).to_string();
    let r = call(&app, Method::POST, &format!("/sessions/{id}/decisions"), Some(&decision)).await;
    assert_eq!(r.status, StatusCode::OK);
    let d = r.json();
    assert_eq!(d["log_length"], 8);
    assert!(!d["selection"]["entities"].as_array().unwrap().contains(&json!(REIGN_OF_TERROR)));

    let bad = json!({"action": "select", "target_kind": "entity", "target": "http://example.org/x"}).to_string();
    let r = call(&app, Method::POST, &format!("/sessions/{id}/decisions"), Some(&bad)).await;
    assert_error(&r, StatusCode::NOT_FOUND, "unknown_target");
    let r = call(&app, Method::POST, &format!("/sessions/{id}/decisions"), Some(r#"{"action":"maybe"}"#)).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_body");

    let r = call(&app, Method::GET, &format!("/sessions/{id}/results?page=1&page_size=5"), None).await;
    let page = r.json();
    assert_eq!(page["page_size"], 5);
    let total = page["total"].as_u64().unwrap();
    let r = call(&app, Method::GET, &format!("/sessions/{id}/results?page=999"), None).await;
    assert_eq!(r.json()["total"].as_u64().unwrap(), total);
    assert_eq!(r.json()["fragments"], json!([]));
    let r = call(&app, Method::GET, &format!("/sessions/{id}/results?page=0"), None).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_page");

    let r = call(&app, Method::GET, &format!("/sessions/{id}/analytics?group_by=year"), None).await;
    let years = r.json();
    let r = call(&app, Method::GET, &format!("/sessions/{id}/analytics?group_by=meta:party"), None).await;
    let parties = r.json();
    let sum = |v: &Value| v["counts"].as_object().unwrap().values().map(|n| n.as_u64().unwrap()).sum::<u64>();
    assert_eq!(sum(&years), sum(&parties));
    assert_eq!(sum(&years), years["total"].as_u64().unwrap());
    let r = call(&app, Method::GET, &format!("/sessions/{id}/analytics?group_by=decade"), None).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_group_by");

    let first = &page["fragments"][0];
    let body = json!({"doc_id": first["doc_id"], "sentence_index": first["sentence_index"]}).to_string();
    let r = call(&app, Method::POST, &format!("/sessions/{id}/assertions"), Some(&body)).await;
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.json()["seq"], 9);
    let body = json!({"doc_id": "doc-9999", "sentence_index": 0}).to_string();
    let r = call(&app, Method::POST, &format!("/sessions/{id}/assertions"), Some(&body)).await;
    assert_error(&r, StatusCode::NOT_FOUND, "unknown_fragment");

    let r = call(&app, Method::GET, &format!("/sessions/{id}/export"), None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.headers[header::CONTENT_TYPE], "application/json");
    assert!(r.headers[header::CONTENT_DISPOSITION].to_str().unwrap().starts_with("attachment"));
    let export = r.json();
    let keys: std::collections::BTreeSet<&str> = export.as_object().unwrap().keys().map(String::as_str).collect();
    let expected =
        ["session_id", "created_at", "motivation", "period", "roots", "max_depth", "decisions", "assertions"];
    assert_eq!(keys, expected.into_iter().collect());
    let text = String::from_utf8(r.bytes.clone()).unwrap();
    let positions: Vec<usize> = expected.iter().map(|k| text.find(&format!("\n  \"{k}\"")).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]), "top-level keys out of order");
    assert_eq!(export["decisions"].as_array().unwrap().len(), 8);
    assert_eq!(export["assertions"].as_array().unwrap().len(), 1);
    let on_disk = std::fs::read(toy.config.session_dir.join(format!("{id}.json"))).unwrap();
    assert_eq!(r.bytes, on_disk);
}

#[tokio::test]
async fn cors_preflight() {
    let toy = Toy::new(3, 1);
    let app = app(&toy);
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/sessions")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert_eq!(res.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://localhost:5173");
    let _ = create(&app).await;
}

#[tokio::test]
async fn serves_over_tcp() {
    let toy = Toy::new(3, 1);
    let app = app(&toy);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });

    let response = tokio::task::spawn_blocking(move || {
        use std::io::{Read, Write};
        let mut stream = std::net::TcpStream::connect(addr).unwrap();
        write!(stream, "GET /categories?q=mont HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
        let mut out = String::new();
        stream.read_to_string(&mut out).unwrap();
        out
    })
    .await
    .unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("Montagnards"));
}
