use std::io::Write;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use courseqa::{router, AppState, CorpusSource};
use courseqa_core::app::Pipeline;

fn state() -> Arc<AppState> {
    let graph = CorpusSource::Bundled.load().unwrap().graph;
    Arc::new(AppState::new(
        Pipeline::seed(),
        CorpusSource::Bundled,
        graph,
    ))
}

async fn call(app: Router, req: Request<Body>) -> (StatusCode, Value) {
    let res = app.oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

fn ask(body: &str) -> Request<Body> {
    Request::post("/api/ask")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_owned()))
        .unwrap()
}

#[tokio::test]
async fn ask_answers_on_demo_corpus() {
    let body = json!({ "question": "Ai đã viết sách Toan?" }).to_string();
    let (status, v) = call(router(state(), None), ask(&body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["rule_id"], "Q1.1a");
    assert_eq!(v["answers"], json!(["Nguyễn Văn An"]));
    assert!(v["generated_query"]
        .as_str()
        .unwrap()
        .starts_with("SELECT DISTINCT ?authorname"));
    assert!(v["parse_tree"].as_str().unwrap().contains("verb_write"));
    assert!(v["elapsed_ms"].as_f64().unwrap() >= 0.0);
}

#[tokio::test]
async fn count_answers_are_objects() {
    let body = json!({ "question": "Có bao nhiêu sách trong thư viện?" }).to_string();
    let (status, v) = call(router(state(), None), ask(&body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["answers"], json!({ "count": 25 }));
}

#[tokio::test]
async fn malformed_question_is_no_parse() {
    let body = json!({ "question": "xin chào" }).to_string();
    let (status, v) = call(router(state(), None), ask(&body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "no_parse");
    assert!(v["answers"].is_null());
    assert!(v["failure"]["position"].is_u64());
}

#[tokio::test]
async fn unknown_title_is_empty() {
    let body = json!({ "question": "Ai đã viết sách KhongTonTai?" }).to_string();
    let (_, v) = call(router(state(), None), ask(&body)).await;
    assert_eq!(v["status"], "empty");
    assert_eq!(v["answers"], json!([]));
}

#[tokio::test]
async fn empty_question_is_rejected() {
    for q in ["", "   "] {
        let (status, v) = call(
            router(state(), None),
            ask(&json!({ "question": q }).to_string()),
        )
        .await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert_eq!(v, json!({ "error": "empty question" }));
    }
}

#[tokio::test]
async fn bad_json_is_rejected() {
    let (status, v) = call(router(state(), None), ask("{\"q\":1}")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].is_string());
}

#[tokio::test]
async fn health_reports_courses() {
    let req = Request::get("/api/health").body(Body::empty()).unwrap();
    let (status, v) = call(router(state(), None), req).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v, json!({ "status": "up", "courses": 25 }));
}

#[tokio::test]
async fn stats_reports_counts() {
    let req = Request::get("/api/stats").body(Body::empty()).unwrap();
    let (status, v) = call(router(state(), None), req).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["courses"], 25);
    assert!(v["triples"].as_u64().unwrap() > 25);
    assert!(v["entities"].as_u64().unwrap() > 25);
}

#[tokio::test]
async fn static_dir_serves_other_paths() {
    let dir = tempdir();
    std::fs::write(dir.join("index.html"), "<h1>hi</h1>").unwrap();
    let app = router(state(), Some(&dir));
    let res = app
        .oneshot(Request::get("/index.html").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&bytes[..], b"<h1>hi</h1>");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn reload_swaps_the_snapshot() {
    let path = std::env::temp_dir().join(format!("courseqa-reload-{}.jsonl", std::process::id()));
    let write = |text: &str| {
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();
    };
    write("{\"id\":\"1\",\"name\":\"Toan\",\"authors\":[\"A\"]}\n");
    let source = CorpusSource::File(path.clone());
    let st = AppState::new(
        Pipeline::seed(),
        source.clone(),
        source.load().unwrap().graph,
    );
    let before = st.snapshot();
    write("{\"id\":\"1\",\"name\":\"Toan\",\"authors\":[\"A\"]}\n{\"id\":\"2\",\"name\":\"Van\",\"authors\":[\"B\"]}\n");
    let report = st.reload().unwrap();
    assert_eq!(report.records, 2);
    assert_eq!(before.stats().courses, 1);
    assert_eq!(st.snapshot().stats().courses, 2);
    std::fs::remove_file(&path).unwrap();
    assert!(st.reload().is_err());
    assert_eq!(st.snapshot().stats().courses, 2);
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("courseqa-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
