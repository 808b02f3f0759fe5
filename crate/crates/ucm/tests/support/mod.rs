#![allow(dead_code)]

//! A service on an ephemeral port plus the REST contract checks shared by
//! the service tests and the acceptance run.

use std::future::Future;
use std::path::PathBuf;
use std::pin::Pin;
use std::sync::Arc;

use reqwest::{Client, StatusCode};
use serde_json::{json, Value};
use ucm::cli::{BUNDLED_REQUIREMENTS, DEFAULT_FIXTURES};
use ucm::service::SharedProvider;
use ucm::{load_fixture_dir, router, AppState, SessionStore};
use ucm_core::pipeline::{SequentialIds, StepClock};
use ucm_core::{render_model, Pipeline, Session, UseCaseModel};

pub const ORIGIN: &str = "http://ui.test";

pub struct Server {
    pub base: String,
    pub client: Client,
    pub data: tempfile::TempDir,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
    }
}

impl Server {
    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn data_dir(&self) -> PathBuf {
        self.data.path().to_path_buf()
    }
}

pub fn bundled_replay() -> SharedProvider {
    Arc::new(load_fixture_dir(DEFAULT_FIXTURES.as_ref()).expect("bundled fixtures load"))
}

pub fn bundled_text() -> String {
    std::fs::read_to_string(BUNDLED_REQUIREMENTS).unwrap()
}

pub async fn spawn(provider: SharedProvider) -> Server {
    let data = tempfile::tempdir().unwrap();
    let store = SessionStore::open(data.path()).unwrap();
    let pipeline = Pipeline::new(
        provider,
        Box::new(StepClock::new(1_700_000_000_000, 60_000)) as _,
        Box::new(SequentialIds::new()) as _,
    );
    let app = router(AppState::new(store, pipeline), ORIGIN);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = tokio::sync::oneshot::channel();
    tokio::spawn(ucm::service::serve_with(listener, app, async {
        let _ = rx.await;
    }));
    Server {
        base,
        client: Client::new(),
        data,
        stop: Some(tx),
    }
}

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub async fn call(s: &Server, method: &str, path: &str, body: Option<Value>) -> Result<(StatusCode, Value), String> {
    let m = reqwest::Method::from_bytes(method.as_bytes()).unwrap();
    let mut req = s.client.request(m, s.url(path));
    if let Some(b) = body {
        req = req.json(&b);
    }
    let resp = req.send().await.map_err(|e| e.to_string())?;
    let status = resp.status();
    let text = resp.text().await.map_err(|e| e.to_string())?;
    let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
    Ok((status, value))
}

pub fn expect_error(got: &(StatusCode, Value), status: u16, code: &str) -> Check {
    let (st, body) = got;
    ensure!(st.as_u16() == status, "expected {status}, got {st}: {body}");
    ensure!(body["code"] == code, "expected code {code}, got {body}");
    ensure!(body["message"].as_str().is_some_and(|m| !m.is_empty()), "missing message: {body}");
    Ok(())
}

pub async fn create(s: &Server, title: &str, text: &str) -> Result<Value, String> {
    let (st, body) = call(s, "POST", "/sessions", Some(json!({ "title": title, "text": text }))).await?;
    ensure!(st == StatusCode::CREATED, "create: {st} {body}");
    Ok(body)
}

pub async fn create_library(s: &Server) -> Result<String, String> {
    let body = create(s, "library", &bundled_text()).await?;
    Ok(body["id"].as_str().unwrap().to_string())
}

pub async fn run(s: &Server, id: &str, stage: &str) -> Result<Value, String> {
    let (st, body) = call(s, "POST", &format!("/sessions/{id}/stages/{stage}/run"), None).await?;
    ensure!(st == StatusCode::ACCEPTED, "run {stage}: {st} {body}");
    Ok(body)
}

pub async fn confirm(s: &Server, id: &str) -> Result<Value, String> {
    let (st, body) = call(s, "POST", &format!("/sessions/{id}/confirm"), None).await?;
    ensure!(st == StatusCode::OK, "confirm: {st} {body}");
    Ok(body)
}

pub async fn get_text(s: &Server, path: &str) -> Result<(StatusCode, String), String> {
    let resp = s.client.get(s.url(path)).send().await.map_err(|e| e.to_string())?;
    let st = resp.status();
    Ok((st, resp.text().await.map_err(|e| e.to_string())?))
}

// ---- contract checks; each expects a server backed by the bundled replay fixtures

pub async fn health(s: &Server) -> Check {
    let (st, body) = call(s, "GET", "/health", None).await?;
    ensure!(st == StatusCode::OK, "health {st}");
    ensure!(body["version"] == env!("CARGO_PKG_VERSION"), "version: {body}");
    Ok(())
}

pub async fn create_and_get(s: &Server) -> Check {
    let body = create(s, "Shop", "Customers place orders.").await?;
    ensure!(body["stage"] == "created", "stage: {}", body["stage"]);
    ensure!(body["edit_log"].as_array().is_some_and(Vec::is_empty), "edit_log not empty");
    let id = body["id"].as_str().ok_or("no id")?;
    let (st, got) = call(s, "GET", &format!("/sessions/{id}"), None).await?;
    ensure!(st == StatusCode::OK && got == body, "GET differs: {st} {got}");
    let (st, list) = call(s, "GET", "/sessions", None).await?;
    ensure!(st == StatusCode::OK, "list {st}");
    let found = list["sessions"].as_array().is_some_and(|v| v.iter().any(|x| x["id"] == id && x["stage"] == "created"));
    ensure!(found, "session missing from list: {list}");
    let other = create(s, "Shop", "Customers place orders.").await?;
    ensure!(other["id"] != body["id"], "ids not distinct");
    Ok(())
}

pub async fn error_bodies(s: &Server) -> Check {
    let resp = s
        .client
        .post(s.url("/sessions"))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .map_err(|e| e.to_string())?;
    let st = resp.status();
    let body: Value = resp.json().await.map_err(|e| e.to_string())?;
    expect_error(&(st, body), 400, "E-BAD-REQUEST")?;
    expect_error(&call(s, "POST", "/sessions", Some(json!({ "title": "x" }))).await?, 400, "E-BAD-REQUEST")?;
    expect_error(
        &call(s, "POST", "/sessions", Some(json!({ "title": "x", "text": "  " }))).await?,
        422,
        "E-EMPTY-REQUIREMENTS",
    )?;
    expect_error(&call(s, "GET", "/sessions/nope", None).await?, 404, "E-NOT-FOUND")?;
    expect_error(&call(s, "POST", "/sessions/nope/confirm", None).await?, 404, "E-NOT-FOUND")?;
    expect_error(&call(s, "GET", "/sessions/..%2Fetc/model", None).await?, 404, "E-NOT-FOUND")?;
    expect_error(&call(s, "GET", "/no/such/route", None).await?, 404, "E-NOT-FOUND")?;
    Ok(())
}

pub async fn stage_order_conflicts(s: &Server) -> Check {
    let id = create_library(s).await?;
    let before = call(s, "GET", &format!("/sessions/{id}"), None).await?.1;
    expect_error(&call(s, "POST", &format!("/sessions/{id}/stages/model/run"), None).await?, 409, "E-STAGE-ORDER")?;
    expect_error(&call(s, "POST", &format!("/sessions/{id}/stages/usecases/run"), None).await?, 409, "E-STAGE-ORDER")?;
    expect_error(&call(s, "POST", &format!("/sessions/{id}/confirm"), None).await?, 409, "E-STAGE-ORDER")?;
    expect_error(&call(s, "GET", &format!("/sessions/{id}/export?format=puml"), None).await?, 409, "E-NO-MODEL")?;
    expect_error(&call(s, "GET", &format!("/sessions/{id}/model"), None).await?, 409, "E-NO-MODEL")?;
    expect_error(&call(s, "POST", &format!("/sessions/{id}/stages/bogus/run"), None).await?, 404, "E-UNKNOWN-STAGE")?;
    let after = call(s, "GET", &format!("/sessions/{id}"), None).await?.1;
    ensure!(before == after, "rejected requests changed the session");
    Ok(())
}

pub async fn edits(s: &Server) -> Check {
    let id = create_library(s).await?;
    run(s, &id, "actors").await?;
    let path = format!("/sessions/{id}/edits");
    let remove = json!([{ "stage": "actors", "kind": "remove", "target_id": "A4" }]);
    let (st, body) = call(s, "POST", &path, Some(remove)).await?;
    ensure!(st == StatusCode::OK, "edit {st} {body}");
    ensure!(body["proposed_actors"].as_array().map(Vec::len) == Some(3), "actors: {}", body["proposed_actors"]);
    ensure!(body["edit_log"].as_array().map(Vec::len) == Some(1), "edit_log: {}", body["edit_log"]);

    let wrapped = json!({ "edits": [{ "stage": "actors", "kind": "rename", "target_id": "A1", "payload": { "name": "Patron" } }] });
    let (st, body) = call(s, "POST", &path, Some(wrapped)).await?;
    ensure!(st == StatusCode::OK && body["proposed_actors"][0]["name"] == "Patron", "rename: {st} {body}");

    let unknown = json!([{ "stage": "actors", "kind": "remove", "target_id": "A99" }]);
    expect_error(&call(s, "POST", &path, Some(unknown)).await?, 422, "E-UNKNOWN-TARGET")?;
    let blank = json!([{ "stage": "actors", "kind": "rename", "target_id": "A1", "payload": { "name": " " } }]);
    expect_error(&call(s, "POST", &path, Some(blank)).await?, 422, "E-EMPTY-NAME")?;
    let wrong_stage = json!([{ "stage": "model", "kind": "remove", "target_id": "A1" }]);
    expect_error(&call(s, "POST", &path, Some(wrong_stage)).await?, 409, "E-STAGE-ORDER")?;
    expect_error(&call(s, "POST", &path, Some(json!({ "edits": 5 }))).await?, 400, "E-BAD-REQUEST")?;
    let (_, body) = call(s, "GET", &format!("/sessions/{id}"), None).await?;
    ensure!(body["edit_log"].as_array().map(Vec::len) == Some(2), "failed edits were logged");
    Ok(())
}

/// Full replay run; the puml export must equal render_model of the
/// confirmed model and the JSON export must parse back to the session.
pub async fn full_run(s: &Server) -> Check {
    let id = create_library(s).await?;
    for stage in ["actors", "usecases", "model"] {
        let body = run(s, &id, stage).await?;
        ensure!(body["stage"] == format!("{stage}_proposed"), "after {stage}: {}", body["stage"]);
        confirm(s, &id).await?;
    }
    let (st, model) = call(s, "GET", &format!("/sessions/{id}/model"), None).await?;
    ensure!(st == StatusCode::OK, "model {st}");
    let model: UseCaseModel = serde_json::from_value(model).map_err(|e| e.to_string())?;

    let desc = call(s, "POST", &format!("/sessions/{id}/stages/descriptions/run"), Some(json!({ "usecase_ids": ["UC1", "UC8"] }))).await?;
    ensure!(desc.0 == StatusCode::ACCEPTED, "descriptions: {desc:?}");
    ensure!(desc.1["stage"] == "descriptions_done", "stage after descriptions");
    ensure!(desc.1["descriptions"].as_array().map(Vec::len) == Some(2), "descriptions: {}", desc.1["descriptions"]);
    let unknown = call(s, "POST", &format!("/sessions/{id}/stages/descriptions/run"), Some(json!({ "usecase_ids": ["UC99"] }))).await?;
    expect_error(&unknown, 422, "E-UNKNOWN-USECASE")?;

    let (st, puml) = get_text(s, &format!("/sessions/{id}/export?format=puml")).await?;
    ensure!(st == StatusCode::OK, "export puml {st}");
    ensure!(puml == render_model(&model).unwrap(), "puml export differs from render_model");
    let (st, doc) = get_text(s, &format!("/sessions/{id}/export?format=json")).await?;
    ensure!(st == StatusCode::OK, "export json {st}");
    let session: Session = serde_json::from_str(&doc).map_err(|e| e.to_string())?;
    ensure!(session.model.as_ref() == Some(&model), "json export model differs");
    let (_, stored) = call(s, "GET", &format!("/sessions/{id}"), None).await?;
    ensure!(serde_json::to_value(&session).unwrap() == stored, "json export differs from GET");
    expect_error(&call(s, "GET", &format!("/sessions/{id}/export?format=svg"), None).await?, 400, "E-BAD-REQUEST")?;
    Ok(())
}

pub async fn gateway_failure(s: &Server) -> Check {
    let body = create(s, "other", "Pilots file flight plans with the tower.").await?;
    let id = body["id"].as_str().unwrap();
    let got = call(s, "POST", &format!("/sessions/{id}/stages/actors/run"), None).await?;
    expect_error(&got, 502, "E-NO-FIXTURE")?;
    let (_, after) = call(s, "GET", &format!("/sessions/{id}"), None).await?;
    ensure!(after == body, "failed run changed the session");
    Ok(())
}

pub async fn cors(s: &Server) -> Check {
    let resp = s
        .client
        .request(reqwest::Method::OPTIONS, s.url("/sessions"))
        .header("origin", ORIGIN)
        .header("access-control-request-method", "POST")
        .header("access-control-request-headers", "content-type")
        .send()
        .await
        .map_err(|e| e.to_string())?;
    let allow = resp.headers().get("access-control-allow-origin").and_then(|v| v.to_str().ok());
    ensure!(allow == Some(ORIGIN), "preflight allow-origin: {allow:?}");
    let resp = s
        .client
        .get(s.url("/health"))
        .header("origin", "http://evil.test")
        .send()
        .await
        .map_err(|e| e.to_string())?;
    let allow = resp.headers().get("access-control-allow-origin").and_then(|v| v.to_str().ok());
    ensure!(allow.is_none_or(|o| o == ORIGIN), "foreign origin allowed: {allow:?}");
    Ok(())
}

/// 50 concurrent edits on one session; all must land in the log.
pub async fn hammer(s: &Server) -> Check {
    let id = create_library(s).await?;
    run(s, &id, "actors").await?;
    let path = format!("/sessions/{id}/edits");
    let mut tasks = Vec::new();
    for i in 0..50 {
        let req = s
            .client
            .post(s.url(&path))
            .json(&json!([{ "stage": "actors", "kind": "add", "payload": { "name": format!("Visitor {i}") } }]));
        tasks.push(tokio::spawn(async move { req.send().await.map(|r| r.status()) }));
    }
    for t in tasks {
        let st = t.await.map_err(|e| e.to_string())?.map_err(|e| e.to_string())?;
        ensure!(st == StatusCode::OK, "concurrent edit returned {st}");
    }
    let (_, body) = call(s, "GET", &format!("/sessions/{id}"), None).await?;
    let log = body["edit_log"].as_array().map_or(0, Vec::len);
    ensure!(log == 50, "edit_log length {log}, expected 50");
    let actors = body["proposed_actors"].as_array().map_or(0, Vec::len);
    ensure!(actors == 54, "{actors} actors, expected 54");
    Ok(())
}

async fn drive_library(s: &Server) -> Result<Value, String> {
    let id = create_library(s).await?;
    for stage in ["actors", "usecases", "model"] {
        run(s, &id, stage).await?;
        confirm(s, &id).await?;
    }
    Ok(call(s, "GET", &format!("/sessions/{id}/model"), None).await?.1)
}

/// Two sessions driven concurrently end in the same state as one alone.
pub async fn independent_sessions(s: &Server) -> Check {
    let (a, b) = tokio::join!(drive_library(s), drive_library(s));
    ensure!(a? == b?, "concurrent sessions produced different models");
    Ok(())
}

pub type CheckFn = for<'a> fn(&'a Server) -> Pin<Box<dyn Future<Output = Check> + Send + 'a>>;

macro_rules! checks {
    ($($name:ident),* $(,)?) => {
        pub fn all_checks() -> Vec<(&'static str, CheckFn)> {
            vec![$((stringify!($name), (|s| Box::pin($name(s))) as CheckFn)),*]
        }
    };
}

checks!(
    health,
    create_and_get,
    error_bodies,
    stage_order_conflicts,
    edits,
    full_run,
    gateway_failure,
    cors,
    hammer,
    independent_sessions,
);
