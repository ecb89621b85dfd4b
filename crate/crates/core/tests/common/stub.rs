//! Scripted inference server speaking the `POST /classify` protocol.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

pub enum Reply {
    Scores(Vec<Vec<f64>>),
    Status(u16, String),
    Delay(Duration, Box<Reply>),
}

type Script = Arc<dyn Fn(&[String]) -> Reply + Send + Sync>;

#[derive(Clone)]
struct StubState {
    script: Script,
    hits: Arc<AtomicUsize>,
}

pub struct StubServer {
    pub url: String,
    hits: Arc<AtomicUsize>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    handle: Option<thread::JoinHandle<()>>,
}

async fn classify(State(state): State<StubState>, Json(body): Json<Value>) -> Response {
    state.hits.fetch_add(1, Ordering::SeqCst);
    let texts: Vec<String> = body["texts"]
        .as_array()
        .map(|a| a.iter().filter_map(|t| t.as_str().map(str::to_string)).collect())
        .unwrap_or_default();
    let mut reply = (state.script)(&texts);
    loop {
        match reply {
            Reply::Delay(d, inner) => {
                tokio::time::sleep(d).await;
                reply = *inner;
            }
            Reply::Scores(scores) => return Json(json!({ "scores": scores })).into_response(),
            Reply::Status(code, body) => {
                return (StatusCode::from_u16(code).unwrap(), body).into_response();
            }
        }
    }
}

impl StubServer {
    pub fn start(script: impl Fn(&[String]) -> Reply + Send + Sync + 'static) -> Self {
        let hits = Arc::new(AtomicUsize::new(0));
        let state = StubState { script: Arc::new(script), hits: hits.clone() };
        let app = Router::new().route("/classify", post(classify)).with_state(state);
        let (url, shutdown, handle) = spawn_router(app);
        Self { url, hits, shutdown: Some(shutdown), handle: Some(handle) }
    }

    /// Scores looked up by exact text; unknown texts get zeros.
    pub fn lookup(table: HashMap<String, [f64; 6]>) -> Self {
        Self::start(move |texts| {
            Reply::Scores(texts.iter().map(|t| table.get(t).copied().unwrap_or([0.0; 6]).to_vec()).collect())
        })
    }

    pub fn constant(value: f64) -> Self {
        Self::start(move |texts| Reply::Scores(vec![vec![value; 6]; texts.len()]))
    }

    pub fn requests(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// Serve `app` on an ephemeral local port from a background thread.
pub fn spawn_router(
    app: Router,
) -> (String, tokio::sync::oneshot::Sender<()>, thread::JoinHandle<()>) {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let handle = thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
        });
        rt.shutdown_timeout(Duration::from_secs(1));
    });
    (url, tx, handle)
}

/// An address nothing listens on.
pub fn dead_endpoint() -> String {
    let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", l.local_addr().unwrap());
    drop(l);
    url
}

/// `(status, body)` for a request, whatever the status.
pub fn http(method: &str, url: &str, body: Option<&str>) -> (u16, String) {
    let req = ureq::request(method, url).timeout(Duration::from_secs(10));
    let result = match body {
        Some(b) => req.set("content-type", "application/json").send_string(b),
        None => req.call(),
    };
    match result {
        Ok(resp) => (resp.status(), resp.into_string().unwrap()),
        Err(ureq::Error::Status(code, resp)) => (code, resp.into_string().unwrap()),
        Err(e) => panic!("request to {url} failed: {e}"),
    }
}
