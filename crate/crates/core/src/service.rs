//! Read-only HTTP JSON API over a series store and a text classifier.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};

use crate::classify::{threshold, ClassifierSpec, ClassifyError, ClassifyInput, EmotionClassifier, DEFAULT_TAU};
use crate::emotion::Emotion;
use crate::labeling::Lexicon;
use crate::monitor::{answer_series, QueryError, SeriesFormat, SeriesRequest, SeriesStore};
use crate::textprep::normalize;

pub const DEFAULT_MAX_TEXT_BYTES: usize = 8192;
pub const ENV_PREFIX: &str = "EMOMON_";

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("config: {0}")]
    Config(String),
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Flat key/value service configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    /// Series store directory (output of `aggregate`).
    pub store: PathBuf,
    #[serde(default = "default_classifier")]
    pub classifier: String,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default = "default_max_text_bytes")]
    pub max_text_bytes: usize,
}

fn default_classifier() -> String {
    "lexicon".into()
}
fn default_tau() -> f64 {
    DEFAULT_TAU
}
fn default_max_text_bytes() -> usize {
    DEFAULT_MAX_TEXT_BYTES
}

impl ServiceConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ServiceError> {
        Ok(toml::from_str(s)?)
    }

    /// Apply `EMOMON_<FIELD>` overrides from `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ServiceError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            let Some(field) = k.as_ref().strip_prefix(ENV_PREFIX) else { continue };
            let v = v.as_ref();
            let bad = |what: &str| ServiceError::Config(format!("{ENV_PREFIX}{field}: invalid {what} {v:?}"));
            match field {
                "BIND" => self.bind = v.parse().map_err(|_| bad("address"))?,
                "STORE" => self.store = PathBuf::from(v),
                "CLASSIFIER" => self.classifier = v.to_string(),
                "TAU" => self.tau = v.parse().map_err(|_| bad("number"))?,
                "LEXICON" => self.lexicon = Some(PathBuf::from(v)),
                "MAX_TEXT_BYTES" => self.max_text_bytes = v.parse().map_err(|_| bad("size"))?,
                _ => {}
            }
        }
        Ok(())
    }

    /// Read `path`, then apply overrides from the process environment.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        cfg.apply_env(std::env::vars())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(ServiceError::Config(format!("tau must be in (0, 1), got {}", self.tau)));
        }
        if self.max_text_bytes == 0 {
            return Err(ServiceError::Config("max_text_bytes must be positive".into()));
        }
        match self.classifier_spec()? {
            ClassifierSpec::Model(_) => Err(ServiceError::Config(
                "the model backend scores stored embeddings and cannot classify free text; use lexicon or server:<url>".into(),
            )),
            ClassifierSpec::Lexicon if self.lexicon.is_none() => {
                Err(ServiceError::Config("lexicon backend needs `lexicon`".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn classifier_spec(&self) -> Result<ClassifierSpec, ServiceError> {
        Ok(self.classifier.parse()?)
    }
}

/// Shared immutable state, loaded once at startup.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    store_dir: PathBuf,
    series: Option<SeriesStore>,
    classifier: Arc<dyn EmotionClassifier>,
    tau: f64,
    max_text_bytes: usize,
}

impl AppState {
    /// A missing or unreadable series store does not prevent startup;
    /// health then reports it and series requests answer 503.
    pub fn new(
        store_dir: impl Into<PathBuf>,
        classifier: Arc<dyn EmotionClassifier>,
        tau: f64,
        max_text_bytes: usize,
    ) -> Self {
        let store_dir = store_dir.into();
        let series = if store_dir.is_dir() {
            match SeriesStore::open(&store_dir) {
                Ok(s) => Some(s),
                Err(e) => {
                    tracing::warn!(store = %store_dir.display(), error = %e, "series store unreadable");
                    None
                }
            }
        } else {
            tracing::warn!(store = %store_dir.display(), "series store missing");
            None
        };
        Self { inner: Arc::new(Inner { store_dir, series, classifier, tau, max_text_bytes }) }
    }

    pub fn from_config(cfg: &ServiceConfig) -> Result<Self, ServiceError> {
        cfg.validate()?;
        let lexicon = match &cfg.lexicon {
            Some(p) => Some(Lexicon::from_csv_path(p).map_err(|e| ServiceError::Config(format!("{}: {e}", p.display())))?),
            None => None,
        };
        let classifier = cfg.classifier_spec()?.build(lexicon.as_ref(), None)?;
        Ok(Self::new(&cfg.store, Arc::from(classifier), cfg.tau, cfg.max_text_bytes))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/classify", post(classify))
        .route("/v1/series", get(series))
        .route("/v1/emotions", get(emotions))
        .with_state(state)
}

/// Bind `cfg.bind` and serve until `shutdown` resolves.
pub async fn serve(cfg: &ServiceConfig, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServiceError> {
    let state = AppState::from_config(cfg)?;
    let listener = tokio::net::TcpListener::bind(cfg.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(status: StatusCode, message: impl Into<String>) -> Response {
    #[derive(Serialize)]
    struct ErrorBody {
        error: String,
    }
    let body = serde_json::to_string(&ErrorBody { error: message.into() }).expect("error body");
    json_response(status, body)
}

#[derive(Serialize)]
struct HealthBody {
    status: &'static str,
    backend: &'static str,
    store: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    failing: Vec<&'static str>,
}

async fn health(State(state): State<AppState>) -> Response {
    let store_ok = state.inner.series.is_some() && state.inner.store_dir.is_dir();
    let classifier = state.inner.classifier.clone();
    let backend_ok = tokio::task::spawn_blocking(move || classifier.probe())
        .await
        .map(|r| r.is_ok())
        .unwrap_or(false);
    let mut failing = Vec::new();
    if !backend_ok {
        failing.push("backend");
    }
    if !store_ok {
        failing.push("store");
    }
    let state_str = |ok: bool| if ok { "ok" } else { "unavailable" };
    let body = HealthBody {
        status: if failing.is_empty() { "ok" } else { "unavailable" },
        backend: state_str(backend_ok),
        store: state_str(store_ok),
        failing,
    };
    let status = if body.failing.is_empty() { StatusCode::OK } else { StatusCode::SERVICE_UNAVAILABLE };
    json_response(status, serde_json::to_string(&body).expect("health body"))
}

#[derive(Deserialize)]
struct ClassifyRequest {
    text: String,
}

#[derive(Serialize)]
struct ClassifyResponse {
    scores: Vec<f64>,
    labels: Vec<&'static str>,
}

async fn classify(State(state): State<AppState>, body: Body) -> Response {
    let max = state.inner.max_text_bytes;
    // JSON escaping can expand each byte of text up to six bytes.
    let Ok(bytes) = axum::body::to_bytes(body, max * 6 + 64).await else {
        return error_response(StatusCode::BAD_REQUEST, format!("request body too large; text limit is {max} bytes"));
    };
    let req: ClassifyRequest = match serde_json::from_slice(&bytes) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("body must be {{\"text\": string}}: {e}")),
    };
    if req.text.trim().is_empty() {
        return error_response(StatusCode::BAD_REQUEST, "text is empty");
    }
    if req.text.len() > max {
        return error_response(StatusCode::BAD_REQUEST, format!("text exceeds {max} bytes"));
    }

    let classifier = state.inner.classifier.clone();
    let tau = state.inner.tau;
    let result = tokio::task::spawn_blocking(move || {
        let text = normalize(&req.text);
        classifier.classify(&[ClassifyInput { tweet_id: "", text: text.as_str() }])
    })
    .await;
    let scores = match result {
        Ok(Ok(mut s)) if s.len() == 1 => s.remove(0),
        Ok(Ok(_)) => return error_response(StatusCode::INTERNAL_SERVER_ERROR, "backend returned wrong arity"),
        Ok(Err(e @ (ClassifyError::BackendUnreachable(_) | ClassifyError::ProtocolViolation(_)))) => {
            return error_response(StatusCode::BAD_GATEWAY, e.to_string())
        }
        Ok(Err(e)) => return error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(_) => return error_response(StatusCode::INTERNAL_SERVER_ERROR, "classification task failed"),
    };
    let labels = threshold(&scores, tau).emotions().map(Emotion::name).collect();
    let body = ClassifyResponse { scores: scores.0.to_vec(), labels };
    json_response(StatusCode::OK, serde_json::to_string(&body).expect("classify body"))
}

async fn series(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> Response {
    let Some(store) = &state.inner.series else {
        return error_response(StatusCode::SERVICE_UNAVAILABLE, "series store unavailable");
    };
    let get = |k: &str| params.get(k).map(String::as_str);
    let req = match SeriesRequest::parse(
        get("scope").unwrap_or(""),
        get("emotions"),
        get("from").unwrap_or(""),
        get("to").unwrap_or(""),
    ) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let format = match get("format").map(str::parse::<SeriesFormat>).transpose() {
        Ok(f) => f.unwrap_or(SeriesFormat::Json),
        Err(e) => return error_response(StatusCode::BAD_REQUEST, e.to_string()),
    };
    match answer_series(store, &req, format) {
        Ok(body) if format == SeriesFormat::Csv => {
            (StatusCode::OK, [(header::CONTENT_TYPE, "text/csv")], body).into_response()
        }
        Ok(body) => json_response(StatusCode::OK, body),
        Err(e @ QueryError::UnknownScope(_)) => error_response(StatusCode::NOT_FOUND, e.to_string()),
        Err(e @ (QueryError::InvalidRange { .. } | QueryError::BadParameter(_))) => {
            error_response(StatusCode::BAD_REQUEST, e.to_string())
        }
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn emotions() -> Response {
    json_response(StatusCode::OK, serde_json::to_string(&Emotion::names()).expect("names"))
}
