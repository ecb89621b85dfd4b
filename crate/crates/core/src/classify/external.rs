//! Client for an external inference server.
//!
//! Wire protocol: `POST <endpoint>/classify` with `{"texts": [...]}`, answered
//! by `200 {"scores": [[6 floats], ...]}` with one row per text.

use std::net::{TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::classify::ClassifyError;
use crate::emotion::EmotionScores;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalBackendConfig {
    /// Base URL, e.g. `http://127.0.0.1:8500`.
    pub endpoint: String,
    pub timeout_ms: u64,
    pub batch_size: usize,
    /// Maximum number of batch requests in flight.
    pub parallelism: usize,
}

impl ExternalBackendConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), timeout_ms: 10_000, batch_size: 32, parallelism: 1 }
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        if self.batch_size == 0 || self.timeout_ms == 0 || self.parallelism == 0 {
            return Err(ClassifyError::InvalidConfig(
                "batch_size, timeout_ms and parallelism must be positive".into(),
            ));
        }
        url::Url::parse(&self.endpoint)
            .map_err(|e| ClassifyError::InvalidConfig(format!("endpoint: {e}")))?;
        Ok(())
    }

    fn classify_url(&self) -> String {
        format!("{}/classify", self.endpoint.trim_end_matches('/'))
    }

    fn agent(&self) -> ureq::Agent {
        ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(self.timeout_ms))
            .build()
    }

    /// TCP reachability check of the endpoint host.
    pub fn probe(&self) -> Result<(), ClassifyError> {
        let url = url::Url::parse(&self.endpoint)
            .map_err(|e| ClassifyError::InvalidConfig(format!("endpoint: {e}")))?;
        let host = url
            .host_str()
            .ok_or_else(|| ClassifyError::InvalidConfig("endpoint has no host".into()))?;
        let port = url.port_or_known_default().unwrap_or(80);
        let timeout = Duration::from_millis(self.timeout_ms);
        let addrs = (host, port)
            .to_socket_addrs()
            .map_err(|e| ClassifyError::BackendUnreachable(e.to_string()))?;
        let mut last = String::from("no address resolved");
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, timeout) {
                Ok(_) => return Ok(()),
                Err(e) => last = e.to_string(),
            }
        }
        Err(ClassifyError::BackendUnreachable(last))
    }
}

#[derive(Serialize)]
struct ClassifyRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct ClassifyResponse {
    scores: Vec<Vec<f64>>,
}

fn send_batch(
    agent: &ureq::Agent,
    url: &str,
    texts: &[&str],
) -> Result<Vec<EmotionScores>, ClassifyError> {
    let response = match agent.post(url).send_json(ClassifyRequest { texts }) {
        Ok(r) => r,
        Err(ureq::Error::Status(code, _)) => {
            return Err(ClassifyError::ProtocolViolation(format!("server answered {code}")))
        }
        Err(ureq::Error::Transport(t)) => {
            return Err(ClassifyError::BackendUnreachable(t.to_string()))
        }
    };
    if response.status() != 200 {
        return Err(ClassifyError::ProtocolViolation(format!(
            "server answered {}",
            response.status()
        )));
    }
    let body: ClassifyResponse = response.into_json().map_err(|e| {
        if e.kind() == std::io::ErrorKind::TimedOut {
            ClassifyError::BackendUnreachable(e.to_string())
        } else {
            ClassifyError::ProtocolViolation(format!("response body: {e}"))
        }
    })?;
    if body.scores.len() != texts.len() {
        return Err(ClassifyError::ProtocolViolation(format!(
            "{} texts sent, {} score rows returned",
            texts.len(),
            body.scores.len()
        )));
    }
    body.scores
        .iter()
        .map(|row| {
            EmotionScores::try_from_slice(row)
                .map_err(|e| ClassifyError::ProtocolViolation(e.to_string()))
        })
        .collect()
}

/// Classify `texts` remotely, one score vector per text in input order.
pub fn classify_external<S: AsRef<str> + Sync>(
    cfg: &ExternalBackendConfig,
    texts: &[S],
) -> Result<Vec<EmotionScores>, ClassifyError> {
    cfg.validate()?;
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let texts: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
    let batches: Vec<&[&str]> = texts.chunks(cfg.batch_size).collect();
    let agent = cfg.agent();
    let url = cfg.classify_url();

    let results: Vec<Mutex<Option<Result<Vec<EmotionScores>, ClassifyError>>>> =
        batches.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.parallelism.min(batches.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(batch) = batches.get(i) else { break };
                let outcome = send_batch(&agent, &url, batch);
                let failed = outcome.is_err();
                *results[i].lock().expect("result slot") = Some(outcome);
                if failed {
                    // stop handing out further batches
                    next.store(batches.len(), Ordering::Relaxed);
                    break;
                }
            });
        }
    });

    let mut out = Vec::with_capacity(texts.len());
    for slot in results {
        match slot.into_inner().expect("result slot") {
            Some(Ok(scores)) => out.extend(scores),
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    // skipped batches always follow a failed one, whose error returned above
    debug_assert_eq!(out.len(), texts.len());
    Ok(out)
}

/// [`classify_external`] retried up to `retries` extra times on
/// [`ClassifyError::BackendUnreachable`].
pub fn classify_external_with_retry<S: AsRef<str> + Sync>(
    cfg: &ExternalBackendConfig,
    texts: &[S],
    retries: usize,
) -> Result<Vec<EmotionScores>, ClassifyError> {
    let mut attempt = 0;
    loop {
        match classify_external(cfg, texts) {
            Err(ClassifyError::BackendUnreachable(_)) if attempt < retries => attempt += 1,
            other => return other,
        }
    }
}
