//! Rule-transformer backends: a deterministic fixture-driven mock and an
//! HTTP completion client.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::normalize_ws;

/// Conversion phase a request belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    EventExtraction,
    LogicExtraction,
    PatternMatching,
}

/// One completion request; the prompt is built from the fixed phase
/// templates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BackendRequest {
    pub phase: Phase,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("backend transport failed: {detail}")]
    Transport { detail: String },
    #[error("backend returned a malformed response: {detail}")]
    BadResponse { detail: String },
    #[error("mock fixture has no response for prompt: {prompt}")]
    MissingFixture { prompt: String },
}

/// Completion interface shared by the mock and HTTP backends. Completions
/// are stateless, so retrying a request is always safe.
pub trait TransformerBackend: Send + Sync {
    fn complete(&self, request: &BackendRequest) -> Result<String, BackendError>;
}

/// Deterministic backend: a lookup table keyed by whitespace-normalized
/// prompt. Served requests are logged for inspection.
#[derive(Debug, Default)]
pub struct MockBackend {
    responses: BTreeMap<String, String>,
    log: Mutex<Vec<BackendRequest>>,
}

impl MockBackend {
    pub fn new(responses: impl IntoIterator<Item = (String, String)>) -> Self {
        MockBackend {
            responses: responses
                .into_iter()
                .map(|(prompt, response)| (normalize_ws(&prompt), response))
                .collect(),
            log: Mutex::new(Vec::new()),
        }
    }

    /// Loads a fixture: a JSON object mapping prompts to responses.
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        let map: BTreeMap<String, String> = serde_json::from_str(json)?;
        Ok(Self::new(map))
    }

    /// Every request served so far, in arrival order.
    pub fn requests(&self) -> Vec<BackendRequest> {
        self.log.lock().expect("mock log lock").clone()
    }
}

impl TransformerBackend for MockBackend {
    fn complete(&self, request: &BackendRequest) -> Result<String, BackendError> {
        self.log
            .lock()
            .expect("mock log lock")
            .push(request.clone());
        self.responses
            .get(&normalize_ws(&request.prompt))
            .cloned()
            .ok_or_else(|| BackendError::MissingFixture {
                prompt: request.prompt.clone(),
            })
    }
}

/// Connection settings for the HTTP backend. `from_env` reads
/// `HORAE_BACKEND_URL`, `HORAE_BACKEND_TOKEN`, and
/// `HORAE_BACKEND_TIMEOUT_SECS`.
#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    pub base_url: String,
    pub bearer_token: Option<String>,
    pub timeout: Duration,
    pub retries: u32,
    pub initial_backoff: Duration,
}

impl HttpBackendConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpBackendConfig {
            base_url: base_url.into(),
            bearer_token: None,
            timeout: Duration::from_secs(30),
            retries: 3,
            initial_backoff: Duration::from_millis(250),
        }
    }

    pub fn from_env() -> Option<Self> {
        let base_url = std::env::var("HORAE_BACKEND_URL").ok()?;
        let mut config = Self::new(base_url);
        config.bearer_token = std::env::var("HORAE_BACKEND_TOKEN").ok();
        if let Some(secs) = std::env::var("HORAE_BACKEND_TIMEOUT_SECS")
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
        {
            config.timeout = Duration::from_secs(secs);
        }
        Some(config)
    }
}

/// Remote completion backend: `POST {base}/v1/complete` with
/// `{"prompt": ...}` returning `{"text": ...}`. Transient failures are
/// retried with exponential backoff.
pub struct HttpBackend {
    config: HttpBackendConfig,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct CompleteRequest<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct CompleteResponse {
    text: String,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .expect("reqwest client");
        HttpBackend { config, client }
    }

    fn attempt(&self, prompt: &str) -> Result<String, BackendError> {
        let url = format!(
            "{}/v1/complete",
            self.config.base_url.trim_end_matches('/')
        );
        let mut request = self.client.post(&url).json(&CompleteRequest { prompt });
        if let Some(token) = &self.config.bearer_token {
            request = request.bearer_auth(token);
        }
        let response = request.send().map_err(|e| BackendError::Transport {
            detail: e.to_string(),
        })?;
        if !response.status().is_success() {
            return Err(BackendError::Transport {
                detail: format!("status {}", response.status()),
            });
        }
        let body: CompleteResponse = response.json().map_err(|e| BackendError::BadResponse {
            detail: e.to_string(),
        })?;
        Ok(body.text)
    }
}

impl TransformerBackend for HttpBackend {
    fn complete(&self, request: &BackendRequest) -> Result<String, BackendError> {
        let mut backoff = self.config.initial_backoff;
        let mut last = None;
        for attempt in 0..=self.config.retries {
            match self.attempt(&request.prompt) {
                Ok(text) => return Ok(text),
                Err(err @ BackendError::BadResponse { .. }) => return Err(err),
                Err(err) => last = Some(err),
            }
            if attempt < self.config.retries {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
        }
        Err(last.expect("at least one attempt ran"))
    }
}
