//! Client for an OpenAI-compatible `chat/completions` endpoint.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use super::{Backend, BackendError, CompletionRequest, Tokenizer};

pub const ENDPOINT_ENV: &str = "LLM_ENDPOINT";
pub const API_KEY_ENV: &str = "LLM_API_KEY";
pub const DEFAULT_MODEL: &str = "gpt-4";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_secs(1),
            multiplier: 2,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        self.initial_backoff * self.multiplier.saturating_pow(retry.saturating_sub(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiveConfig {
    pub endpoint: String,
    pub api_key: String,
    pub model: String,
    /// `None` omits the field and lets the server use its default.
    pub temperature: Option<f32>,
    pub max_in_flight: usize,
    pub tokens_per_minute: Option<usize>,
    pub retry: RetryPolicy,
    pub timeout: Duration,
}

impl LiveConfig {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            model: DEFAULT_MODEL.to_string(),
            temperature: Some(0.0),
            max_in_flight: 4,
            tokens_per_minute: None,
            retry: RetryPolicy::default(),
            timeout: Duration::from_secs(120),
        }
    }

    /// Reads the endpoint and key from the environment.
    pub fn from_env() -> Result<Self, BackendError> {
        let get = |k: &str| {
            std::env::var(k)
                .ok()
                .filter(|v| !v.trim().is_empty())
                .ok_or_else(|| BackendError::Config(format!("{k} is not set")))
        };
        Ok(Self::new(get(ENDPOINT_ENV)?, get(API_KEY_ENV)?))
    }

    pub fn url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    max_tokens: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f32>,
}

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> GatePass<'_> {
        let mut free = self.free.lock().expect("gate");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate");
        }
        *free -= 1;
        GatePass(self)
    }
}

struct GatePass<'a>(&'a Gate);

impl Drop for GatePass<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("gate") += 1;
        self.0.cv.notify_one();
    }
}

/// Sliding one-minute window of spent tokens.
struct Throttle {
    limit: Option<usize>,
    window: Mutex<VecDeque<(Instant, usize)>>,
}

impl Throttle {
    fn wait_for(&self, tokens: usize) {
        let Some(limit) = self.limit else { return };
        loop {
            let mut w = self.window.lock().expect("throttle");
            let now = Instant::now();
            while w
                .front()
                .is_some_and(|(t, _)| now.duration_since(*t) >= Duration::from_secs(60))
            {
                w.pop_front();
            }
            let spent: usize = w.iter().map(|(_, n)| n).sum();
            // A single oversized request is let through on an empty window.
            if spent + tokens <= limit || w.is_empty() {
                w.push_back((now, tokens));
                return;
            }
            let oldest = w.front().map(|(t, _)| *t).unwrap_or(now);
            drop(w);
            std::thread::sleep(Duration::from_secs(60).saturating_sub(now.duration_since(oldest)));
        }
    }
}

pub struct LiveBackend {
    config: LiveConfig,
    client: reqwest::blocking::Client,
    tokenizer: Tokenizer,
    gate: Gate,
    throttle: Throttle,
}

enum Attempt {
    Done(String),
    Retry(BackendError),
    Fatal(BackendError),
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Result<Self, BackendError> {
        if config.endpoint.trim().is_empty() {
            return Err(BackendError::Config("empty endpoint".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(Self {
            gate: Gate::new(config.max_in_flight),
            throttle: Throttle {
                limit: config.tokens_per_minute,
                window: Mutex::new(VecDeque::new()),
            },
            config,
            client,
            tokenizer: Tokenizer::default(),
        })
    }

    pub fn config(&self) -> &LiveConfig {
        &self.config
    }

    fn attempt(&self, req: &CompletionRequest) -> Attempt {
        let body = ChatRequest {
            model: &self.config.model,
            messages: [ChatMessage {
                role: "user",
                content: req.prompt(),
            }],
            max_tokens: req.max_output_tokens(),
            seed: req.seed(),
            temperature: self.config.temperature,
        };
        let resp = match self
            .client
            .post(self.config.url())
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
        {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(BackendError::Transport(e.to_string())),
        };
        let status = resp.status();
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(BackendError::Transport(e.to_string())),
        };
        if status.is_success() {
            return match serde_json::from_str::<ChatResponse>(&text) {
                Ok(parsed) => match parsed.choices.into_iter().next() {
                    Some(c) => Attempt::Done(c.message.content.unwrap_or_default()),
                    None => Attempt::Fatal(BackendError::Decode("response has no choices".into())),
                },
                Err(e) => Attempt::Fatal(BackendError::Decode(e.to_string())),
            };
        }
        let err = BackendError::Http {
            status: status.as_u16(),
            body: text.chars().take(500).collect(),
        };
        if status.as_u16() == 429 || status.is_server_error() {
            Attempt::Retry(err)
        } else {
            Attempt::Fatal(err)
        }
    }
}

impl Backend for LiveBackend {
    fn name(&self) -> &str {
        "live"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        let _pass = self.gate.acquire();
        self.throttle
            .wait_for(self.tokenizer.count(req.prompt()) + req.max_output_tokens());
        let mut last = None;
        for attempt in 1..=self.config.retry.attempts.max(1) {
            if attempt > 1 {
                let delay = self.config.retry.backoff(attempt - 1);
                debug!(attempt, ?delay, "retrying completion");
                std::thread::sleep(delay);
            }
            match self.attempt(req) {
                Attempt::Done(s) => return Ok(s),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(e) => {
                    warn!(attempt, error = %e, "completion attempt failed");
                    last = Some(e);
                }
            }
        }
        Err(last.unwrap_or_else(|| BackendError::Transport("no attempts made".into())))
    }
}
