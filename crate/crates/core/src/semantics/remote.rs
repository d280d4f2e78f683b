//! HTTP backend: JSON POST `{"id", "task", "input"}`, reply
//! `{"output", "model"}`.
//!
//! Transient failures are retried with capped exponential backoff, replies
//! are cached on disk by a hash of task and payload, and concurrent calls
//! are bounded by an in-flight cap.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{extract_triple, triple_sentence, ResultingState, SemanticBackend, SemanticsError};
use crate::domain::{Primitive, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    ResultingState,
    Nli,
    Qa,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::ResultingState => "resulting_state",
            Task::Nli => "nli",
            Task::Qa => "qa",
        }
    }
}

/// Zero-shot prompt asking for the state after `sentence`.
pub fn resulting_state_prompt(sentence: &str) -> String {
    let s = sentence.trim().trim_end_matches('.');
    format!(
        "{s}. What is the resulting state after this action? Do not add new information. \
         The resulting state after this action is that"
    )
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub url: Option<String>,
    pub token: Option<String>,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub max_in_flight: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            url: None,
            token: None,
            timeout_ms: 30_000,
            max_retries: 5,
            initial_backoff_ms: 250,
            max_backoff_ms: 8_000,
            max_in_flight: 8,
            cache_dir: None,
        }
    }
}

impl RemoteConfig {
    /// Reads the `[backend]` table of a TOML file, if given, then applies
    /// `BACKEND_URL` and `BACKEND_TOKEN` from the environment.
    pub fn load(path: Option<&Path>) -> Result<Self, SemanticsError> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| SemanticsError::NotConfigured(format!("{}: {e}", p.display())))?;
                Self::from_toml(&text)?
            }
            None => RemoteConfig::default(),
        };
        if let Ok(url) = std::env::var("BACKEND_URL") {
            cfg.url = Some(url);
        }
        if let Ok(token) = std::env::var("BACKEND_TOKEN") {
            cfg.token = Some(token);
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, SemanticsError> {
        #[derive(Deserialize)]
        struct File {
            #[serde(default)]
            backend: Option<toml::Value>,
        }
        let file: File = toml::from_str(text).map_err(|e| SemanticsError::NotConfigured(e.to_string()))?;
        match file.backend {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| SemanticsError::NotConfigured(e.to_string())),
            None => Ok(RemoteConfig::default()),
        }
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.initial_backoff_ms.saturating_mul(1u64 << attempt.min(20));
        Duration::from_millis(ms.min(self.max_backoff_ms))
    }
}

/// Counting semaphore for the in-flight cap.
struct Gate {
    used: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(cap: usize) -> Self {
        Gate { used: Mutex::new(0), freed: Condvar::new(), cap: cap.max(1) }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used >= self.cap {
            used = self.freed.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Debug, Deserialize)]
struct Reply {
    output: Value,
    model: String,
    #[serde(default)]
    id: Option<u64>,
}

pub struct RemoteBackend {
    config: RemoteConfig,
    url: String,
    client: reqwest::blocking::Client,
    gate: Gate,
    next_id: AtomicU64,
}

impl std::fmt::Debug for RemoteBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteBackend").field("url", &self.url).finish()
    }
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, SemanticsError> {
        let url = config.url.clone().ok_or_else(|| SemanticsError::NotConfigured("no backend URL".into()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| SemanticsError::NotConfigured(e.to_string()))?;
        let gate = Gate::new(config.max_in_flight);
        Ok(RemoteBackend { config, url, client, gate, next_id: AtomicU64::new(1) })
    }

    fn cache_path(&self, task: Task, input: &Value) -> Option<PathBuf> {
        let dir = self.config.cache_dir.as_ref()?;
        let mut h = Sha256::new();
        h.update(task.as_str().as_bytes());
        h.update([0u8]);
        h.update(input.to_string().as_bytes());
        Some(dir.join(format!("{}.json", hex::encode(h.finalize()))))
    }

    /// One logical call: cache lookup, then retried POSTs.
    pub fn call(&self, task: Task, input: Value) -> Result<Value, SemanticsError> {
        let cache = self.cache_path(task, &input);
        if let Some(path) = &cache {
            if let Ok(text) = fs::read_to_string(path) {
                if let Ok(v) = serde_json::from_str::<Value>(&text) {
                    return Ok(v);
                }
            }
        }
        let mut attempt = 0;
        let output = loop {
            match self.post(task, &input) {
                Ok(v) => break v,
                Err(e) if e.is_retryable() && attempt < self.config.max_retries => {
                    std::thread::sleep(self.config.backoff(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        if let Some(path) = &cache {
            store(path, &output);
        }
        Ok(output)
    }

    fn post(&self, task: Task, input: &Value) -> Result<Value, SemanticsError> {
        let _permit = self.gate.acquire();
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let body = json!({"id": id, "task": task.as_str(), "input": input});
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(token) = &self.config.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                SemanticsError::Timeout(e.to_string())
            } else {
                SemanticsError::BackendUnavailable(e.to_string())
            }
        })?;
        let status = resp.status();
        if status.as_u16() == 429 {
            return Err(SemanticsError::RateLimited);
        }
        if status.as_u16() == 408 || status.as_u16() == 504 {
            return Err(SemanticsError::Timeout(format!("HTTP {status}")));
        }
        if status.is_server_error() {
            return Err(SemanticsError::BackendUnavailable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(SemanticsError::BackendProtocolError(format!("HTTP {status}")));
        }
        let text = resp.text().map_err(|e| SemanticsError::BackendUnavailable(e.to_string()))?;
        let reply: Reply =
            serde_json::from_str(&text).map_err(|e| SemanticsError::BackendProtocolError(format!("{e}: {text}")))?;
        if reply.id.is_some_and(|r| r != id) {
            return Err(SemanticsError::BackendProtocolError(format!("reply id {:?} for request {id}", reply.id)));
        }
        if reply.model.is_empty() {
            return Err(SemanticsError::BackendProtocolError("reply names no model".into()));
        }
        Ok(reply.output)
    }

    fn text_output(v: Value) -> Result<String, SemanticsError> {
        match v {
            Value::String(s) => Ok(s.trim().to_string()),
            other => Err(SemanticsError::BackendProtocolError(format!("expected a string, got {other}"))),
        }
    }
}

fn store(path: &Path, output: &Value) {
    // a failed cache write only costs a repeat request
    if let Some(dir) = path.parent() {
        let _ = fs::create_dir_all(dir);
    }
    let tmp = path.with_extension("tmp");
    if fs::write(&tmp, output.to_string()).is_ok() {
        let _ = fs::rename(&tmp, path);
    }
}

impl SemanticBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn resulting_state(&self, sentence: &Primitive) -> Result<ResultingState, SemanticsError> {
        let out = self.call(Task::ResultingState, Value::String(resulting_state_prompt(&sentence.raw_text)))?;
        let statement = Self::text_output(out)?.trim_end_matches('.').to_string();
        if statement.is_empty() {
            return Err(SemanticsError::BackendProtocolError("empty resulting state".into()));
        }
        if statement.contains(" no longer ") || statement.contains(" not ") {
            return Ok(ResultingState::negative(statement));
        }
        let triple = extract_triple(&statement)?;
        Ok(ResultingState::positive(statement, triple))
    }

    fn contradicts(&self, state: &ResultingState, edge: &Triple) -> Result<bool, SemanticsError> {
        let input = json!({"premise": state.statement, "hypothesis": triple_sentence(edge)});
        match self.call(Task::Nli, input)? {
            Value::Bool(b) => Ok(b),
            Value::String(s) => match s.trim().to_ascii_lowercase().as_str() {
                "contradiction" => Ok(true),
                "entailment" | "neutral" => Ok(false),
                other => Err(SemanticsError::BackendProtocolError(format!("unknown NLI label {other:?}"))),
            },
            other => Err(SemanticsError::BackendProtocolError(format!("unexpected NLI output {other}"))),
        }
    }

    fn answer(&self, context: &[String], question: &str, _target: &str) -> Result<Option<String>, SemanticsError> {
        let input = json!({"context": context, "question": question});
        let text = Self::text_output(self.call(Task::Qa, input)?)?;
        Ok(Some(text))
    }
}
