//! Backends: remote chat endpoint, scripted stub, and disabled.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::Purpose;
use crate::error::{Error, Result};

/// One rendered prompt on its way to a backend.
#[derive(Debug, Clone)]
pub struct Request<'a> {
    pub question_id: &'a str,
    pub purpose: Purpose,
    pub system: &'a str,
    pub prompt: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendError {
    /// Worth retrying: timeouts, connection resets, 429 and 5xx.
    Transient(String),
    Fatal(String),
}

pub trait Backend: Send + Sync {
    /// Short identifier, part of the cache key.
    fn id(&self) -> &str;
    fn model(&self) -> &str;
    /// Whether responses may be written to the disk cache.
    fn cacheable(&self) -> bool {
        true
    }
    fn enabled(&self) -> bool {
        true
    }
    fn complete(&self, req: &Request<'_>) -> std::result::Result<String, BackendError>;
}

pub const REFUSAL: &str = "[llm disabled]";

#[derive(Debug, Default, Clone, Copy)]
pub struct DisabledBackend;

impl Backend for DisabledBackend {
    fn id(&self) -> &str {
        "disabled"
    }
    fn model(&self) -> &str {
        "-"
    }
    fn cacheable(&self) -> bool {
        false
    }
    fn enabled(&self) -> bool {
        false
    }
    fn complete(&self, _: &Request<'_>) -> std::result::Result<String, BackendError> {
        Ok(REFUSAL.to_string())
    }
}

/// One scripted stub response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubRecord {
    pub question_id: String,
    /// `answer`, `answer:N` (one of the three prompts), `verify` or
    /// `verify:<criterion>`.
    pub purpose: String,
    pub response: String,
}

/// Answers from a fixture table keyed by (question id, purpose). Never
/// caches.
#[derive(Debug, Clone)]
pub struct StubBackend {
    table: HashMap<(String, String), String>,
    pub default_answer: String,
    pub default_verify: String,
}

impl Default for StubBackend {
    fn default() -> Self {
        StubBackend {
            table: HashMap::new(),
            default_answer: "A".into(),
            default_verify: "No".into(),
        }
    }
}

impl StubBackend {
    pub fn from_records<I: IntoIterator<Item = StubRecord>>(records: I) -> Self {
        let mut s = StubBackend::default();
        for r in records {
            s.table.insert((r.question_id, r.purpose.to_lowercase()), r.response);
        }
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: StubRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            records.push(r);
        }
        Ok(Self::from_records(records))
    }

    pub fn lookup(&self, question_id: &str, purpose: Purpose) -> String {
        let get = |p: &str| self.table.get(&(question_id.to_string(), p.to_string()));
        let hit = match purpose {
            Purpose::Answer(v) => get(&format!("answer:{v}")).or_else(|| get("answer")),
            Purpose::Verify(c) => get(&format!("verify:{}", c.key())).or_else(|| get("verify")),
        };
        match (hit, purpose) {
            (Some(r), _) => r.clone(),
            (None, Purpose::Answer(_)) => self.default_answer.clone(),
            (None, Purpose::Verify(_)) => self.default_verify.clone(),
        }
    }
}

impl Backend for StubBackend {
    fn id(&self) -> &str {
        "stub"
    }
    fn model(&self) -> &str {
        "stub"
    }
    fn cacheable(&self) -> bool {
        false
    }
    fn complete(&self, req: &Request<'_>) -> std::result::Result<String, BackendError> {
        Ok(self.lookup(req.question_id, req.purpose))
    }
}

/// Settings for a chat-completions style endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpSettings {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_tokens: u32,
}

impl Default for HttpSettings {
    fn default() -> Self {
        HttpSettings {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: String::new(),
            api_key_env: "MCQLINT_API_KEY".into(),
            timeout_secs: 60,
            max_tokens: 64,
        }
    }
}

pub struct HttpBackend {
    settings: HttpSettings,
    temperature: f64,
    token: String,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.settings.endpoint)
            .field("model", &self.settings.model)
            .finish_non_exhaustive()
    }
}

impl HttpBackend {
    /// Reads the credential from the configured environment variable.
    pub fn from_env(settings: HttpSettings, temperature: f64) -> Result<Self> {
        let token = std::env::var(&settings.api_key_env).map_err(|_| {
            Error::Config(format!(
                "backend http needs a credential in ${}",
                settings.api_key_env
            ))
        })?;
        Self::with_token(settings, temperature, token)
    }

    pub fn with_token(settings: HttpSettings, temperature: f64, token: String) -> Result<Self> {
        if settings.endpoint.is_empty() || settings.model.is_empty() {
            return Err(Error::Config("backend http needs an endpoint and a model".into()));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(settings.timeout_secs)))
            .build()
            .into();
        Ok(HttpBackend {
            settings,
            temperature,
            token,
            agent,
        })
    }
}

fn classify(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::StatusCode(c) if c == 429 || c >= 500 => {
            BackendError::Transient(format!("HTTP {c}"))
        }
        ureq::Error::StatusCode(c) => BackendError::Fatal(format!("HTTP {c}")),
        e @ (ureq::Error::Io(_) | ureq::Error::Timeout(_) | ureq::Error::ConnectionFailed) => {
            BackendError::Transient(e.to_string())
        }
        e => BackendError::Fatal(e.to_string()),
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        "http"
    }
    fn model(&self) -> &str {
        &self.settings.model
    }
    fn complete(&self, req: &Request<'_>) -> std::result::Result<String, BackendError> {
        let body = json!({
            "model": self.settings.model,
            "temperature": self.temperature,
            "max_tokens": self.settings.max_tokens,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.prompt},
            ],
        });
        let mut resp = self
            .agent
            .post(&self.settings.endpoint)
            .header("Authorization", &format!("Bearer {}", self.token))
            .send_json(&body)
            .map_err(classify)?;
        let v: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Fatal(format!("bad response body: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Fatal("response has no choices[0].message.content".into()))
    }
}
