//! Gateway to a language-model backend.
//!
//! Every call goes through [`Gate::cached_call`]: cache lookup, then a
//! bounded number of in-flight backend requests with retry and exponential
//! backoff on transient failures, then write-through. The stub backend is
//! scripted from a fixture file and makes the whole pipeline offline and
//! deterministic.

mod backend;
pub mod cache;
pub mod prompts;

use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use backend::{
    Backend, BackendError, DisabledBackend, HttpBackend, HttpSettings, Request, StubBackend,
    StubRecord, REFUSAL,
};
pub use cache::{Cache, CacheEntry, CacheStats};

use crate::corpus::Mcq;
use crate::criteria::{CriterionId, Tier};
use crate::error::{Error, Result};

/// What a prompt is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// One of the three answerability prompts.
    Answer(usize),
    Verify(CriterionId),
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Purpose::Answer(v) => write!(f, "answer:{v}"),
            Purpose::Verify(c) => write!(f, "verify:{}", c.key()),
        }
    }
}

/// Outcome of the three-prompt answer round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnswerVote {
    Option(usize),
    Abstain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateSettings {
    pub temperature: f64,
    pub max_in_flight: usize,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub cache_dir: Option<PathBuf>,
}

impl Default for GateSettings {
    fn default() -> Self {
        GateSettings {
            temperature: 0.0,
            max_in_flight: 4,
            max_retries: 3,
            backoff_ms: 500,
            cache_dir: None,
        }
    }
}

/// Counting semaphore bounding concurrent backend requests.
#[derive(Debug)]
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
    peak: AtomicUsize,
    limit: usize,
}

impl Slots {
    fn new(limit: usize) -> Self {
        let limit = limit.max(1);
        Slots {
            free: Mutex::new(limit),
            cv: Condvar::new(),
            peak: AtomicUsize::new(0),
            limit,
        }
    }

    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("slot lock");
        }
        *free -= 1;
        self.peak.fetch_max(self.limit - *free, Ordering::SeqCst);
        SlotGuard(self)
    }
}

struct SlotGuard<'a>(&'a Slots);

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock") += 1;
        self.0.cv.notify_one();
    }
}

pub struct Gate {
    backend: Box<dyn Backend>,
    settings: GateSettings,
    cache: Option<Cache>,
    slots: Slots,
    requests: AtomicUsize,
    backend_calls: AtomicUsize,
    cache_hits: AtomicUsize,
}

impl fmt::Debug for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gate")
            .field("backend", &self.backend.id())
            .field("model", &self.backend.model())
            .field("settings", &self.settings)
            .finish_non_exhaustive()
    }
}

/// Traffic counters for one gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Traffic {
    /// Every request made of the gate, including cache hits.
    pub requests: usize,
    pub backend_calls: usize,
    pub cache_hits: usize,
    pub peak_in_flight: usize,
}

impl Gate {
    pub fn new(backend: Box<dyn Backend>, settings: GateSettings) -> Result<Self> {
        let cache = match (&settings.cache_dir, backend.cacheable()) {
            (Some(dir), true) => Some(Cache::open(dir)?),
            _ => None,
        };
        let slots = Slots::new(settings.max_in_flight);
        Ok(Gate {
            backend,
            settings,
            cache,
            slots,
            requests: AtomicUsize::new(0),
            backend_calls: AtomicUsize::new(0),
            cache_hits: AtomicUsize::new(0),
        })
    }

    pub fn disabled() -> Self {
        Gate::new(Box::new(DisabledBackend), GateSettings::default()).expect("no cache to open")
    }

    pub fn stub(stub: StubBackend) -> Self {
        Gate::new(Box::new(stub), GateSettings::default()).expect("stub never caches")
    }

    pub fn enabled(&self) -> bool {
        self.backend.enabled()
    }

    pub fn backend_id(&self) -> &str {
        self.backend.id()
    }

    pub fn model(&self) -> &str {
        self.backend.model()
    }

    pub fn traffic(&self) -> Traffic {
        Traffic {
            requests: self.requests.load(Ordering::SeqCst),
            backend_calls: self.backend_calls.load(Ordering::SeqCst),
            cache_hits: self.cache_hits.load(Ordering::SeqCst),
            peak_in_flight: self.slots.peak.load(Ordering::SeqCst),
        }
    }

    /// Cache key: SHA-256 over backend, model, temperature, template
    /// version, purpose and the rendered prompt.
    pub fn cache_key(&self, purpose: Purpose, prompt: &str) -> String {
        let mut h = Sha256::new();
        for part in [
            self.backend.id(),
            self.backend.model(),
            &format!("{:.4}", self.settings.temperature),
            &prompts::templates().version,
            &purpose.to_string(),
            prompt,
        ] {
            h.update(part.as_bytes());
            h.update([0x1f]);
        }
        hex::encode(h.finalize())
    }

    pub fn cached_call(&self, question_id: &str, purpose: Purpose, prompt: &str) -> Result<String> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        if !self.backend.enabled() {
            return Ok(REFUSAL.to_string());
        }
        let key = self.cache_key(purpose, prompt);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            self.cache_hits.fetch_add(1, Ordering::SeqCst);
            return Ok(hit);
        }
        let req = Request {
            question_id,
            purpose,
            system: &prompts::templates().system,
            prompt,
        };
        let mut attempt = 0;
        let response = loop {
            let outcome = {
                let _slot = self.slots.acquire();
                self.backend_calls.fetch_add(1, Ordering::SeqCst);
                self.backend.complete(&req)
            };
            match outcome {
                Ok(r) => break r,
                Err(BackendError::Transient(m)) if attempt < self.settings.max_retries => {
                    let wait = self.settings.backoff_ms.saturating_mul(1 << attempt);
                    log::warn!("{question_id} {purpose}: transient failure ({m}); retrying in {wait} ms");
                    std::thread::sleep(Duration::from_millis(wait));
                    attempt += 1;
                }
                Err(BackendError::Transient(m)) => {
                    return Err(Error::Gate(format!(
                        "{question_id} {purpose}: gave up after {} attempts: {m}",
                        attempt + 1
                    )))
                }
                Err(BackendError::Fatal(m)) => {
                    return Err(Error::Gate(format!("{question_id} {purpose}: {m}")))
                }
            }
        };
        if let Some(c) = &self.cache {
            c.put(&key, &response)?;
        }
        Ok(response)
    }

    /// Runs the three answer prompts and returns the majority choice.
    pub fn ask_answer(&self, mcq: &Mcq) -> Result<AnswerVote> {
        if !self.enabled() {
            return Err(Error::Gate("answerability needs an enabled backend".into()));
        }
        let mut votes = Vec::with_capacity(prompts::ANSWER_PROMPTS);
        for v in 0..prompts::ANSWER_PROMPTS {
            let prompt = prompts::render_answer(mcq, v);
            let r = self.cached_call(&mcq.id, Purpose::Answer(v), &prompt)?;
            votes.push(prompts::parse_letter(&r, mcq.options.len()));
        }
        Ok(match prompts::majority(&votes) {
            Some(i) => AnswerVote::Option(i),
            None => AnswerVote::Abstain,
        })
    }

    /// Asks a yes/no verification question for an LLM-tier criterion.
    /// Unparseable replies count as "no".
    pub fn verify(&self, criterion: CriterionId, mcq: &Mcq, evidence: &str) -> Result<bool> {
        if criterion.tier() != Tier::LlmVerified {
            return Err(Error::Gate(format!("{criterion} is not an LLM-verified criterion")));
        }
        let prompt = prompts::render_verify(criterion, mcq, evidence)
            .ok_or_else(|| Error::Gate(format!("no verify template for {criterion}")))?;
        let r = self.cached_call(&mcq.id, Purpose::Verify(criterion), &prompt)?;
        match prompts::parse_yes_no(&r) {
            Some(b) => Ok(b),
            None => {
                log::warn!("{} {criterion}: unparseable verify reply {r:?}; treating as no", mcq.id);
                Ok(false)
            }
        }
    }
}
