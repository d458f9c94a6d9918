//! Chat-completion providers, retry with backoff, and the on-disk cache.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompt::Message;
use crate::config::ProviderConfig;
use crate::dataset::Instance;
use crate::error::{Error, Result};

/// OpenAI-compatible request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatPayload {
    pub model: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub top_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl ChatPayload {
    pub fn new(cfg: &ProviderConfig, messages: Vec<Message>) -> Self {
        ChatPayload {
            model: cfg.model.clone(),
            messages,
            temperature: cfg.temperature,
            top_p: cfg.top_p,
            max_tokens: cfg.max_tokens,
        }
    }

    /// Hex sha256 of the serialized body.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("payload serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProviderError {
    /// Worth retrying: timeouts, rate limits, 5xx.
    #[error("transient provider failure: {0}")]
    Transient(String),
    /// Bad credentials or a malformed request; stops the run.
    #[error("fatal provider failure: {0}")]
    Fatal(String),
}

pub trait Provider: Send + Sync {
    fn name(&self) -> &str;

    /// `instance` is only consulted by offline providers.
    fn complete(
        &self,
        instance: &Instance,
        payload: &ChatPayload,
    ) -> std::result::Result<String, ProviderError>;
}

/// Returns a fixed transcript, optionally after some transient failures.
#[derive(Debug)]
pub struct MockProvider {
    response: String,
    failures_left: AtomicUsize,
    calls: AtomicUsize,
}

impl MockProvider {
    pub fn new(response: impl Into<String>) -> Self {
        Self::flaky(response, 0)
    }

    pub fn flaky(response: impl Into<String>, failures: usize) -> Self {
        MockProvider {
            response: response.into(),
            failures_left: AtomicUsize::new(failures),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Provider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(
        &self,
        _: &Instance,
        _: &ChatPayload,
    ) -> std::result::Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let failing = self
            .failures_left
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
            .is_ok();
        if failing {
            return Err(ProviderError::Transient("simulated 503".into()));
        }
        Ok(self.response.clone())
    }
}

/// OpenAI-compatible endpoint over HTTPS.
pub struct HttpProvider {
    agent: ureq::Agent,
    endpoint: String,
    api_key: String,
}

impl std::fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProvider")
            .field("endpoint", &self.endpoint)
            .finish_non_exhaustive()
    }
}

impl HttpProvider {
    /// Reads the key from the configured environment variable.
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self> {
        let api_key = std::env::var(&cfg.api_key_env).map_err(|_| {
            Error::Config(format!(
                "environment variable `{}` is not set",
                cfg.api_key_env
            ))
        })?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpProvider {
            agent,
            endpoint: cfg.endpoint.clone(),
            api_key,
        })
    }
}

/// Pull `choices[0].message.content` out of a chat-completions response.
pub fn parse_chat_response(body: &str) -> std::result::Result<String, ProviderError> {
    let v: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| ProviderError::Transient(format!("malformed response: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| ProviderError::Transient("response has no message content".into()))
}

impl Provider for HttpProvider {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(
        &self,
        _: &Instance,
        payload: &ChatPayload,
    ) -> std::result::Result<String, ProviderError> {
        let body = serde_json::to_vec(payload).map_err(|e| ProviderError::Fatal(e.to_string()))?;
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .header("Content-Type", "application/json")
            .send(&body[..])
            .map_err(|e| ProviderError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Transient(e.to_string()))?;
        match status {
            200..=299 => parse_chat_response(&text),
            401 | 403 => Err(ProviderError::Fatal(format!(
                "authentication failed (HTTP {status})"
            ))),
            408 | 409 | 429 | 500..=599 => Err(ProviderError::Transient(format!("HTTP {status}"))),
            _ => Err(ProviderError::Fatal(format!("HTTP {status}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl RetryPolicy {
    pub fn from_config(cfg: &ProviderConfig) -> Self {
        RetryPolicy {
            max_retries: cfg.max_retries,
            base_delay: Duration::from_millis(cfg.backoff_ms),
        }
    }

    fn delay(&self, attempt: u32) -> Duration {
        self.base_delay.saturating_mul(1u32 << attempt.min(16))
    }
}

/// Call `provider`, retrying transient failures with exponential backoff.
/// Returns the outcome and the number of retries used.
pub fn complete_with_retry(
    provider: &dyn Provider,
    instance: &Instance,
    payload: &ChatPayload,
    policy: RetryPolicy,
) -> (std::result::Result<String, ProviderError>, u32) {
    let mut retries = 0;
    loop {
        match provider.complete(instance, payload) {
            Err(ProviderError::Transient(msg)) if retries < policy.max_retries => {
                log::warn!(
                    "{} on {}: {msg}; retry {}",
                    provider.name(),
                    instance.id(),
                    retries + 1
                );
                thread::sleep(policy.delay(retries));
                retries += 1;
            }
            other => return (other, retries),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    hash: String,
    response: String,
}

/// Responses keyed by payload hash, one file per entry.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(ResponseCache {
            dir: dir.to_path_buf(),
            lock: Mutex::new(()),
        })
    }

    fn path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.json"))
    }

    pub fn get(&self, hash: &str) -> Option<String> {
        let text = std::fs::read_to_string(self.path(hash)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        (entry.hash == hash).then_some(entry.response)
    }

    pub fn put(&self, hash: &str, response: &str) -> Result<()> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.path(hash);
        let tmp = path.with_extension("tmp");
        let entry = CacheEntry {
            hash: hash.to_string(),
            response: response.to_string(),
        };
        std::fs::write(&tmp, serde_json::to_vec(&entry)?).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_parsing() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(parse_chat_response(body).unwrap(), "hi");
        assert!(parse_chat_response("{}").is_err());
    }

    #[test]
    fn hash_depends_on_payload() {
        let cfg = ProviderConfig::default();
        let msg = |c: &str| {
            vec![Message {
                role: "user".into(),
                content: c.into(),
            }]
        };
        let a = ChatPayload::new(&cfg, msg("a"));
        assert_eq!(a.hash(), ChatPayload::new(&cfg, msg("a")).hash());
        assert_ne!(a.hash(), ChatPayload::new(&cfg, msg("b")).hash());
        assert_eq!(a.hash().len(), 64);
    }
}
