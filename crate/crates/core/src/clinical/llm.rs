//! Blocking client for an OpenAI-compatible chat-completion endpoint.

use super::audit::{AuditEntry, AuditSink, NullAuditSink};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Where and how to reach the summary service. The key itself is never part
/// of the configuration, only the name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmClientConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub backoff_base_secs: f64,
}

impl Default for LlmClientConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.deepseek.com/chat/completions".into(),
            model: "deepseek-chat".into(),
            api_key_env: "DEEPSEEK_API_KEY".into(),
            timeout_secs: 30.0,
            max_retries: 3,
            backoff_base_secs: 1.0,
        }
    }
}

impl LlmClientConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.endpoint.trim().is_empty() || self.model.trim().is_empty() || self.api_key_env.trim().is_empty() {
            return Err(LlmError::InvalidConfig("endpoint, model and api_key_env must be non-empty".into()));
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(LlmError::InvalidConfig(format!("timeout_secs must be > 0, got {}", self.timeout_secs)));
        }
        if !(self.backoff_base_secs >= 0.0 && self.backoff_base_secs.is_finite()) {
            return Err(LlmError::InvalidConfig(format!("backoff_base_secs must be >= 0, got {}", self.backoff_base_secs)));
        }
        Ok(())
    }

    /// Delay before retry number `attempt + 1`.
    pub fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_secs_f64(self.backoff_base_secs * 2f64.powi(attempt as i32))
    }
}

/// API secret. Debug output is redacted and the type is deliberately not
/// serializable.
#[derive(Clone)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(secret: impl Into<String>) -> Self {
        Self(secret.into())
    }

    pub fn from_env(var: &str) -> Result<Self, LlmError> {
        Self::from_lookup(var, |name| std::env::var(name).ok())
    }

    pub fn from_lookup(var: &str, lookup: impl Fn(&str) -> Option<String>) -> Result<Self, LlmError> {
        match lookup(var) {
            Some(v) if !v.trim().is_empty() => Ok(Self(v)),
            _ => Err(LlmError::MissingApiKey(var.to_string())),
        }
    }

    fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(***)")
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid client configuration: {0}")]
    InvalidConfig(String),
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("server error HTTP {status} after {attempts} attempts")]
    ServerError { status: u16, attempts: u32 },
    #[error("timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("request rejected with HTTP {status}")]
    ClientError { status: u16 },
    #[error("transport failure: {0}")]
    Transport(String),
}

/// Outcome of one HTTP attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    /// 1-based.
    pub attempt: u32,
    pub status: Option<u16>,
    pub outcome: String,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryResponse {
    pub text: String,
    pub attempts: Vec<AttemptRecord>,
}

enum Attempt {
    Done(String),
    Retry(LlmError),
    Fail(LlmError),
}

/// Thread-safe client; each call keeps its own retry state.
pub struct LlmClient {
    config: LlmClientConfig,
    key: ApiKey,
    agent: ureq::Agent,
    audit: Arc<dyn AuditSink>,
}

impl fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmClient").field("config", &self.config).field("key", &self.key).finish_non_exhaustive()
    }
}

impl LlmClient {
    pub fn new(config: LlmClientConfig, key: ApiKey, audit: Arc<dyn AuditSink>) -> Result<Self, LlmError> {
        config.validate()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { config, key, agent, audit })
    }

    /// Client whose key is read from the configured environment variable.
    pub fn from_env(config: LlmClientConfig, audit: Arc<dyn AuditSink>) -> Result<Self, LlmError> {
        let key = ApiKey::from_env(&config.api_key_env)?;
        Self::new(config, key, audit)
    }

    pub fn config(&self) -> &LlmClientConfig {
        &self.config
    }

    /// Send `prompt` as a single user message and return the first choice.
    ///
    /// HTTP 429, 5xx and timeouts are retried up to `max_retries` times with
    /// delays `backoff_base · 2^attempt`; 401/403 fail at once. Every call is
    /// written to the audit sink, successful or not.
    pub fn summarize(&self, prompt: &str) -> Result<SummaryResponse, LlmError> {
        let body = json!({
            "model": self.config.model,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let mut attempts = Vec::new();
        let mut attempt = 0u32;
        let result = loop {
            let started = Instant::now();
            let (outcome, status) = self.attempt(&body);
            let label = match &outcome {
                Attempt::Done(_) => "ok".to_string(),
                Attempt::Retry(e) | Attempt::Fail(e) => e.to_string(),
            };
            log::info!("summary attempt {} to {}: {}", attempt + 1, self.config.endpoint, label);
            attempts.push(AttemptRecord {
                attempt: attempt + 1,
                status,
                outcome: label,
                elapsed_ms: started.elapsed().as_millis() as u64,
            });
            match outcome {
                Attempt::Done(text) => break Ok(text),
                Attempt::Fail(e) => break Err(e),
                Attempt::Retry(e) if attempt >= self.config.max_retries => break Err(e),
                Attempt::Retry(_) => {
                    std::thread::sleep(self.config.backoff(attempt));
                    attempt += 1;
                }
            }
        };
        let n = attempts.len() as u32;
        let result = result.map_err(|e| match e {
            LlmError::RateLimited { .. } => LlmError::RateLimited { attempts: n },
            LlmError::ServerError { status, .. } => LlmError::ServerError { status, attempts: n },
            LlmError::Timeout { .. } => LlmError::Timeout { attempts: n },
            other => other,
        });
        let entry = AuditEntry {
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            endpoint: self.config.endpoint.clone(),
            model: self.config.model.clone(),
            prompt: prompt.to_string(),
            response: result.as_ref().ok().cloned(),
            error: result.as_ref().err().map(|e| e.to_string()),
            attempts: attempts.clone(),
        };
        if let Err(e) = self.audit.record(&entry) {
            log::warn!("could not write audit entry: {e}");
        }
        result.map(|text| SummaryResponse { text, attempts })
    }

    fn attempt(&self, body: &Value) -> (Attempt, Option<u16>) {
        let sent = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", format!("Bearer {}", self.key.expose()))
            .send_json(body);
        let mut response = match sent {
            Ok(r) => r,
            Err(e) => return (classify_transport(e), None),
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return (classify_transport(e), Some(status)),
        };
        let outcome = match status {
            200..=299 => match extract_content(&text) {
                Ok(c) => Attempt::Done(c),
                Err(e) => Attempt::Fail(e),
            },
            401 | 403 => Attempt::Fail(LlmError::Auth { status }),
            429 => Attempt::Retry(LlmError::RateLimited { attempts: 0 }),
            500..=599 => Attempt::Retry(LlmError::ServerError { status, attempts: 0 }),
            _ => Attempt::Fail(LlmError::ClientError { status }),
        };
        (outcome, Some(status))
    }
}

fn classify_transport(e: ureq::Error) -> Attempt {
    match e {
        ureq::Error::Timeout(_) => Attempt::Retry(LlmError::Timeout { attempts: 0 }),
        ureq::Error::Io(io) if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) => {
            Attempt::Retry(LlmError::Timeout { attempts: 0 })
        }
        other => Attempt::Fail(LlmError::Transport(other.to_string())),
    }
}

/// `choices[0].message.content` of a chat-completion response.
fn extract_content(body: &str) -> Result<String, LlmError> {
    let v: Value = serde_json::from_str(body).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| LlmError::MalformedResponse("missing choices[0].message.content".into()))
}

/// One-shot summary using the key from the configured environment variable
/// and no audit trail.
pub fn request_summary(prompt: &str, config: &LlmClientConfig) -> Result<String, LlmError> {
    LlmClient::from_env(config.clone(), Arc::new(NullAuditSink))?.summarize(prompt).map(|r| r.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_is_redacted_and_config_holds_only_the_name() {
        let key = ApiKey::new("sk-very-secret");
        assert_eq!(format!("{key:?}"), "ApiKey(***)");
        let client = LlmClient::new(LlmClientConfig::default(), key, Arc::new(NullAuditSink)).unwrap();
        assert!(!format!("{client:?}").contains("sk-very-secret"));
        let json = serde_json::to_string(&LlmClientConfig::default()).unwrap();
        assert!(json.contains("\"api_key_env\":\"DEEPSEEK_API_KEY\""));
    }

    #[test]
    fn key_lookup() {
        assert!(matches!(ApiKey::from_lookup("K", |_| None), Err(LlmError::MissingApiKey(v)) if v == "K"));
        assert!(ApiKey::from_lookup("K", |_| Some(" ".into())).is_err());
        assert_eq!(ApiKey::from_lookup("K", |_| Some("s".into())).unwrap().expose(), "s");
    }

    #[test]
    fn config_validation_and_backoff() {
        assert!(LlmClientConfig::default().validate().is_ok());
        assert!(LlmClientConfig { timeout_secs: 0.0, ..Default::default() }.validate().is_err());
        assert!(LlmClientConfig { endpoint: "".into(), ..Default::default() }.validate().is_err());
        let c = LlmClientConfig { backoff_base_secs: 0.5, ..Default::default() };
        assert_eq!(c.backoff(0), Duration::from_millis(500));
        assert_eq!(c.backoff(3), Duration::from_secs(4));
    }

    #[test]
    fn content_extraction() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"X"}}]}"#;
        assert_eq!(extract_content(ok).unwrap(), "X");
        assert!(matches!(extract_content(r#"{"choices":[]}"#), Err(LlmError::MalformedResponse(_))));
        assert!(matches!(extract_content("not json"), Err(LlmError::MalformedResponse(_))));
    }
}
