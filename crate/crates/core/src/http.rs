//! JSON-over-HTTP plumbing shared by the embedding, translation and chat
//! clients, plus the retry policy used by every remote call.

use std::time::Duration;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Exponential backoff with jitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Retries after the first attempt; total attempts = `max_retries + 1`.
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    pub fn no_delay(max_retries: u32) -> Self {
        Self {
            max_retries,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        }
    }

    /// Delay before retry number `retry` (0-based): `base * 2^retry` scaled by
    /// a uniform jitter factor in `[0.5, 1.0)`, capped at `max_delay`.
    pub fn delay(&self, retry: u32) -> Duration {
        if self.base_delay.is_zero() {
            return Duration::ZERO;
        }
        let exp = self.base_delay.saturating_mul(1u32 << retry.min(16));
        let capped = exp.min(self.max_delay);
        let jitter: f64 = rand::rng().random_range(0.5..1.0);
        capped.mul_f64(jitter)
    }

    /// Runs `op` until it succeeds or the retry budget is spent. The closure
    /// receives the 0-based attempt number. On exhaustion the last error is
    /// returned together with the number of attempts made.
    pub fn run<T, E>(&self, mut op: impl FnMut(u32) -> Result<T, E>) -> Result<T, (E, u32)> {
        let mut attempt = 0;
        loop {
            match op(attempt) {
                Ok(v) => return Ok(v),
                Err(e) if attempt >= self.max_retries => return Err((e, attempt + 1)),
                Err(_) => {
                    std::thread::sleep(self.delay(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HttpError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("cannot decode response: {0}")]
    Decode(String),
    #[error("environment variable `{0}` holding the API key is not set")]
    MissingKey(String),
}

/// A JSON POST endpoint with optional bearer authentication.
#[derive(Debug, Clone)]
pub struct JsonEndpoint {
    url: String,
    token: Option<String>,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl JsonEndpoint {
    pub fn new(url: impl Into<String>, token: Option<String>, retry: RetryPolicy) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Self {
            url: url.into(),
            token,
            agent,
            retry,
        }
    }

    /// Reads the bearer token from `key_env_var` when one is named.
    pub fn from_env(
        url: impl Into<String>,
        key_env_var: Option<&str>,
        retry: RetryPolicy,
    ) -> Result<Self, HttpError> {
        let token = match key_env_var {
            Some(var) if !var.is_empty() => Some(
                std::env::var(var).map_err(|_| HttpError::MissingKey(var.to_string()))?,
            ),
            _ => None,
        };
        Ok(Self::new(url, token, retry))
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// Single POST, no retries.
    pub fn post_once<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        body: &Req,
    ) -> Result<Resp, HttpError> {
        let mut req = self.agent.post(&self.url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| HttpError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(HttpError::Status { status, body });
        }
        resp.body_mut()
            .read_json::<Resp>()
            .map_err(|e| HttpError::Decode(e.to_string()))
    }

    /// POST with the endpoint's retry policy. Returns the last error and the
    /// attempt count on exhaustion.
    pub fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        body: &Req,
    ) -> Result<Resp, (HttpError, u32)> {
        self.retry.run(|_| self.post_once(body))
    }
}


/// Where a provider lives, parsed from a configuration string:
/// `mock:<variant>`, `file:<path>` or an `http(s)://` URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    Mock(String),
    File(std::path::PathBuf),
    Http(String),
}

impl std::str::FromStr for ProviderSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("mock:") {
            Ok(ProviderSpec::Mock(rest.to_string()))
        } else if let Some(rest) = s.strip_prefix("file:") {
            Ok(ProviderSpec::File(rest.into()))
        } else if s.starts_with("http://") || s.starts_with("https://") {
            Ok(ProviderSpec::Http(s.to_string()))
        } else {
            Err(format!(
                "provider `{s}` must start with `mock:`, `file:`, `http://` or `https://`"
            ))
        }
    }
}
