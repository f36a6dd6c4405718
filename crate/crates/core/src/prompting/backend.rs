//! Chat-completion backends: `(system prompt, user prompt, temperature,
//! top_p) -> text`.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::strategy::Strategy;
use crate::http::{HttpError, JsonEndpoint, RetryPolicy};
use crate::Lang;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChatRequest<'a> {
    pub system_prompt: &'a str,
    pub user_prompt: &'a str,
    pub temperature: f64,
    pub top_p: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct BackendError(pub String);

impl From<HttpError> for BackendError {
    fn from(e: HttpError) -> Self {
        BackendError(e.to_string())
    }
}

/// A text-generation backend. One `complete` call is one attempt; retries
/// are handled by the caller.
pub trait ChatBackend: Send + Sync {
    fn model_id(&self) -> &str;
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        (**self).complete(request)
    }
}

impl<B: ChatBackend + ?Sized> ChatBackend for &B {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        (**self).complete(request)
    }
}

/// Behaviour of the in-process mock backend (`mock:<mode>` base URLs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockMode {
    /// Returns the user prompt verbatim.
    Echo,
    /// Returns the payload, i.e. the user prompt minus any known instruction.
    Payload,
    /// Always returns the given text.
    Const(String),
    /// Always fails.
    Fail,
}

impl MockMode {
    pub fn parse(spec: &str) -> Result<Self, String> {
        match spec {
            "" | "payload" => Ok(MockMode::Payload),
            "echo" => Ok(MockMode::Echo),
            "fail" => Ok(MockMode::Fail),
            s => match s.strip_prefix("const:") {
                Some(text) => Ok(MockMode::Const(text.to_string())),
                None => Err(format!(
                    "unknown mock backend `mock:{s}` (expected payload, echo, fail or const:<text>)"
                )),
            },
        }
    }
}

/// Deterministic in-process backend that counts its calls.
#[derive(Debug)]
pub struct MockBackend {
    model_id: String,
    mode: MockMode,
    calls: AtomicUsize,
}

impl MockBackend {
    pub fn new(model_id: impl Into<String>, mode: MockMode) -> Self {
        Self {
            model_id: model_id.into(),
            mode,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

/// Strips the longest known instruction prefix from a user prompt.
pub fn strip_instruction(prompt: &str) -> &str {
    Strategy::ALL
        .iter()
        .flat_map(|s| Lang::ALL.iter().flat_map(move |l| s.instructions(*l)))
        .filter(|i| prompt.starts_with(i.as_str()))
        .map(|i| i.len())
        .max()
        .map_or(prompt, |n| &prompt[n..])
}

impl ChatBackend for MockBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        match &self.mode {
            MockMode::Echo => Ok(request.user_prompt.to_string()),
            MockMode::Payload => Ok(strip_instruction(request.user_prompt).to_string()),
            MockMode::Const(text) => Ok(text.clone()),
            MockMode::Fail => Err(BackendError("mock backend configured to fail".into())),
        }
    }
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 2],
    temperature: f64,
    top_p: f64,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

/// OpenAI-compatible `POST {base_url}/chat/completions` adapter.
#[derive(Debug, Clone)]
pub struct HttpChatBackend {
    model_id: String,
    model: String,
    endpoint: JsonEndpoint,
}

impl HttpChatBackend {
    pub fn new(model_id: impl Into<String>, base_url: &str, model: impl Into<String>, token: Option<String>) -> Self {
        let url = format!("{}/chat/completions", base_url.trim_end_matches('/'));
        Self {
            model_id: model_id.into(),
            model: model.into(),
            endpoint: JsonEndpoint::new(url, token, RetryPolicy::no_delay(0)),
        }
    }
}

impl ChatBackend for HttpChatBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        let body = CompletionRequest {
            model: &self.model,
            messages: [
                Message {
                    role: "system",
                    content: request.system_prompt,
                },
                Message {
                    role: "user",
                    content: request.user_prompt,
                },
            ],
            temperature: request.temperature,
            top_p: request.top_p,
        };
        let resp: CompletionResponse = self.endpoint.post_once(&body)?;
        resp.choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| BackendError("response has no message content".into()))
    }
}

/// Connection details of one backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendSpec {
    /// Identifier recorded in outputs and reports.
    pub name: String,
    /// `mock:<mode>` or an HTTP base URL such as `https://api.openai.com/v1`.
    pub base_url: String,
    /// Provider model name sent in requests.
    #[serde(default)]
    pub model: String,
    /// Environment variable holding the API key.
    #[serde(default)]
    pub key_env_var: Option<String>,
}

impl BackendSpec {
    pub fn build(&self) -> Result<Box<dyn ChatBackend>, String> {
        if let Some(mode) = self.base_url.strip_prefix("mock:") {
            return Ok(Box::new(MockBackend::new(self.name.clone(), MockMode::parse(mode)?)));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(format!("backend `{}`: base_url must be `mock:...` or an HTTP URL", self.name));
        }
        let token = match self.key_env_var.as_deref().filter(|v| !v.is_empty()) {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                format!("backend `{}`: environment variable `{var}` is not set", self.name)
            })?),
            None => None,
        };
        let model = if self.model.is_empty() { self.name.clone() } else { self.model.clone() };
        Ok(Box::new(HttpChatBackend::new(self.name.clone(), &self.base_url, model, token)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(user: &str) -> ChatRequest<'_> {
        ChatRequest {
            system_prompt: "sys",
            user_prompt: user,
            temperature: 1.0,
            top_p: 1.0,
        }
    }

    #[test]
    fn mock_modes() {
        let p = "Please simplify the following text in French: Bonjour: le monde.";
        let echo = MockBackend::new("m", MockMode::Echo);
        assert_eq!(echo.complete(&req(p)).unwrap(), p);
        let payload = MockBackend::new("m", MockMode::Payload);
        assert_eq!(payload.complete(&req(p)).unwrap(), "Bonjour: le monde.");
        assert_eq!(payload.complete(&req("free text")).unwrap(), "free text");
        assert_eq!(payload.calls(), 2);
        assert!(MockBackend::new("m", MockMode::Fail).complete(&req(p)).is_err());
        assert_eq!(MockMode::parse("const:X").unwrap(), MockMode::Const("X".into()));
        assert!(MockMode::parse("nope").is_err());
    }

    #[test]
    fn longest_instruction_wins() {
        let p = "Please first translate the following text to English and then simplify the translated text in English: Salut";
        assert_eq!(strip_instruction(p), "Salut");
    }

    #[test]
    fn spec_building() {
        let spec = BackendSpec {
            name: "mock-model".into(),
            base_url: "mock:echo".into(),
            model: String::new(),
            key_env_var: None,
        };
        assert_eq!(spec.build().unwrap().model_id(), "mock-model");
        let bad = BackendSpec {
            base_url: "https://example.invalid/v1".into(),
            key_env_var: Some("CLTS_TEST_SURELY_UNSET_KEY".into()),
            ..spec
        };
        let err = bad.build().err().expect("missing key must fail");
        assert!(err.contains("CLTS_TEST_SURELY_UNSET_KEY"));
    }
}
