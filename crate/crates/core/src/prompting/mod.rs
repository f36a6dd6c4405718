//! Prompt construction, execution against chat backends, and persistence of
//! system outputs.

mod backend;
mod runner;
mod store;
mod strategy;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::http::RetryPolicy;

pub use backend::{
    strip_instruction, BackendError, BackendSpec, ChatBackend, ChatRequest, HttpChatBackend, MockBackend, MockMode,
};
pub use runner::{cache_key, run_matrix, run_strategy, LedgerEntry, MatrixRun};
pub use store::{CacheKey, OutputStore};
pub(crate) use store::slug;
pub use strategy::{build_prompts, build_prompts_for_code, PromptTemplate, Strategy};

/// System prompt sent with every request unless configured otherwise.
pub const DEFAULT_SYSTEM_PROMPT: &str = "You are a text-to-text model. Your sole purpose is to provide the final output of a requested task. Do not include any interim steps, intermediate results, or conversational filler. Your response must begin directly with the final, complete answer.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub temperature: f64,
    pub top_p: f64,
    pub system_prompt: String,
    pub max_retries: u32,
    /// Concurrent items; the two calls of a decomposition item stay sequential.
    pub parallelism: usize,
    /// First retry delay in milliseconds; doubles per retry, with jitter.
    pub backoff_base_ms: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            top_p: 1.0,
            system_prompt: DEFAULT_SYSTEM_PROMPT.to_string(),
            max_retries: 3,
            parallelism: 4,
            backoff_base_ms: 500,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), PromptError> {
        let bad = |m: String| Err(PromptError::InvalidConfig(m));
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return bad(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return bad(format!("top_p must be in (0, 1], got {}", self.top_p));
        }
        if self.parallelism == 0 {
            return bad("parallelism must be >= 1".into());
        }
        Ok(())
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            base_delay: Duration::from_millis(self.backoff_base_ms),
            max_delay: Duration::from_secs(30),
        }
    }
}

/// One backend exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptExchange {
    pub system_prompt: String,
    pub user_prompt: String,
    pub raw_response: String,
}

/// A hypothesis produced by one (strategy, model, item) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemOutput {
    pub corpus_id: String,
    pub pair_id: String,
    pub strategy: Strategy,
    pub model_id: String,
    pub hypothesis: String,
    /// Step-1 text of a decomposition strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intermediate: Option<String>,
    pub prompt_log: Vec<PromptExchange>,
    pub created_at: String,
    /// Hash of the generation inputs, used as part of the cache key.
    pub prompt_hash: String,
}

impl SystemOutput {
    /// Checks the strategy-dependent shape of the output.
    pub fn is_consistent(&self) -> bool {
        self.intermediate.is_some() == self.strategy.is_decomposition()
            && self.prompt_log.len() == self.strategy.calls()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("unsupported target language `{0}`")]
    UnsupportedLanguage(String),
    #[error("source text is empty")]
    EmptySource,
    #[error("unknown strategy `{name}`; valid strategies: {valid}")]
    UnknownStrategy { name: String, valid: String },
    #[error("backend `{model_id}` failed after {attempts} attempt(s): {message}")]
    Backend {
        model_id: String,
        attempts: u32,
        message: String,
    },
    #[error("backend `{model_id}` returned an empty response at step {step}")]
    EmptyResponse { model_id: String, step: usize },
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("all {failures} work item(s) failed; first error: {first}")]
    TotalOutage { failures: usize, first: String },
    #[error("output store: {0}")]
    Store(#[from] std::io::Error),
}
