use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::backend::{ChatBackend, ChatRequest};
use super::store::{CacheKey, OutputStore};
use super::strategy::{build_prompts, PromptTemplate, Strategy};
use super::{GenerationConfig, PromptError, PromptExchange, SystemOutput};
use crate::corpus::SentencePair;

/// A failed (model, strategy, item) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub corpus_id: String,
    pub pair_id: String,
    pub model_id: String,
    pub strategy: Strategy,
    pub attempts: u32,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct MatrixRun {
    /// Successful outputs in (model, strategy, item) order.
    pub outputs: Vec<SystemOutput>,
    pub ledger: Vec<LedgerEntry>,
    /// Outputs served from the store without calling the backend.
    pub cache_hits: usize,
}

fn prompt_hash(cfg: &GenerationConfig, first_prompt: &str) -> String {
    let mut h = Sha256::new();
    for part in [
        cfg.system_prompt.as_str(),
        first_prompt,
        &cfg.temperature.to_string(),
        &cfg.top_p.to_string(),
    ] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

fn prompts_for(strategy: Strategy, pair: &SentencePair) -> Result<Vec<PromptTemplate>, PromptError> {
    build_prompts(strategy, &pair.source, pair.target_lang)
}

/// Key under which the output of this (strategy, item, model) is cached.
pub fn cache_key(
    strategy: Strategy,
    pair: &SentencePair,
    model_id: &str,
    cfg: &GenerationConfig,
) -> Result<CacheKey, PromptError> {
    let prompts = prompts_for(strategy, pair)?;
    Ok(CacheKey {
        model_id: model_id.to_string(),
        strategy,
        pair_id: pair.id.clone(),
        prompt_hash: prompt_hash(cfg, &prompts[0].render("")),
    })
}

enum CallFailure {
    Backend(String),
    Empty,
}

/// Runs one strategy on one item. Decomposition strategies make two calls;
/// the trimmed step-1 response is the whole payload of step 2.
pub fn run_strategy<B: ChatBackend + ?Sized>(
    strategy: Strategy,
    pair: &SentencePair,
    backend: &B,
    cfg: &GenerationConfig,
) -> Result<SystemOutput, PromptError> {
    run_counting(strategy, pair, backend, cfg).map_err(|(e, _)| e)
}

fn run_counting<B: ChatBackend + ?Sized>(
    strategy: Strategy,
    pair: &SentencePair,
    backend: &B,
    cfg: &GenerationConfig,
) -> Result<SystemOutput, (PromptError, u32)> {
    let prompts = prompts_for(strategy, pair).map_err(|e| (e, 0))?;
    let policy = cfg.retry_policy();
    let model_id = backend.model_id().to_string();
    let first_prompt = prompts[0].render("");
    let mut log = Vec::with_capacity(prompts.len());
    let mut previous = String::new();
    let mut attempts_total = 0;

    for (step, template) in prompts.iter().enumerate() {
        let user_prompt = template.render(&previous);
        let request = ChatRequest {
            system_prompt: &cfg.system_prompt,
            user_prompt: &user_prompt,
            temperature: cfg.temperature,
            top_p: cfg.top_p,
        };
        let mut tries = 0;
        let result = policy.run(|attempt| {
            tries = attempt + 1;
            match backend.complete(&request) {
                Ok(text) if text.trim().is_empty() => Err(CallFailure::Empty),
                Ok(text) => Ok(text),
                Err(e) => Err(CallFailure::Backend(e.0)),
            }
        });
        let raw = match result {
            Ok(raw) => raw,
            Err((failure, attempts)) => {
                let err = match failure {
                    CallFailure::Empty => PromptError::EmptyResponse {
                        model_id,
                        step: step + 1,
                    },
                    CallFailure::Backend(message) => PromptError::Backend {
                        model_id,
                        attempts,
                        message,
                    },
                };
                return Err((err, attempts_total + attempts));
            }
        };
        attempts_total += tries;
        previous = raw.trim().to_string();
        log.push(PromptExchange {
            system_prompt: cfg.system_prompt.clone(),
            user_prompt,
            raw_response: raw,
        });
    }

    let intermediate = strategy
        .is_decomposition()
        .then(|| log[0].raw_response.trim().to_string());
    Ok(SystemOutput {
        corpus_id: pair.corpus_id.clone(),
        pair_id: pair.id.clone(),
        strategy,
        model_id,
        hypothesis: previous,
        intermediate,
        prompt_log: log,
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        prompt_hash: prompt_hash(cfg, &first_prompt),
    })
}

/// Runs every (model, strategy, item) triple, reusing outputs already in
/// `store` and persisting new ones. Individual failures are collected in the
/// ledger; the run only fails as a whole if no triple succeeded.
pub fn run_matrix<B: ChatBackend>(
    pairs: &[SentencePair],
    strategies: &[Strategy],
    backends: &[B],
    cfg: &GenerationConfig,
    store: &OutputStore,
) -> Result<MatrixRun, PromptError> {
    cfg.validate()?;
    let work: Vec<(&B, Strategy, &SentencePair)> = backends
        .iter()
        .flat_map(|b| strategies.iter().flat_map(move |s| pairs.iter().map(move |p| (b, *s, p))))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| PromptError::InvalidConfig(e.to_string()))?;

    enum Outcome {
        Cached(SystemOutput),
        Fresh(SystemOutput),
        Failed(LedgerEntry),
    }

    let outcomes: Vec<Result<Outcome, PromptError>> = pool.install(|| {
        work.par_iter()
            .map(|&(backend, strategy, pair)| {
                let failed = |error: String, attempts| LedgerEntry {
                    corpus_id: pair.corpus_id.clone(),
                    pair_id: pair.id.clone(),
                    model_id: backend.model_id().to_string(),
                    strategy,
                    attempts,
                    error,
                };
                let key = match cache_key(strategy, pair, backend.model_id(), cfg) {
                    Ok(k) => k,
                    Err(e) => return Ok(Outcome::Failed(failed(e.to_string(), 0))),
                };
                if let Some(hit) = store.get(&key) {
                    return Ok(Outcome::Cached(hit));
                }
                match run_counting(strategy, pair, backend, cfg) {
                    Ok(out) => {
                        store.insert(out.clone())?;
                        Ok(Outcome::Fresh(out))
                    }
                    Err((e, attempts)) => {
                        log::warn!("{} / {} / {}: {e}", pair.id, backend.model_id(), strategy);
                        let entry = failed(e.to_string(), attempts);
                        store.record_error(&entry)?;
                        Ok(Outcome::Failed(entry))
                    }
                }
            })
            .collect()
    });

    let mut run = MatrixRun::default();
    for outcome in outcomes {
        match outcome? {
            Outcome::Cached(o) => {
                run.cache_hits += 1;
                run.outputs.push(o);
            }
            Outcome::Fresh(o) => run.outputs.push(o),
            Outcome::Failed(e) => run.ledger.push(e),
        }
    }
    if run.outputs.is_empty() && !run.ledger.is_empty() {
        return Err(PromptError::TotalOutage {
            failures: run.ledger.len(),
            first: run.ledger[0].error.clone(),
        });
    }
    Ok(run)
}
