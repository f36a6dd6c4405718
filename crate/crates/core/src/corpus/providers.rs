//! Sentence-embedding and translation providers.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::http::{HttpError, JsonEndpoint, ProviderSpec, RetryPolicy};
use crate::Lang;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} (after {attempts} attempt(s))")]
pub struct ProviderError {
    pub message: String,
    pub attempts: u32,
}

impl ProviderError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            attempts: 1,
        }
    }
}

impl From<(HttpError, u32)> for ProviderError {
    fn from((err, attempts): (HttpError, u32)) -> Self {
        Self {
            message: err.to_string(),
            attempts,
        }
    }
}

/// Maps sentences to fixed-dimension vectors.
pub trait SentenceEmbedder: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Translates a batch of texts between two languages.
pub trait Translator: Send + Sync {
    fn name(&self) -> &str;
    fn translate(&self, texts: &[String], from: Lang, to: Lang) -> Result<Vec<String>, ProviderError>;
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// `POST {"texts": [...]}` → `{"vectors": [[...], ...]}`.
#[derive(Debug, Clone)]
pub struct HttpSentenceEmbedder {
    endpoint: JsonEndpoint,
}

impl HttpSentenceEmbedder {
    pub fn new(endpoint: JsonEndpoint) -> Self {
        Self { endpoint }
    }
}

impl SentenceEmbedder for HttpSentenceEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let resp: EmbedResponse = self.endpoint.post(&EmbedRequest { texts })?;
        if resp.vectors.len() != texts.len() {
            return Err(ProviderError::new(format!(
                "embedding service returned {} vectors for {} texts",
                resp.vectors.len(),
                texts.len()
            )));
        }
        Ok(resp.vectors)
    }
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    texts: &'a [String],
    source_lang: Lang,
    target_lang: Lang,
}

#[derive(Deserialize)]
struct TranslateResponse {
    translations: Vec<String>,
}

/// `POST {"texts", "source_lang", "target_lang"}` → `{"translations": [...]}`.
#[derive(Debug, Clone)]
pub struct HttpTranslator {
    endpoint: JsonEndpoint,
}

impl HttpTranslator {
    pub fn new(endpoint: JsonEndpoint) -> Self {
        Self { endpoint }
    }
}

impl Translator for HttpTranslator {
    fn name(&self) -> &str {
        self.endpoint.url()
    }

    fn translate(&self, texts: &[String], from: Lang, to: Lang) -> Result<Vec<String>, ProviderError> {
        let resp: TranslateResponse = self.endpoint.post(&TranslateRequest {
            texts,
            source_lang: from,
            target_lang: to,
        })?;
        if resp.translations.len() != texts.len() {
            return Err(ProviderError::new(format!(
                "translation service returned {} texts for {} inputs",
                resp.translations.len(),
                texts.len()
            )));
        }
        Ok(resp.translations)
    }
}

/// Precomputed vectors, one JSON object `{"text": ..., "vector": [...]}` per line.
#[derive(Debug, Clone, Default)]
pub struct FileSentenceEmbedder {
    vectors: HashMap<String, Vec<f64>>,
}

#[derive(Deserialize)]
struct VectorLine {
    text: String,
    vector: Vec<f64>,
}

impl FileSentenceEmbedder {
    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::new(format!("{}: {e}", path.display())))?;
        let mut vectors = HashMap::new();
        for (i, line) in body.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let v: VectorLine = serde_json::from_str(line)
                .map_err(|e| ProviderError::new(format!("{} line {}: {e}", path.display(), i + 1)))?;
            vectors.insert(v.text, v.vector);
        }
        Ok(Self { vectors })
    }

    pub fn from_map(vectors: HashMap<String, Vec<f64>>) -> Self {
        Self { vectors }
    }
}

impl SentenceEmbedder for FileSentenceEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        texts
            .iter()
            .map(|t| {
                self.vectors
                    .get(t)
                    .cloned()
                    .ok_or_else(|| ProviderError::new(format!("no precomputed vector for `{t}`")))
            })
            .collect()
    }
}

/// Deterministic offline embedders selected with `mock:<variant>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockSentenceEmbedder {
    /// Every text maps to the same vector, so every cosine is 1.
    Constant,
    /// Sum of hashed lowercase word vectors; cosine tracks word overlap.
    BagOfWords,
}

impl SentenceEmbedder for MockSentenceEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        const DIM: usize = 64;
        Ok(texts
            .iter()
            .map(|t| match self {
                MockSentenceEmbedder::Constant => vec![1.0; DIM],
                MockSentenceEmbedder::BagOfWords => {
                    let mut acc = vec![0.0; DIM];
                    for word in t.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
                        let v = crate::metrics::hashed_vector(&word.to_lowercase(), DIM);
                        acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                    }
                    if acc.iter().all(|x| *x == 0.0) {
                        acc[0] = 1.0;
                    }
                    acc
                }
            })
            .collect())
    }
}

/// Deterministic offline translators selected with `mock:<variant>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockTranslator {
    Identity,
    Uppercase,
}

impl Translator for MockTranslator {
    fn name(&self) -> &str {
        match self {
            MockTranslator::Identity => "mock:identity",
            MockTranslator::Uppercase => "mock:upper",
        }
    }

    fn translate(&self, texts: &[String], _from: Lang, _to: Lang) -> Result<Vec<String>, ProviderError> {
        Ok(match self {
            MockTranslator::Identity => texts.to_vec(),
            MockTranslator::Uppercase => texts.iter().map(|t| t.to_uppercase()).collect(),
        })
    }
}

/// Builds a sentence embedder from a provider spec string.
pub fn sentence_embedder_from_spec(
    spec: &ProviderSpec,
    key_env_var: Option<&str>,
    retry: RetryPolicy,
) -> Result<Box<dyn SentenceEmbedder>, ProviderError> {
    match spec {
        ProviderSpec::Mock(v) => match v.as_str() {
            "" | "bow" => Ok(Box::new(MockSentenceEmbedder::BagOfWords)),
            "constant" => Ok(Box::new(MockSentenceEmbedder::Constant)),
            other => Err(ProviderError::new(format!(
                "unknown mock embedder `{other}` (expected `bow` or `constant`)"
            ))),
        },
        ProviderSpec::File(path) => Ok(Box::new(FileSentenceEmbedder::load(path)?)),
        ProviderSpec::Http(url) => {
            let ep = JsonEndpoint::from_env(url.clone(), key_env_var, retry)
                .map_err(|e| ProviderError::new(e.to_string()))?;
            Ok(Box::new(HttpSentenceEmbedder::new(ep)))
        }
    }
}

/// Builds a translator from a provider spec string.
pub fn translator_from_spec(
    spec: &ProviderSpec,
    key_env_var: Option<&str>,
    retry: RetryPolicy,
) -> Result<Box<dyn Translator>, ProviderError> {
    match spec {
        ProviderSpec::Mock(v) => match v.as_str() {
            "" | "identity" => Ok(Box::new(MockTranslator::Identity)),
            "upper" => Ok(Box::new(MockTranslator::Uppercase)),
            other => Err(ProviderError::new(format!(
                "unknown mock translator `{other}` (expected `identity` or `upper`)"
            ))),
        },
        ProviderSpec::File(_) => Err(ProviderError::new("file-based translators are not supported")),
        ProviderSpec::Http(url) => {
            let ep = JsonEndpoint::from_env(url.clone(), key_env_var, retry)
                .map_err(|e| ProviderError::new(e.to_string()))?;
            Ok(Box::new(HttpTranslator::new(ep)))
        }
    }
}
