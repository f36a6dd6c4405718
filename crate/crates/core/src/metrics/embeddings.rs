//! Per-token embedding providers for the semantic similarity score.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::semantic::EmbeddedText;
use super::tokenize::tokenize_for_metrics;
use crate::corpus::ProviderError;
use crate::http::{JsonEndpoint, ProviderSpec, RetryPolicy};
use crate::Lang;

/// Tokenizes texts and returns one vector per token.
pub trait TokenEmbedder: Send + Sync {
    fn embed_tokens(&self, texts: &[String], lang: Lang) -> Result<Vec<EmbeddedText>, ProviderError>;

    fn supports(&self, _lang: Lang) -> bool {
        true
    }
}

/// Dispatches to one embedder per output language.
#[derive(Default)]
pub struct PerLanguageEmbedder {
    by_lang: HashMap<Lang, Box<dyn TokenEmbedder>>,
}

impl PerLanguageEmbedder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, lang: Lang, embedder: Box<dyn TokenEmbedder>) -> Self {
        self.by_lang.insert(lang, embedder);
        self
    }
}

impl TokenEmbedder for PerLanguageEmbedder {
    fn embed_tokens(&self, texts: &[String], lang: Lang) -> Result<Vec<EmbeddedText>, ProviderError> {
        match self.by_lang.get(&lang) {
            Some(e) => e.embed_tokens(texts, lang),
            None => Err(ProviderError::new(format!("no token embedder configured for `{lang}`"))),
        }
    }

    fn supports(&self, lang: Lang) -> bool {
        self.by_lang.contains_key(&lang)
    }
}

/// Deterministic pseudo-random vector in `[-1, 1]^dim` derived from `key`.
pub fn hashed_vector(key: &str, dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    let mut block = 0u32;
    while out.len() < dim {
        let mut hasher = Sha256::new();
        hasher.update(key.as_bytes());
        hasher.update(block.to_le_bytes());
        let digest = hasher.finalize();
        for chunk in digest.chunks_exact(4) {
            if out.len() == dim {
                break;
            }
            let x = u32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            out.push(x as f64 / u32::MAX as f64 * 2.0 - 1.0);
        }
        block += 1;
    }
    out
}

/// Offline embedder: metric tokenization plus a hashed vector per token
/// type, so identical tokens have cosine 1.
#[derive(Debug, Clone, Copy)]
pub struct HashTokenEmbedder {
    pub dim: usize,
}

impl Default for HashTokenEmbedder {
    fn default() -> Self {
        Self { dim: 32 }
    }
}

impl TokenEmbedder for HashTokenEmbedder {
    fn embed_tokens(&self, texts: &[String], lang: Lang) -> Result<Vec<EmbeddedText>, ProviderError> {
        Ok(texts
            .iter()
            .map(|t| {
                let tokens = tokenize_for_metrics(t, lang);
                let vectors = tokens.iter().map(|tok| hashed_vector(tok, self.dim)).collect();
                EmbeddedText { tokens, vectors }
            })
            .collect())
    }
}

#[derive(Serialize)]
struct TokenEmbedRequest<'a> {
    texts: &'a [String],
    lang: Lang,
}

#[derive(Deserialize)]
struct TokenEmbedResponse {
    tokens: Vec<Vec<String>>,
    vectors: Vec<Vec<Vec<f64>>>,
}

/// `POST {"texts": [...], "lang": ..}` → `{"tokens": [[..]], "vectors": [[[..]]]}`.
#[derive(Debug, Clone)]
pub struct HttpTokenEmbedder {
    endpoint: JsonEndpoint,
}

impl HttpTokenEmbedder {
    pub fn new(endpoint: JsonEndpoint) -> Self {
        Self { endpoint }
    }
}

impl TokenEmbedder for HttpTokenEmbedder {
    fn embed_tokens(&self, texts: &[String], lang: Lang) -> Result<Vec<EmbeddedText>, ProviderError> {
        let resp: TokenEmbedResponse = self.endpoint.post(&TokenEmbedRequest { texts, lang })?;
        if resp.tokens.len() != texts.len() || resp.vectors.len() != texts.len() {
            return Err(ProviderError::new(format!(
                "token embedding service returned {}/{} entries for {} texts",
                resp.tokens.len(),
                resp.vectors.len(),
                texts.len()
            )));
        }
        Ok(resp
            .tokens
            .into_iter()
            .zip(resp.vectors)
            .map(|(tokens, vectors)| EmbeddedText { tokens, vectors })
            .collect())
    }
}

#[derive(Deserialize)]
struct TokenVectorLine {
    text: String,
    lang: Lang,
    tokens: Vec<String>,
    vectors: Vec<Vec<f64>>,
}

/// Precomputed token embeddings: one JSON object per line with fields
/// `text`, `lang`, `tokens` and `vectors`.
#[derive(Debug, Clone, Default)]
pub struct FileTokenEmbedder {
    entries: HashMap<(Lang, String), EmbeddedText>,
}

impl FileTokenEmbedder {
    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::new(format!("{}: {e}", path.display())))?;
        let mut entries = HashMap::new();
        for (i, line) in body.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let l: TokenVectorLine = serde_json::from_str(line)
                .map_err(|e| ProviderError::new(format!("{} line {}: {e}", path.display(), i + 1)))?;
            entries.insert(
                (l.lang, l.text),
                EmbeddedText {
                    tokens: l.tokens,
                    vectors: l.vectors,
                },
            );
        }
        Ok(Self { entries })
    }
}

impl TokenEmbedder for FileTokenEmbedder {
    fn embed_tokens(&self, texts: &[String], lang: Lang) -> Result<Vec<EmbeddedText>, ProviderError> {
        texts
            .iter()
            .map(|t| {
                self.entries
                    .get(&(lang, t.clone()))
                    .cloned()
                    .ok_or_else(|| ProviderError::new(format!("no precomputed token vectors for `{t}` ({lang})")))
            })
            .collect()
    }
}

pub fn token_embedder_from_spec(
    spec: &ProviderSpec,
    key_env_var: Option<&str>,
    retry: RetryPolicy,
) -> Result<Box<dyn TokenEmbedder>, ProviderError> {
    match spec {
        ProviderSpec::Mock(v) => match v.as_str() {
            "" | "hash" => Ok(Box::new(HashTokenEmbedder::default())),
            other => Err(ProviderError::new(format!("unknown mock token embedder `{other}` (expected `hash`)"))),
        },
        ProviderSpec::File(path) => Ok(Box::new(FileTokenEmbedder::load(path)?)),
        ProviderSpec::Http(url) => {
            let ep = JsonEndpoint::from_env(url.clone(), key_env_var, retry)
                .map_err(|e| ProviderError::new(e.to_string()))?;
            Ok(Box::new(HttpTokenEmbedder::new(ep)))
        }
    }
}
