//! Sentence-pair corpora: loading, translation augmentation and similarity
//! filtering.

mod augment;
mod filter;
mod io;
pub mod providers;

use serde::{Deserialize, Serialize};

use crate::Lang;

pub use augment::{augment_with_translation, AugmentFailure, AugmentOutcome};
pub use filter::{cosine, filter_by_similarity, FilterOptions, FilterOutcome, SimilarityDecision};
pub use io::{load_corpus, load_corpus_lenient, save_corpus, CorpusFormat, RowError};
pub use providers::{ProviderError, SentenceEmbedder, Translator};

/// Similarity threshold below which pairs are discarded.
pub const DEFAULT_SIMILARITY_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Where the target-language texts of a pair came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Language the corpus was originally written in.
    pub original_lang: Lang,
    /// References before translation (empty for natively cross-lingual data).
    #[serde(default)]
    pub original_references: Vec<String>,
    /// The source sentence rendered in the target language.
    pub translated_source: String,
    /// Translator identifier, or `native` for parallel data.
    pub translator: String,
}

/// One complex source sentence with its reference simplifications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: String,
    pub source: String,
    pub references: Vec<String>,
    pub source_lang: Lang,
    pub target_lang: Lang,
    pub corpus_id: String,
    pub split: Split,
    /// Source and references share a language and still need translating.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub monolingual_origin: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl SentencePair {
    /// Checks the structural invariants, returning a reason on failure.
    pub fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.source.trim().is_empty() {
            return Err("empty source".into());
        }
        if self.references.is_empty() {
            return Err("references must be non-empty".into());
        }
        if let Some(i) = self.references.iter().position(|r| r.trim().is_empty()) {
            return Err(format!("reference {i} is empty"));
        }
        if self.corpus_id.trim().is_empty() {
            return Err("empty corpus_id".into());
        }
        if self.source_lang == self.target_lang && !self.monolingual_origin {
            return Err(format!(
                "source_lang and target_lang are both `{}` but the pair is not flagged monolingual_origin",
                self.source_lang
            ));
        }
        if self.monolingual_origin && self.source_lang != self.target_lang {
            return Err("monolingual_origin pairs must share source and target language".into());
        }
        Ok(())
    }

    /// The source sentence in the hypothesis language, when available. This
    /// is the source side used by SARI.
    pub fn source_in_target_lang(&self) -> Option<&str> {
        if self.source_lang == self.target_lang {
            return Some(&self.source);
        }
        self.provenance
            .as_ref()
            .map(|p| p.translated_source.as_str())
            .filter(|s| !s.trim().is_empty())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {reason}")]
    Format { row: usize, reason: String },
    #[error("corpus contains no valid pairs")]
    EmptyCorpus,
    #[error("embedding backend failed: {0}")]
    EmbeddingBackend(ProviderError),
    #[error("vector dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero-norm embedding for text `{0}`")]
    ZeroNorm(String),
    #[error("invalid similarity threshold {0}")]
    InvalidThreshold(f64),
}

#[cfg(test)]
pub(crate) fn sample_pair(id: &str) -> SentencePair {
    SentencePair {
        id: id.to_string(),
        source: format!("The source sentence {id}."),
        references: vec![format!("La phrase {id}.")],
        source_lang: Lang::En,
        target_lang: Lang::Fr,
        corpus_id: "test".into(),
        split: Split::Test,
        monolingual_origin: false,
        provenance: None,
    }
}
