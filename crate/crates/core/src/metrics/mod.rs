//! Automatic evaluation metrics: BLEU-4, SARI and a greedy token-embedding
//! similarity, at sentence and corpus level.

mod bleu;
mod embeddings;
mod ngram;
mod sari;
mod score;
mod semantic;
mod tokenize;

pub use bleu::{bleu, sentence_bleu, BleuStats, MAX_ORDER};
pub use embeddings::{
    hashed_vector, token_embedder_from_spec, FileTokenEmbedder, HashTokenEmbedder, HttpTokenEmbedder, PerLanguageEmbedder,
    TokenEmbedder,
};
pub use ngram::NGramMultiset;
pub use sari::{sari, sentence_sari, SariScore};
pub use score::{
    score_outputs, write_aggregates_csv, write_records_jsonl, MetricAggregate, MetricRecord, MetricReport, NullReason,
};
pub use semantic::{semantic_similarity, EmbeddedText, SemanticScore};
pub use tokenize::tokenize_for_metrics;

use crate::corpus::ProviderError;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("{hypotheses} hypotheses but {references} reference sets")]
    LengthMismatch { hypotheses: usize, references: usize },
    #[error("reference set {index} is empty")]
    EmptyReference { index: usize },
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot score an empty token sequence")]
    EmptySequence,
    #[error("token `{0}` has a zero embedding vector")]
    ZeroNorm(String),
    #[error("output refers to unknown pair `{0}`")]
    MissingPair(String),
    #[error("token embedding provider: {0}")]
    Embedding(#[from] ProviderError),
    #[error("writing metric report: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing metric report: {0}")]
    Csv(#[from] csv::Error),
}
