//! Linguistic features computed from dependency-annotated documents
//! (CoNLL-U): lexical, syntactic, readability, named-entity and grammatical.
//!
//! Feature tokenization follows the annotation, not the metric tokenizer.

mod conllu;
mod entities;
mod extract;
mod flat;
mod hyphenation;
mod readability;

use rayon::prelude::*;

pub use conllu::{
    parse_conllu, parse_conllu_str, write_conllu, AnnotatedDocument, AnnotatedToken, ConlluError, Sentence,
};
pub use entities::{entity_features, mentions, EntityFeatures, Mention};
pub use extract::{
    extract_features, read_features_csv, tree_depth, write_features_csv, FeatureConfig, FeatureResources, FeatureRow,
    FeatureVector, FrequencyList, LanguageResources,
};
pub use flat::flat_annotation;
pub use hyphenation::{HyphenationError, Hyphenator};
pub use readability::{
    flesch_kincaid_grade, flesch_reading_ease, kincaid_grade, reading_ease, ReadabilityCounts,
};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("document `{0}` has no tokens")]
    EmptyDocument(String),
    #[error("missing resource: {0}")]
    MissingResource(String),
    #[error("malformed resource: {0}")]
    MalformedResource(String),
    #[error(transparent)]
    Hyphenation(#[from] HyphenationError),
    #[error(transparent)]
    Conllu(#[from] ConlluError),
    #[error("feature report: {0}")]
    Csv(#[from] csv::Error),
    #[error("feature report: {0}")]
    Io(#[from] std::io::Error),
}

/// Extracts features for every document, in input order.
pub fn extract_all(
    docs: &[AnnotatedDocument],
    resources: &FeatureResources,
    config: &FeatureConfig,
) -> Result<Vec<FeatureRow>, FeatureError> {
    docs.par_iter()
        .map(|d| Ok(FeatureRow::new(d, extract_features(d, resources, config)?)))
        .collect()
}
