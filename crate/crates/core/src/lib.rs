//! Evaluation toolkit for cross-lingual text simplification (CLTS).
//!
//! The crate covers the whole corpus-to-report path:
//!
//! - [`corpus`]: loading, translation augmentation and similarity filtering of
//!   sentence pairs.
//! - [`prompting`]: the five prompting strategies, pluggable chat backends and
//!   a resumable output store.
//! - [`metrics`]: BLEU, SARI and greedy token-embedding similarity.
//! - [`features`]: CoNLL-U ingestion and the linguistic feature suite
//!   (lexical, syntactic, readability, named-entity and grammatical features).
//! - [`stats`]: Welch's t-test, strategy comparisons, quadratic weighted kappa
//!   and the inter-annotator agreement simulation.
//! - [`cli`]: configuration, run manifests and the pipeline stages behind the
//!   `clts` binary.
//!
//! Each capability has a runnable example under `examples/`.

pub mod cli;
pub mod corpus;
pub mod features;
pub mod http;
pub mod lang;
pub mod metrics;
pub mod prompting;
pub mod stats;

pub use lang::Lang;
