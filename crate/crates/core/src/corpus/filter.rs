use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CorpusError, SentenceEmbedder, SentencePair, DEFAULT_SIMILARITY_THRESHOLD};

/// Outcome of the similarity check for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityDecision {
    pub pair_id: String,
    /// Maximum cosine between the source and any reference.
    pub score: f64,
    pub kept: bool,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    /// Pairs scoring `>= threshold` are kept.
    pub threshold: f64,
    /// Texts per embedding request.
    pub batch_size: usize,
    /// Concurrent embedding requests.
    pub parallelism: usize,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_SIMILARITY_THRESHOLD,
            batch_size: 64,
            parallelism: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<SentencePair>,
    /// One decision per input pair, in input order.
    pub decisions: Vec<SimilarityDecision>,
}

impl FilterOutcome {
    pub fn filtered_ids(&self) -> impl Iterator<Item = &str> {
        self.decisions.iter().filter(|d| !d.kept).map(|d| d.pair_id.as_str())
    }
}

/// Cosine similarity of two raw vectors. Zero-norm inputs are an error rather
/// than a score of 0.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, CorpusError> {
    if a.len() != b.len() {
        return Err(CorpusError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(CorpusError::ZeroNorm(String::new()));
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Keeps pairs whose source is semantically close to at least one reference.
///
/// The score of a multi-reference pair is the maximum cosine over its
/// references; the comparison with the threshold is inclusive.
pub fn filter_by_similarity(
    pairs: &[SentencePair],
    embedder: &dyn SentenceEmbedder,
    opts: &FilterOptions,
) -> Result<FilterOutcome, CorpusError> {
    if opts.threshold.is_nan() {
        return Err(CorpusError::InvalidThreshold(opts.threshold));
    }
    let texts: Vec<String> = pairs
        .iter()
        .flat_map(|p| std::iter::once(p.source.clone()).chain(p.references.iter().cloned()))
        .collect();
    let vectors = embed_all(&texts, embedder, opts)?;

    let dim = vectors.first().map(Vec::len).unwrap_or(0);
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(CorpusError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }

    let mut kept = Vec::new();
    let mut decisions = Vec::with_capacity(pairs.len());
    let mut offset = 0;
    for pair in pairs {
        let src = &vectors[offset];
        let mut score = f64::NEG_INFINITY;
        for (k, reference) in pair.references.iter().enumerate() {
            let v = &vectors[offset + 1 + k];
            let c = cosine(src, v).map_err(|e| match e {
                CorpusError::ZeroNorm(_) if is_zero(src) => CorpusError::ZeroNorm(pair.source.clone()),
                CorpusError::ZeroNorm(_) => CorpusError::ZeroNorm(reference.clone()),
                other => other,
            })?;
            score = score.max(c);
        }
        offset += 1 + pair.references.len();
        let keep = score >= opts.threshold;
        decisions.push(SimilarityDecision {
            pair_id: pair.id.clone(),
            score,
            kept: keep,
            threshold: opts.threshold,
        });
        if keep {
            kept.push(pair.clone());
        }
    }
    Ok(FilterOutcome { kept, decisions })
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|x| *x == 0.0)
}

fn embed_all(
    texts: &[String],
    embedder: &dyn SentenceEmbedder,
    opts: &FilterOptions,
) -> Result<Vec<Vec<f64>>, CorpusError> {
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism.max(1))
        .build()
        .expect("thread pool");
    let batches: Vec<&[String]> = texts.chunks(opts.batch_size.max(1)).collect();
    let results: Vec<Result<Vec<Vec<f64>>, _>> =
        pool.install(|| batches.par_iter().map(|b| embedder.embed(b)).collect());
    let mut out = Vec::with_capacity(texts.len());
    for (batch, res) in batches.iter().zip(results) {
        let vectors = res.map_err(CorpusError::EmbeddingBackend)?;
        if vectors.len() != batch.len() {
            return Err(CorpusError::EmbeddingBackend(super::ProviderError::new(format!(
                "expected {} vectors, got {}",
                batch.len(),
                vectors.len()
            ))));
        }
        out.extend(vectors);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::providers::{FileSentenceEmbedder, MockSentenceEmbedder};
    use crate::corpus::sample_pair;
    use std::collections::HashMap;

    /// Source maps to e1, each reference to a unit vector at a chosen cosine.
    fn stub(pairs: &[(SentencePair, f64)]) -> FileSentenceEmbedder {
        let mut map = HashMap::new();
        for (p, score) in pairs {
            map.insert(p.source.clone(), vec![1.0, 0.0]);
            let s: f64 = *score;
            map.insert(p.references[0].clone(), vec![s, (1.0 - s * s).sqrt()]);
        }
        FileSentenceEmbedder::from_map(map)
    }

    #[test]
    fn identical_texts_are_kept() {
        let mut p = sample_pair("x");
        p.references = vec![p.source.clone()];
        let out = filter_by_similarity(&[p], &MockSentenceEmbedder::BagOfWords, &FilterOptions::default()).unwrap();
        assert_eq!(out.kept.len(), 1);
        assert!((out.decisions[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_vectors_are_filtered() {
        let p = sample_pair("x");
        let mut map = HashMap::new();
        map.insert(p.source.clone(), vec![1.0, 0.0]);
        map.insert(p.references[0].clone(), vec![0.0, 1.0]);
        let out = filter_by_similarity(&[p], &FileSentenceEmbedder::from_map(map), &FilterOptions::default()).unwrap();
        assert!(out.kept.is_empty());
        assert_eq!(out.decisions[0].score, 0.0);
    }

    #[test]
    fn threshold_is_inclusive() {
        let pairs: Vec<(SentencePair, f64)> =
            [("a", 0.59), ("b", 0.60), ("c", 0.61)].iter().map(|(id, s)| (sample_pair(id), *s)).collect();
        let emb = stub(&pairs);
        let input: Vec<SentencePair> = pairs.iter().map(|(p, _)| p.clone()).collect();
        let out = filter_by_similarity(&input, &emb, &FilterOptions { batch_size: 2, ..Default::default() }).unwrap();
        let kept: Vec<&str> = out.kept.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(kept, vec!["b", "c"]);
        assert_eq!(out.filtered_ids().collect::<Vec<_>>(), vec!["a"]);
    }

    #[test]
    fn multi_reference_uses_maximum() {
        let mut p = sample_pair("m");
        p.references = vec!["far".into(), "near".into()];
        let mut map = HashMap::new();
        map.insert(p.source.clone(), vec![1.0, 0.0]);
        map.insert("far".to_string(), vec![0.0, 1.0]);
        map.insert("near".to_string(), vec![1.0, 1.0]);
        let out = filter_by_similarity(&[p], &FileSentenceEmbedder::from_map(map), &FilterOptions::default()).unwrap();
        assert!((out.decisions[0].score - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(out.decisions[0].kept);
    }

    #[test]
    fn extreme_thresholds() {
        let pairs: Vec<SentencePair> = (0..5).map(|i| sample_pair(&i.to_string())).collect();
        let emb = MockSentenceEmbedder::BagOfWords;
        let all = filter_by_similarity(&pairs, &emb, &FilterOptions { threshold: -1.0, ..Default::default() }).unwrap();
        assert_eq!(all.kept.len(), 5);
        let none = filter_by_similarity(&pairs, &emb, &FilterOptions { threshold: 1.01, ..Default::default() }).unwrap();
        assert!(none.kept.is_empty());
        assert_eq!(none.decisions.len(), 5);
    }

    #[test]
    fn zero_norm_and_dimension_errors() {
        let p = sample_pair("z");
        let mut map = HashMap::new();
        map.insert(p.source.clone(), vec![0.0, 0.0]);
        map.insert(p.references[0].clone(), vec![1.0, 0.0]);
        let err = filter_by_similarity(std::slice::from_ref(&p), &FileSentenceEmbedder::from_map(map), &FilterOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::ZeroNorm(ref t) if *t == p.source));

        let mut map = HashMap::new();
        map.insert(p.source.clone(), vec![1.0, 0.0]);
        map.insert(p.references[0].clone(), vec![1.0, 0.0, 0.0]);
        let err = filter_by_similarity(&[p], &FileSentenceEmbedder::from_map(map), &FilterOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::DimensionMismatch { .. }));
    }

    #[test]
    fn backend_error_surfaces() {
        let p = sample_pair("q");
        let err = filter_by_similarity(&[p], &FileSentenceEmbedder::default(), &FilterOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::EmbeddingBackend(_)));
    }
}
