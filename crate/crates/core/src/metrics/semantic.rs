use serde::{Deserialize, Serialize};

use super::MetricError;

/// Tokens of one text with one embedding vector per token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedText {
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn normalized(text: &EmbeddedText, dim: usize) -> Result<Vec<Vec<f64>>, MetricError> {
    if text.tokens.len() != text.vectors.len() {
        return Err(MetricError::DimensionMismatch {
            expected: text.tokens.len(),
            found: text.vectors.len(),
        });
    }
    text.vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if v.len() != dim {
                return Err(MetricError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(MetricError::ZeroNorm(text.tokens[i].clone()));
            }
            Ok(v.iter().map(|x| x / norm).collect())
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0)
}

/// Greedy-matching token-embedding similarity without IDF weighting or
/// baseline rescaling.
///
/// Precision averages, over hypothesis tokens, the best cosine to any
/// reference token; recall does the same from the reference side. F1 is
/// their harmonic mean when both have the same sign, otherwise the smaller
/// of the two, which keeps `f1 <= max(precision, recall)`.
pub fn semantic_similarity(hyp: &EmbeddedText, reference: &EmbeddedText) -> Result<SemanticScore, MetricError> {
    if hyp.tokens.is_empty() || reference.tokens.is_empty() {
        return Err(MetricError::EmptySequence);
    }
    let dim = hyp.vectors.first().map(Vec::len).unwrap_or(0);
    let h = normalized(hyp, dim)?;
    let r = normalized(reference, dim)?;

    let greedy = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter()
            .map(|a| to.iter().map(|b| dot(a, b)).fold(f64::NEG_INFINITY, f64::max))
            .sum::<f64>()
            / from.len() as f64
    };
    let precision = greedy(&h, &r);
    let recall = greedy(&r, &h);
    let f1 = if precision * recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        precision.min(recall)
    };
    Ok(SemanticScore { precision, recall, f1 })
}
