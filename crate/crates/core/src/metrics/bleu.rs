//! BLEU-4 with per-reference clipping and a closest-length brevity penalty.
//!
//! The corpus score aggregates clipped matches and totals over all items
//! before taking precisions. An order with no hypothesis n-grams at all (short
//! outputs) has an empty denominator and counts as precision 1, so that
//! `BLEU(h, {h}) = 100` for every non-empty `h`. The sentence-level variant
//! replaces a zero-match order's precision with `1 / (total + 1)`.

use std::collections::HashMap;
use std::hash::Hash;

use super::ngram::NGramMultiset;
use super::MetricError;

pub const MAX_ORDER: usize = 4;

/// Sufficient statistics of one or more hypothesis/reference-set items.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl std::ops::AddAssign for BleuStats {
    fn add_assign(&mut self, rhs: Self) {
        for n in 0..MAX_ORDER {
            self.matches[n] += rhs.matches[n];
            self.totals[n] += rhs.totals[n];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

impl BleuStats {
    pub fn for_item<T: Eq + Hash>(hyp: &[T], refs: &[Vec<T>]) -> Result<Self, MetricError> {
        if refs.is_empty() {
            return Err(MetricError::EmptyReference { index: 0 });
        }
        let mut stats = BleuStats {
            hyp_len: hyp.len(),
            ref_len: closest_ref_len(hyp.len(), refs),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let h = NGramMultiset::new(hyp, n);
            let mut max_ref: HashMap<&[T], usize> = HashMap::new();
            for r in refs {
                for (gram, c) in NGramMultiset::new(r, n).counts {
                    let e = max_ref.entry(gram).or_insert(0);
                    *e = (*e).max(c);
                }
            }
            stats.totals[n - 1] = h.total();
            stats.matches[n - 1] = h
                .counts
                .iter()
                .map(|(g, c)| (*c).min(max_ref.get(g).copied().unwrap_or(0)))
                .sum();
        }
        Ok(stats)
    }

    fn brevity_penalty(&self) -> f64 {
        let (c, r) = (self.hyp_len as f64, self.ref_len as f64);
        if self.hyp_len == 0 {
            if self.ref_len == 0 {
                1.0
            } else {
                0.0
            }
        } else if c < r {
            (1.0 - r / c).exp()
        } else {
            1.0
        }
    }

    /// Unsmoothed score in `[0, 100]`.
    pub fn score(&self) -> f64 {
        let mut log_sum = 0.0;
        for n in 0..MAX_ORDER {
            let (m, t) = (self.matches[n], self.totals[n]);
            if t == 0 {
                continue;
            }
            if m == 0 {
                return 0.0;
            }
            log_sum += (m as f64 / t as f64).ln();
        }
        100.0 * self.brevity_penalty() * (log_sum / MAX_ORDER as f64).exp()
    }

    /// Add-one smoothing on orders with zero matches.
    pub fn smoothed_score(&self) -> f64 {
        let mut log_sum = 0.0;
        for n in 0..MAX_ORDER {
            let (m, t) = (self.matches[n], self.totals[n]);
            if t == 0 {
                continue;
            }
            let p = if m == 0 { 1.0 / (t as f64 + 1.0) } else { m as f64 / t as f64 };
            log_sum += p.ln();
        }
        100.0 * self.brevity_penalty() * (log_sum / MAX_ORDER as f64).exp()
    }
}

/// Reference length closest to the hypothesis length; ties go to the shorter.
fn closest_ref_len<T>(hyp_len: usize, refs: &[Vec<T>]) -> usize {
    refs.iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(hyp_len), r))
        .unwrap_or(0)
}

fn corpus_stats<T: Eq + Hash>(
    hypotheses: &[Vec<T>],
    reference_sets: &[Vec<Vec<T>>],
) -> Result<BleuStats, MetricError> {
    if hypotheses.len() != reference_sets.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: reference_sets.len(),
        });
    }
    let mut total = BleuStats::default();
    for (i, (h, refs)) in hypotheses.iter().zip(reference_sets).enumerate() {
        total += BleuStats::for_item(h, refs).map_err(|_| MetricError::EmptyReference { index: i })?;
    }
    Ok(total)
}

/// Corpus-level BLEU-4 in `[0, 100]`.
pub fn bleu<T: Eq + Hash>(hypotheses: &[Vec<T>], reference_sets: &[Vec<Vec<T>>]) -> Result<f64, MetricError> {
    Ok(corpus_stats(hypotheses, reference_sets)?.score())
}

/// Smoothed sentence-level BLEU, for per-item diagnostics.
pub fn sentence_bleu<T: Eq + Hash>(hypothesis: &[T], references: &[Vec<T>]) -> Result<f64, MetricError> {
    Ok(BleuStats::for_item(hypothesis, references)?.smoothed_score())
}
