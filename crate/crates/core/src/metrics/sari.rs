//! SARI: n-gram additions, retentions and deletions scored against the source
//! and a set of references.
//!
//! Source and hypothesis n-gram counts are multiplied by the number of
//! references so that reference counts (summed over all references) act as
//! fractional agreement. Additions and retentions are scored by F1, deletions
//! by precision only. A precision or recall whose denominator set is empty is
//! 1.0. The four orders are averaged per component and the final score is the
//! mean of the three components, scaled to `[0, 100]`. Corpus SARI is the mean
//! of the sentence scores.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::ngram::NGramMultiset;
use super::MetricError;

const ORDERS: usize = 4;

/// Sentence-level SARI and its components, all in `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SariScore {
    pub add: f64,
    pub keep: f64,
    pub delete: f64,
    pub sari: f64,
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Mean of per-gram ratios, 1.0 on an empty set.
fn mean_or_one(sum: f64, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        sum / n as f64
    }
}

/// (keep F1, deletion precision, addition F1) for one n-gram order.
fn order_scores<'a, T: Eq + Hash>(
    source: &NGramMultiset<'a, T>,
    hyp: &NGramMultiset<'a, T>,
    refs: &HashMap<&'a [T], usize>,
    numref: usize,
) -> (f64, f64, f64) {
    let ref_count = |g: &[T]| refs.get(g).copied().unwrap_or(0);
    let s_rep = |g: &[T]| source.get(g) * numref;
    let c_rep = |g: &[T]| hyp.get(g) * numref;

    // KEEP
    let (mut keep_p_sum, mut keep_p_n) = (0.0, 0);
    for (g, _) in source.counts.iter().filter(|(g, _)| hyp.get(g) > 0) {
        let kept = s_rep(g).min(c_rep(g));
        let good = kept.min(ref_count(g));
        keep_p_sum += good as f64 / kept as f64;
        keep_p_n += 1;
    }
    let (mut keep_r_sum, mut keep_r_n) = (0.0, 0);
    for (g, _) in source.counts.iter().filter(|(g, _)| ref_count(g) > 0) {
        let all = s_rep(g).min(ref_count(g));
        let good = s_rep(g).min(c_rep(g)).min(ref_count(g));
        keep_r_sum += good as f64 / all as f64;
        keep_r_n += 1;
    }
    let keep = f1(mean_or_one(keep_p_sum, keep_p_n), mean_or_one(keep_r_sum, keep_r_n));

    // DELETION (precision only)
    let (mut del_sum, mut del_n) = (0.0, 0);
    for g in source.counts.keys() {
        let deleted = s_rep(g).saturating_sub(c_rep(g));
        if deleted == 0 {
            continue;
        }
        let good = deleted.saturating_sub(ref_count(g));
        del_sum += good as f64 / deleted as f64;
        del_n += 1;
    }
    let delete = mean_or_one(del_sum, del_n);

    // ADDITION (sets)
    let added: HashSet<&[T]> = hyp.counts.keys().copied().filter(|g| source.get(g) == 0).collect();
    let added_good = added.iter().filter(|g| ref_count(g) > 0).count();
    let possible = refs.keys().filter(|g| source.get(g) == 0).count();
    let add_p = if added.is_empty() { 1.0 } else { added_good as f64 / added.len() as f64 };
    let add_r = if possible == 0 { 1.0 } else { added_good as f64 / possible as f64 };
    let add = f1(add_p, add_r);

    (keep, delete, add)
}

/// Sentence-level SARI.
pub fn sentence_sari<T: Eq + Hash>(source: &[T], hypothesis: &[T], references: &[Vec<T>]) -> SariScore {
    let numref = references.len();
    let (mut keep, mut delete, mut add) = (0.0, 0.0, 0.0);
    for n in 1..=ORDERS {
        let s = NGramMultiset::new(source, n);
        let c = NGramMultiset::new(hypothesis, n);
        let mut r: HashMap<&[T], usize> = HashMap::new();
        for reference in references {
            for (g, k) in NGramMultiset::new(reference, n).counts {
                *r.entry(g).or_insert(0) += k;
            }
        }
        let (k, d, a) = order_scores(&s, &c, &r, numref);
        keep += k;
        delete += d;
        add += a;
    }
    let orders = ORDERS as f64;
    let (keep, delete, add) = (keep / orders, delete / orders, add / orders);
    SariScore {
        add: 100.0 * add,
        keep: 100.0 * keep,
        delete: 100.0 * delete,
        sari: 100.0 * (add + keep + delete) / 3.0,
    }
}

/// Corpus SARI: mean of sentence scores, in `[0, 100]`. An empty corpus
/// scores 0.
pub fn sari<T: Eq + Hash>(
    sources: &[Vec<T>],
    hypotheses: &[Vec<T>],
    reference_sets: &[Vec<Vec<T>>],
) -> Result<f64, MetricError> {
    if sources.len() != hypotheses.len() || hypotheses.len() != reference_sets.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: reference_sets.len().min(sources.len()),
        });
    }
    if let Some(index) = reference_sets.iter().position(Vec::is_empty) {
        return Err(MetricError::EmptyReference { index });
    }
    if hypotheses.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = sources
        .iter()
        .zip(hypotheses)
        .zip(reference_sets)
        .map(|((s, h), r)| sentence_sari(s, h, r).sari)
        .sum();
    Ok(total / hypotheses.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_scores_100() {
        let s = toks("a b c d e");
        let score = sentence_sari(&s, &s, std::slice::from_ref(&s));
        assert_eq!(score.keep, 100.0);
        assert_eq!(score.delete, 100.0);
        assert_eq!(score.add, 100.0);
        assert_eq!(score.sari, 100.0);
    }

    #[test]
    fn full_deletion_credit() {
        let score = sentence_sari(&toks("a b c"), &toks("a b"), &[toks("a b")]);
        assert_eq!(score.delete, 100.0);
        assert_eq!(score.sari, 100.0);
    }

    #[test]
    fn unwanted_deletion_and_bad_addition() {
        // Source "a b", reference keeps both, hypothesis replaces b with x.
        let score = sentence_sari(&toks("a b"), &toks("a x"), &[toks("a b")]);
        // Unigrams: keep P = 1, R = 1/2; deleting b is wrong; adding x is wrong.
        // Bigrams: nothing kept while the reference keeps "a b"; "a b" wrongly
        // deleted; "a x" wrongly added. Orders 3 and 4 are empty sets.
        let keep = (2.0 / 3.0 + 0.0 + 1.0 + 1.0) / 4.0;
        let delete = (0.0 + 0.0 + 1.0 + 1.0) / 4.0;
        let add = (0.0 + 0.0 + 1.0 + 1.0) / 4.0;
        assert!((score.keep - 100.0 * keep).abs() < 1e-12);
        assert!((score.delete - 100.0 * delete).abs() < 1e-12);
        assert!((score.add - 100.0 * add).abs() < 1e-12);
        assert!((score.sari - 100.0 * (keep + delete + add) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_hypothesis_is_total() {
        let s = sentence_sari(&toks("a b c"), &[], &[toks("a c")]);
        assert!(s.sari.is_finite());
        assert!((0.0..=100.0).contains(&s.sari));
    }

    #[test]
    fn corpus_errors() {
        let a = vec![toks("a")];
        assert!(matches!(sari(&a, &a, &[]), Err(MetricError::LengthMismatch { .. })));
        assert!(matches!(sari(&a, &a, &[vec![]]), Err(MetricError::EmptyReference { index: 0 })));
        assert_eq!(sari::<&str>(&[], &[], &[]).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn components_bounded(
            s in prop::collection::vec(0u8..4, 0..7),
            h in prop::collection::vec(0u8..4, 0..7),
            r in prop::collection::vec(prop::collection::vec(0u8..4, 0..7), 1..4))
        {
            let sc = sentence_sari(&s, &h, &r);
            for v in [sc.add, sc.keep, sc.delete, sc.sari] {
                prop_assert!((0.0..=100.0).contains(&v), "{:?}", sc);
            }
        }

        #[test]
        fn corpus_permutation_invariant(items in prop::collection::vec(
            (prop::collection::vec(0u8..3, 1..6), prop::collection::vec(0u8..3, 0..6), prop::collection::vec(0u8..3, 1..6)), 1..6))
        {
            let src: Vec<_> = items.iter().map(|i| i.0.clone()).collect();
            let hyp: Vec<_> = items.iter().map(|i| i.1.clone()).collect();
            let refs: Vec<_> = items.iter().map(|i| vec![i.2.clone()]).collect();
            let fwd = sari(&src, &hyp, &refs).unwrap();
            fn rev<T: Clone>(v: &[T]) -> Vec<T> { v.iter().rev().cloned().collect() }
            let bwd = sari(&rev(&src), &rev(&hyp), &rev(&refs)).unwrap();
            prop_assert!((fwd - bwd).abs() < 1e-9);
        }
    }
}
