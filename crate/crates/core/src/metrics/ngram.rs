use std::collections::HashMap;
use std::hash::Hash;

/// Counts of all `order`-grams of a token sequence, borrowing the tokens.
#[derive(Debug, Clone)]
pub struct NGramMultiset<'a, T> {
    pub order: usize,
    pub counts: HashMap<&'a [T], usize>,
}

impl<'a, T: Eq + Hash> NGramMultiset<'a, T> {
    pub fn new(tokens: &'a [T], order: usize) -> Self {
        assert!(order >= 1, "n-gram order starts at 1");
        let mut counts = HashMap::new();
        if tokens.len() >= order {
            for gram in tokens.windows(order) {
                *counts.entry(gram).or_insert(0) += 1;
            }
        }
        Self { order, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn get(&self, gram: &[T]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}
