//! Named-entity features from BIO labels.
//!
//! Entities are identified by their case-folded surface string. Positions are
//! 1-based token indices over the whole document; distances are gaps between
//! mention starts. Fewer than two mentions gives 0 for distance features.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::conllu::AnnotatedDocument;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    /// 1-based document token index of the first token.
    pub start: usize,
    pub sentence: usize,
    pub entity_type: String,
    /// Case-folded surface form.
    pub key: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityFeatures {
    pub max_same_entity_distance: f64,
    pub unique_entities: f64,
    pub unique_entities_average: f64,
    pub avg_same_entity_distance: f64,
    pub entity_to_token_ratio: f64,
    pub unique_to_total_entities: f64,
    pub consecutive_entity_distance: f64,
}

enum Tag<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

fn tag(label: Option<&str>) -> Tag<'_> {
    match label {
        Some(l) => match l.split_once('-') {
            Some(("B", t)) => Tag::Begin(t),
            Some(("I", t)) => Tag::Inside(t),
            _ => Tag::Outside,
        },
        None => Tag::Outside,
    }
}

/// Contiguous BIO spans. An `I-` tag that does not continue a span of the
/// same type is treated as `B-` and logged.
pub fn mentions(doc: &AnnotatedDocument) -> Vec<Mention> {
    let mut out: Vec<Mention> = Vec::new();
    let mut forms: Vec<Vec<&str>> = Vec::new();
    let mut position = 0;
    for (si, sentence) in doc.sentences.iter().enumerate() {
        let mut open: Option<&str> = None;
        for token in &sentence.tokens {
            position += 1;
            let begin = |t: &str, out: &mut Vec<Mention>, forms: &mut Vec<Vec<&str>>| {
                out.push(Mention {
                    start: position,
                    sentence: si,
                    entity_type: t.to_string(),
                    key: String::new(),
                });
                forms.push(Vec::new());
            };
            match tag(token.ner.as_deref()) {
                Tag::Outside => {
                    open = None;
                    continue;
                }
                Tag::Begin(t) => {
                    begin(t, &mut out, &mut forms);
                    open = Some(t);
                }
                Tag::Inside(t) if open == Some(t) => {}
                Tag::Inside(t) => {
                    log::warn!(
                        "{}: orphan I-{t} at sentence {} token {}; treating as B-{t}",
                        doc.doc_id,
                        si + 1,
                        token.index
                    );
                    begin(t, &mut out, &mut forms);
                    open = Some(t);
                }
            }
            forms.last_mut().expect("open mention").push(&token.form);
        }
    }
    for (m, f) in out.iter_mut().zip(forms) {
        m.key = f.join(" ").to_lowercase();
    }
    out
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn entity_features(doc: &AnnotatedDocument) -> EntityFeatures {
    let ms = mentions(doc);
    let tokens = doc.tokens().count();
    let sentences = doc.sentences.len();
    if ms.is_empty() {
        return EntityFeatures::default();
    }

    let unique: BTreeSet<&str> = ms.iter().map(|m| m.key.as_str()).collect();
    let mut per_sentence: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); sentences];
    for m in &ms {
        per_sentence[m.sentence].insert(&m.key);
    }
    let unique_avg = mean(&per_sentence.iter().map(|s| s.len() as f64).collect::<Vec<_>>());

    let mut last_seen: HashMap<&str, usize> = HashMap::new();
    let mut same_gaps = Vec::new();
    for m in &ms {
        if let Some(prev) = last_seen.insert(&m.key, m.start) {
            same_gaps.push((m.start - prev) as f64);
        }
    }
    let consecutive: Vec<f64> = ms.windows(2).map(|w| (w[1].start - w[0].start) as f64).collect();

    EntityFeatures {
        max_same_entity_distance: same_gaps.iter().copied().fold(0.0, f64::max),
        unique_entities: unique.len() as f64,
        unique_entities_average: unique_avg,
        avg_same_entity_distance: mean(&same_gaps),
        entity_to_token_ratio: if tokens == 0 { 0.0 } else { ms.len() as f64 / tokens as f64 },
        unique_to_total_entities: unique.len() as f64 / ms.len() as f64,
        consecutive_entity_distance: mean(&consecutive),
    }
}
