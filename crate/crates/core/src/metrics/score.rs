use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bleu::{bleu, sentence_bleu};
use super::embeddings::TokenEmbedder;
use super::sari::sentence_sari;
use super::semantic::{semantic_similarity, EmbeddedText, SemanticScore};
use super::tokenize::tokenize_for_metrics;
use super::MetricError;
use crate::corpus::SentencePair;
use crate::prompting::{Strategy, SystemOutput};
use crate::Lang;

const EMBED_BATCH: usize = 32;

/// Why a metric value is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullReason {
    /// SARI needs the source in the output language and the pair has none.
    NoSourceInTargetLanguage,
    NoEmbedder,
    EmbeddingFailed,
    /// Hypothesis or every reference produced no tokens.
    EmptyTokens,
    /// Provider returned mismatched or zero vectors.
    InvalidEmbedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub corpus_id: String,
    pub pair_id: String,
    pub strategy: Strategy,
    pub model_id: String,
    /// Smoothed sentence BLEU.
    pub bleu: Option<f64>,
    pub sari: Option<f64>,
    /// F1 against the best-matching reference.
    pub semantic: Option<f64>,
    pub semantic_precision: Option<f64>,
    pub semantic_recall: Option<f64>,
    /// Reason per null metric, keyed by field name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub null_reasons: BTreeMap<String, NullReason>,
}

impl MetricRecord {
    pub fn is_well_formed(&self) -> bool {
        [("bleu", self.bleu), ("sari", self.sari), ("semantic", self.semantic)]
            .iter()
            .all(|(name, v)| v.is_some() != self.null_reasons.contains_key(*name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAggregate {
    pub corpus: String,
    pub model: String,
    pub strategy: Strategy,
    pub n_items: usize,
    /// Corpus-level BLEU over all items of the group.
    pub bleu: Option<f64>,
    /// Mean over items with a value.
    pub sari: Option<f64>,
    pub semantic_f1: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub records: Vec<MetricRecord>,
    /// Sorted by (corpus, model, strategy).
    pub aggregates: Vec<MetricAggregate>,
}

struct Prepared<'a> {
    output: &'a SystemOutput,
    pair: &'a SentencePair,
    hyp: Vec<String>,
    refs: Vec<Vec<String>>,
}

fn best_semantic(hyp: &EmbeddedText, refs: &[EmbeddedText]) -> Result<SemanticScore, MetricError> {
    let mut best: Option<SemanticScore> = None;
    let mut last_err = MetricError::EmptySequence;
    for r in refs {
        match semantic_similarity(hyp, r) {
            Ok(s) if best.as_ref().is_none_or(|b| s.f1 > b.f1) => best = Some(s),
            Ok(_) => {}
            Err(e) => last_err = e,
        }
    }
    best.ok_or(last_err)
}

fn semantic_scores(
    items: &[Prepared<'_>],
    embedder: &dyn TokenEmbedder,
) -> Vec<Result<SemanticScore, NullReason>> {
    let mut by_lang: BTreeMap<Lang, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        by_lang.entry(item.pair.target_lang).or_default().push(i);
    }
    let batches: Vec<(Lang, &[usize])> = by_lang
        .iter()
        .flat_map(|(lang, idx)| idx.chunks(EMBED_BATCH).map(move |c| (*lang, c)))
        .collect();

    let scored: Vec<Vec<(usize, Result<SemanticScore, NullReason>)>> = batches
        .par_iter()
        .map(|&(lang, chunk)| {
            if !embedder.supports(lang) {
                return chunk.iter().map(|&i| (i, Err(NullReason::NoEmbedder))).collect();
            }
            let mut texts = Vec::new();
            for &i in chunk {
                texts.push(items[i].output.hypothesis.clone());
                texts.extend(items[i].pair.references.iter().cloned());
            }
            let embedded = match embedder.embed_tokens(&texts, lang) {
                Ok(e) if e.len() == texts.len() => e,
                Ok(e) => {
                    log::warn!("token embedder returned {} results for {} texts", e.len(), texts.len());
                    return chunk.iter().map(|&i| (i, Err(NullReason::EmbeddingFailed))).collect();
                }
                Err(e) => {
                    log::warn!("token embedder failed: {e}");
                    return chunk.iter().map(|&i| (i, Err(NullReason::EmbeddingFailed))).collect();
                }
            };
            let mut offset = 0;
            chunk
                .iter()
                .map(|&i| {
                    let n = items[i].pair.references.len();
                    let hyp = &embedded[offset];
                    let refs = &embedded[offset + 1..offset + 1 + n];
                    offset += 1 + n;
                    let res = best_semantic(hyp, refs).map_err(|e| match e {
                        MetricError::EmptySequence => NullReason::EmptyTokens,
                        _ => NullReason::InvalidEmbedding,
                    });
                    (i, res)
                })
                .collect()
        })
        .collect();

    let mut out: Vec<Option<Result<SemanticScore, NullReason>>> = vec![None; items.len()];
    for (i, r) in scored.into_iter().flatten() {
        out[i] = Some(r);
    }
    out.into_iter().map(|r| r.expect("every item scored")).collect()
}

/// Scores outputs against their pairs. SARI uses the source text in the
/// output language. Without an embedder the semantic score is null.
pub fn score_outputs(
    outputs: &[SystemOutput],
    pairs: &[SentencePair],
    embedder: Option<&dyn TokenEmbedder>,
) -> Result<MetricReport, MetricError> {
    let index: HashMap<(&str, &str), &SentencePair> =
        pairs.iter().map(|p| ((p.corpus_id.as_str(), p.id.as_str()), p)).collect();

    let mut items = Vec::with_capacity(outputs.len());
    for (n, output) in outputs.iter().enumerate() {
        let pair = *index
            .get(&(output.corpus_id.as_str(), output.pair_id.as_str()))
            .ok_or_else(|| MetricError::MissingPair(format!("{}/{}", output.corpus_id, output.pair_id)))?;
        if pair.references.is_empty() {
            return Err(MetricError::EmptyReference { index: n });
        }
        let lang = pair.target_lang;
        items.push(Prepared {
            output,
            pair,
            hyp: tokenize_for_metrics(&output.hypothesis, lang),
            refs: pair.references.iter().map(|r| tokenize_for_metrics(r, lang)).collect(),
        });
    }

    let semantic = match embedder {
        Some(e) => semantic_scores(&items, e),
        None => vec![Err(NullReason::NoEmbedder); items.len()],
    };

    let records: Vec<MetricRecord> = items
        .par_iter()
        .zip(semantic)
        .map(|(item, sem)| {
            let mut null_reasons = BTreeMap::new();
            let bleu = sentence_bleu(&item.hyp, &item.refs).ok();
            let sari = match item.pair.source_in_target_lang() {
                Some(src) => {
                    let src = tokenize_for_metrics(src, item.pair.target_lang);
                    Some(sentence_sari(&src, &item.hyp, &item.refs).sari)
                }
                None => {
                    null_reasons.insert("sari".to_string(), NullReason::NoSourceInTargetLanguage);
                    None
                }
            };
            let sem = sem.map_err(|r| null_reasons.insert("semantic".to_string(), r)).ok();
            MetricRecord {
                corpus_id: item.output.corpus_id.clone(),
                pair_id: item.output.pair_id.clone(),
                strategy: item.output.strategy,
                model_id: item.output.model_id.clone(),
                bleu,
                sari,
                semantic: sem.map(|s| s.f1),
                semantic_precision: sem.map(|s| s.precision),
                semantic_recall: sem.map(|s| s.recall),
                null_reasons,
            }
        })
        .collect();

    let mut groups: BTreeMap<(String, String, Strategy), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups
            .entry((r.corpus_id.clone(), r.model_id.clone(), r.strategy))
            .or_default()
            .push(i);
    }
    let mean = |vals: Vec<f64>| (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
    let mut aggregates = Vec::with_capacity(groups.len());
    for ((corpus, model, strategy), idx) in groups {
        let hyps: Vec<Vec<String>> = idx.iter().map(|&i| items[i].hyp.clone()).collect();
        let refs: Vec<Vec<Vec<String>>> = idx.iter().map(|&i| items[i].refs.clone()).collect();
        aggregates.push(MetricAggregate {
            corpus,
            model,
            strategy,
            n_items: idx.len(),
            bleu: Some(bleu(&hyps, &refs)?),
            sari: mean(idx.iter().filter_map(|&i| records[i].sari).collect()),
            semantic_f1: mean(idx.iter().filter_map(|&i| records[i].semantic).collect()),
        });
    }
    Ok(MetricReport { records, aggregates })
}

/// Writes `corpus, model, strategy, n_items, bleu, sari, semantic_f1`; nulls
/// are empty cells.
pub fn write_aggregates_csv(path: &Path, aggregates: &[MetricAggregate]) -> Result<(), MetricError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["corpus", "model", "strategy", "n_items", "bleu", "sari", "semantic_f1"])?;
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    for a in aggregates {
        w.write_record([
            a.corpus.clone(),
            a.model.clone(),
            a.strategy.name().to_string(),
            a.n_items.to_string(),
            cell(a.bleu),
            cell(a.sari),
            cell(a.semantic_f1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_jsonl(path: &Path, records: &[MetricRecord]) -> Result<(), MetricError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut f, r).map_err(std::io::Error::from)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}
