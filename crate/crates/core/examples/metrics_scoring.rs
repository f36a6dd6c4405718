//! BLEU, SARI and the embedding-based semantic score on a handful of
//! hand-written sentences, then on the outputs of a toy backend.
//!
//! cargo run --example metrics_scoring

use std::collections::HashMap;

use clts_eval::cli::demo::english_french_pairs;
use clts_eval::metrics::{
    bleu, sari, score_outputs, semantic_similarity, sentence_bleu, sentence_sari, tokenize_for_metrics,
    HashTokenEmbedder, TokenEmbedder,
};
use clts_eval::prompting::{
    run_strategy, strip_instruction, BackendError, ChatBackend, ChatRequest, GenerationConfig, Strategy,
};
use clts_eval::Lang;

/// Translates by lookup and simplifies by keeping the first seven words.
struct ToyBackend {
    translations: HashMap<String, String>,
}

impl ChatBackend for ToyBackend {
    fn model_id(&self) -> &str {
        "toy"
    }

    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        let prompt = request.user_prompt;
        let payload = strip_instruction(prompt);
        let mut text = match prompt.contains("translate") {
            true => self.translations.get(payload).cloned().unwrap_or_else(|| payload.to_string()),
            false => payload.to_string(),
        };
        if prompt.contains("simplify") {
            let words: Vec<&str> = text.trim_end_matches('.').split(' ').take(7).collect();
            text = format!("{}.", words.join(" "));
        }
        Ok(text)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tok = |s: &str| tokenize_for_metrics(s, Lang::Fr);
    let source = tok("Le comité a approuvé le nouveau plan après un long et difficile débat.");
    let reference = tok("Le comité a approuvé le nouveau plan.");
    let candidates = [
        "Le comité a approuvé le nouveau plan.",
        "Le comité a accepté le plan.",
        "Le comité a approuvé le nouveau plan après un long et difficile débat.",
        "Il pleut.",
    ];
    println!("{:<72} {:>7} {:>7}", "candidate", "BLEU", "SARI");
    for c in candidates {
        let hyp = tok(c);
        let b = sentence_bleu(&hyp, std::slice::from_ref(&reference))?;
        let s = sentence_sari(&source, &hyp, std::slice::from_ref(&reference));
        println!("{c:<72} {b:>7.2} {:>7.2}", s.sari);
    }

    let hyps: Vec<Vec<String>> = candidates.iter().map(|c| tok(c)).collect();
    let srcs = vec![source.clone(); hyps.len()];
    let refs = vec![vec![reference.clone()]; hyps.len()];
    println!("\ncorpus BLEU {:.2}, corpus SARI {:.2}", bleu(&hyps, &refs)?, sari(&srcs, &hyps, &refs)?);

    let embedder = HashTokenEmbedder::default();
    let texts = vec![candidates[1].to_string(), candidates[0].to_string()];
    let e = embedder.embed_tokens(&texts, Lang::Fr)?;
    let sem = semantic_similarity(&e[0], &e[1])?;
    println!("semantic P {:.3} R {:.3} F1 {:.3}", sem.precision, sem.recall, sem.f1);

    // scoring a run: one output per strategy and item
    let pairs = english_french_pairs("demo", 10);
    let backend = ToyBackend {
        translations: pairs
            .iter()
            .filter_map(|p| Some((p.source.clone(), p.provenance.as_ref()?.translated_source.clone())))
            .collect(),
    };
    let cfg = GenerationConfig::default();
    let mut outputs = Vec::new();
    for s in Strategy::ALL {
        for p in &pairs {
            outputs.push(run_strategy(s, p, &backend, &cfg)?);
        }
    }
    let report = score_outputs(&outputs, &pairs, Some(&embedder))?;
    println!("\n{:<14} {:>7} {:>7} {:>7}", "strategy", "BLEU", "SARI", "F1");
    for a in &report.aggregates {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        println!("{:<14} {:>7} {:>7} {:>7}", a.strategy.label(), f(a.bleu), f(a.sari), f(a.semantic_f1));
    }
    Ok(())
}
