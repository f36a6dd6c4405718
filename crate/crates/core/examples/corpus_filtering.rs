//! Translation augmentation and similarity filtering on a small in-memory
//! corpus, using the offline mock providers.
//!
//! The bag-of-words mock embedder only sees shared words, so cross-lingual
//! scores run low; the default threshold here is lower than the library's.
//!
//! cargo run --example corpus_filtering -- [threshold]

use clts_eval::cli::demo::english_french_pairs;
use clts_eval::corpus::providers::{MockSentenceEmbedder, MockTranslator};
use clts_eval::corpus::{augment_with_translation, filter_by_similarity, FilterOptions, SentencePair};
use clts_eval::Lang;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let threshold: f64 = std::env::args().nth(1).map(|t| t.parse()).transpose()?.unwrap_or(0.3);

    let mut pairs = english_french_pairs("demo", 4);
    // a monolingual pair: augmentation translates its references to English
    let mut mono: SentencePair = pairs[0].clone();
    mono.id = "demo-mono".into();
    mono.source = "Le vieux pont a été réparé avec beaucoup de soin.".into();
    mono.references = vec!["Le vieux pont a été réparé.".into()];
    mono.source_lang = Lang::Fr;
    mono.target_lang = Lang::Fr;
    mono.monolingual_origin = true;
    mono.provenance = None;
    pairs.push(mono);
    // a pair whose reference has nothing to do with its source
    pairs[1].references = vec!["Rien à voir.".into()];

    let augmented = augment_with_translation(&pairs, &MockTranslator::Uppercase, 2);
    println!("augmented {} pairs, {} failures", augmented.pairs.len(), augmented.failures.len());
    for p in augmented.pairs.iter().filter(|p| p.provenance.is_some()) {
        println!("  {} {}->{}: {:?}", p.id, p.source_lang, p.target_lang, p.references);
    }

    let opts = FilterOptions {
        threshold,
        ..FilterOptions::default()
    };
    let outcome = filter_by_similarity(&augmented.pairs, &MockSentenceEmbedder::BagOfWords, &opts)?;
    println!("\nthreshold {threshold}");
    for d in &outcome.decisions {
        println!("  {:<10} {:.3} {}", d.pair_id, d.score, if d.kept { "kept" } else { "removed" });
    }
    Ok(())
}
