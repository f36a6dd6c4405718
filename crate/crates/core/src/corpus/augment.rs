use rayon::prelude::*;

use super::{Provenance, ProviderError, SentencePair, Translator};

/// A pair whose translation failed; it is reported rather than dropped silently.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentFailure {
    pub pair_id: String,
    pub error: ProviderError,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AugmentOutcome {
    /// Input order is preserved; failed pairs are absent.
    pub pairs: Vec<SentencePair>,
    pub failures: Vec<AugmentFailure>,
}

/// Turns monolingual pairs into cross-lingual ones.
///
/// For every pair flagged `monolingual_origin`, the source and all references
/// are translated into the other language. The source stays in its original
/// language; the translated references become the targets and the translated
/// source is kept in [`Provenance`] together with the original references.
/// Pairs that are already cross-lingual pass through untouched.
pub fn augment_with_translation(
    pairs: &[SentencePair],
    translator: &dyn Translator,
    parallelism: usize,
) -> AugmentOutcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<Result<SentencePair, AugmentFailure>> =
        pool.install(|| pairs.par_iter().map(|p| augment_one(p, translator)).collect());

    let mut out = AugmentOutcome::default();
    for r in results {
        match r {
            Ok(p) => out.pairs.push(p),
            Err(f) => {
                log::warn!("translation failed for pair {}: {}", f.pair_id, f.error);
                out.failures.push(f);
            }
        }
    }
    out
}

fn augment_one(pair: &SentencePair, translator: &dyn Translator) -> Result<SentencePair, AugmentFailure> {
    if !pair.monolingual_origin {
        return Ok(pair.clone());
    }
    let from = pair.source_lang;
    let to = from.other();
    let texts: Vec<String> = std::iter::once(pair.source.clone())
        .chain(pair.references.iter().cloned())
        .collect();
    let fail = |error: ProviderError| AugmentFailure {
        pair_id: pair.id.clone(),
        error,
    };
    let mut translated = translator.translate(&texts, from, to).map_err(fail)?;
    if translated.len() != texts.len() {
        return Err(fail(ProviderError::new(format!(
            "translator returned {} texts for {} inputs",
            translated.len(),
            texts.len()
        ))));
    }
    if translated.iter().any(|t| t.trim().is_empty()) {
        return Err(fail(ProviderError::new("translator returned an empty text")));
    }
    let references = translated.split_off(1);
    let translated_source = translated.pop().expect("one source");
    Ok(SentencePair {
        references,
        target_lang: to,
        monolingual_origin: false,
        provenance: Some(Provenance {
            original_lang: from,
            original_references: pair.references.clone(),
            translated_source,
            translator: translator.name().to_string(),
        }),
        ..pair.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::providers::MockTranslator;
    use crate::corpus::sample_pair;
    use crate::Lang;

    fn monolingual(id: &str) -> SentencePair {
        let mut p = sample_pair(id);
        p.target_lang = Lang::En;
        p.references = vec!["Short one.".into(), "Another short.".into()];
        p.monolingual_origin = true;
        p
    }

    struct Failing;
    impl Translator for Failing {
        fn name(&self) -> &str {
            "failing"
        }
        fn translate(&self, _: &[String], _: Lang, _: Lang) -> Result<Vec<String>, ProviderError> {
            Err(ProviderError { message: "503".into(), attempts: 4 })
        }
    }

    #[test]
    fn empty_input() {
        let out = augment_with_translation(&[], &MockTranslator::Identity, 2);
        assert!(out.pairs.is_empty() && out.failures.is_empty());
    }

    #[test]
    fn identity_translator_updates_languages() {
        let p = monolingual("a");
        let out = augment_with_translation(std::slice::from_ref(&p), &MockTranslator::Identity, 1);
        let q = &out.pairs[0];
        assert_eq!(q.references, p.references);
        assert_eq!(q.source, p.source);
        assert_eq!((q.source_lang, q.target_lang), (Lang::En, Lang::Fr));
        assert!(!q.monolingual_origin);
        assert!(q.validate().is_ok());
        let prov = q.provenance.as_ref().unwrap();
        assert_eq!(prov.translated_source, p.source);
        assert_eq!(prov.original_references, p.references);
        assert_eq!(prov.original_lang, Lang::En);
    }

    #[test]
    fn uppercase_translator_changes_references() {
        let out = augment_with_translation(&[monolingual("a")], &MockTranslator::Uppercase, 1);
        assert_eq!(out.pairs[0].references, vec!["SHORT ONE.", "ANOTHER SHORT."]);
        assert_eq!(out.pairs[0].source, "The source sentence a.");
    }

    #[test]
    fn cross_lingual_pairs_pass_through() {
        let p = sample_pair("n");
        let out = augment_with_translation(std::slice::from_ref(&p), &Failing, 1);
        assert_eq!(out.pairs, vec![p]);
    }

    #[test]
    fn failures_are_reported_in_order() {
        let pairs = vec![sample_pair("keep"), monolingual("bad")];
        let out = augment_with_translation(&pairs, &Failing, 2);
        assert_eq!(out.pairs.len(), 1);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].pair_id, "bad");
        assert_eq!(out.failures[0].error.attempts, 4);
    }
}
