use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::conllu::{AnnotatedDocument, AnnotatedToken, Sentence};
use super::entities::entity_features;
use super::hyphenation::Hyphenator;
use super::readability::{kincaid_grade, reading_ease, ReadabilityCounts};
use super::FeatureError;
use crate::Lang;

macro_rules! feature_vector {
    ($($(#[$doc:meta])* $name:ident),+ $(,)?) => {
        /// One value per linguistic feature.
        #[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
        pub struct FeatureVector {
            $($(#[$doc])* pub $name: f64,)+
        }

        impl FeatureVector {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($name)),+];

            pub fn values(&self) -> Vec<f64> {
                vec![$(self.$name),+]
            }

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $(stringify!($name) => Some(self.$name),)+
                    _ => None,
                }
            }
        }
    };
}

feature_vector! {
    lexical_richness,
    infrequent_words_ratio,
    long_words_ratio,
    content_words_ratio,
    avg_word_length,
    words_before_main_verb,
    noun_phrases_ratio,
    /// Fraction of sentences with a relative clause.
    relative_clauses_ratio,
    /// Fraction of sentences with an apposition.
    appositions_ratio,
    conditional_clauses_ratio,
    conjunctions_ratio,
    passive_voice_ratio,
    /// Mean over sentences.
    syntactic_tree_depth,
    sentences_number,
    words_per_sentence,
    short_sentences_ratio,
    flesch_reading_ease,
    flesch_kincaid_grade,
    /// Syllables per word; at least 1 whenever the document has words.
    syllables_ratio,
    max_same_entity_distance,
    unique_entities,
    unique_entities_average,
    avg_same_entity_distance,
    entity_to_token_ratio,
    unique_to_total_entities,
    consecutive_entity_distance,
    modifiers_ratio,
    negations_ratio,
    /// Per sentence.
    past_perfect_verbs,
    /// Per sentence.
    past_tense_verbs,
    punctuation_ratio,
    third_person_pronouns_ratio,
}

impl FeatureVector {
    /// Names of the features bounded by `[0, 1]`.
    pub fn unit_interval_names() -> impl Iterator<Item = &'static str> {
        Self::NAMES
            .iter()
            .copied()
            .filter(|n| n.ends_with("_ratio") && *n != "syllables_ratio")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub long_word_min_letters: usize,
    pub short_sentence_max_words: usize,
    /// Words ranked beyond this are infrequent.
    pub frequent_top_k: u32,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            long_word_min_letters: 7,
            short_sentence_max_words: 10,
            frequent_top_k: 5000,
        }
    }
}

/// Word ranks read from `word<TAB>rank` lines; keys are lowercased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyList {
    ranks: HashMap<String, u32>,
}

impl FrequencyList {
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut ranks = HashMap::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || FeatureError::MalformedResource(format!("frequency list line {}: `{line}`", i + 1));
            let (word, rank) = line.split_once('\t').ok_or_else(bad)?;
            let rank: u32 = rank.trim().parse().map_err(|_| bad())?;
            ranks.entry(word.trim().to_lowercase()).or_insert(rank);
        }
        Ok(Self { ranks })
    }

    pub fn load(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FeatureError::MissingResource(format!("frequency list {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn rank(&self, word: &str) -> Option<u32> {
        self.ranks.get(&word.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LanguageResources {
    pub hyphenator: Hyphenator,
    pub frequency: FrequencyList,
}

#[derive(Debug, Clone, Default)]
pub struct FeatureResources {
    by_lang: HashMap<Lang, LanguageResources>,
}

impl FeatureResources {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, lang: Lang, resources: LanguageResources) -> Self {
        self.by_lang.insert(lang, resources);
        self
    }

    pub fn get(&self, lang: Lang) -> Result<&LanguageResources, FeatureError> {
        self.by_lang
            .get(&lang)
            .ok_or_else(|| FeatureError::MissingResource(format!("no resources loaded for language `{lang}`")))
    }
}

/// Number of nodes on the longest root-to-leaf path.
pub fn tree_depth(sentence: &Sentence) -> usize {
    let n = sentence.tokens.len();
    let mut depth = vec![0usize; n + 1];
    fn depth_of(i: usize, s: &Sentence, memo: &mut [usize]) -> usize {
        if i == 0 {
            return 0;
        }
        if memo[i] == 0 {
            memo[i] = 1 + depth_of(s.tokens[i - 1].head, s, memo);
        }
        memo[i]
    }
    (1..=n).map(|i| depth_of(i, sentence, &mut depth)).max().unwrap_or(0)
}

const CONTENT_UPOS: [&str; 5] = ["NOUN", "PROPN", "VERB", "ADJ", "ADV"];
const NEGATIVE_LEMMAS: [&str; 6] = ["not", "n't", "ne", "pas", "plus", "jamais"];

fn letters(t: &AnnotatedToken) -> usize {
    t.form.chars().filter(|c| c.is_alphabetic()).count()
}

fn has_relative_clause(s: &Sentence) -> bool {
    s.tokens.iter().any(|t| {
        t.deprel == "acl:relcl"
            || (t.deprel == "acl" && s.children(t.index).any(|c| c.feat("PronType") == Some("Rel")))
    })
}

fn is_past_perfect_aux(t: &AnnotatedToken, s: &Sentence, lang: Lang) -> bool {
    if t.upos != "AUX" || t.head == 0 {
        return false;
    }
    let head = &s.tokens[t.head - 1];
    let participle = head.feat("VerbForm") == Some("Part") && head.feat("Tense") == Some("Past");
    participle
        && match lang {
            Lang::En => t.lemma.to_lowercase() == "have" && t.feat("Tense") == Some("Past"),
            Lang::Fr => t.feat("Tense") == Some("Imp"),
        }
}

fn is_negation(t: &AnnotatedToken) -> bool {
    t.feat("Polarity") == Some("Neg")
        || (t.base_deprel() == "advmod" && NEGATIVE_LEMMAS.contains(&t.lemma.to_lowercase().as_str()))
}

/// Computes every feature of one annotated document.
pub fn extract_features(
    doc: &AnnotatedDocument,
    resources: &FeatureResources,
    config: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    let res = resources.get(doc.lang)?;
    let counts = ReadabilityCounts::of(doc, &res.hyphenator)?;
    let sentences = doc.sentences.len() as f64;
    let tokens: Vec<&AnnotatedToken> = doc.tokens().collect();
    let words: Vec<&AnnotatedToken> = tokens.iter().copied().filter(|t| t.is_word()).collect();
    let n_words = words.len();

    let per_word = |n: usize| if n_words == 0 { 0.0 } else { n as f64 / n_words as f64 };
    let per_sentence = |n: usize| n as f64 / sentences;
    let count_words = |pred: &dyn Fn(&AnnotatedToken) -> bool| words.iter().filter(|t| pred(t)).count();
    let count_sentences = |pred: &dyn Fn(&Sentence) -> bool| doc.sentences.iter().filter(|s| pred(s)).count();

    let distinct: HashSet<String> = words.iter().map(|t| t.form.to_lowercase()).collect();
    let total_letters: usize = words.iter().map(|t| letters(t)).sum();

    let mut noun_phrases = 0;
    let mut past_perfect = 0;
    let mut words_before_verb = 0;
    for s in &doc.sentences {
        noun_phrases += s
            .words()
            .filter(|t| matches!(t.upos.as_str(), "NOUN" | "PROPN") && s.children(t.index).next().is_some())
            .count();
        past_perfect += s.tokens.iter().filter(|t| is_past_perfect_aux(t, s, doc.lang)).count();
        let root = s.root();
        if matches!(root.upos.as_str(), "VERB" | "AUX") {
            words_before_verb += root.index - 1;
        }
    }

    let entities = entity_features(doc);
    let (asl, asw) = (counts.asl(), counts.asw());
    let depth_sum: usize = doc.sentences.iter().map(tree_depth).sum();

    Ok(FeatureVector {
        lexical_richness: per_word(distinct.len()),
        infrequent_words_ratio: per_word(count_words(&|t| {
            res.frequency.rank(&t.form).is_none_or(|r| r > config.frequent_top_k)
        })),
        long_words_ratio: per_word(count_words(&|t| letters(t) >= config.long_word_min_letters)),
        content_words_ratio: per_word(count_words(&|t| CONTENT_UPOS.contains(&t.upos.as_str()))),
        avg_word_length: per_word(total_letters),
        words_before_main_verb: per_sentence(words_before_verb),
        noun_phrases_ratio: per_word(noun_phrases),
        relative_clauses_ratio: per_sentence(count_sentences(&has_relative_clause)),
        appositions_ratio: per_sentence(count_sentences(&|s| s.tokens.iter().any(|t| t.base_deprel() == "appos"))),
        conditional_clauses_ratio: per_sentence(count_sentences(&|s| {
            s.tokens
                .iter()
                .any(|t| t.base_deprel() == "mark" && matches!(t.lemma.to_lowercase().as_str(), "if" | "si"))
        })),
        conjunctions_ratio: per_word(count_words(&|t| matches!(t.upos.as_str(), "CCONJ" | "SCONJ"))),
        passive_voice_ratio: per_sentence(count_sentences(&|s| {
            s.tokens
                .iter()
                .any(|t| matches!(t.deprel.as_str(), "nsubj:pass" | "aux:pass" | "csubj:pass"))
        })),
        syntactic_tree_depth: per_sentence(depth_sum),
        sentences_number: sentences,
        words_per_sentence: asl,
        short_sentences_ratio: per_sentence(count_sentences(&|s| s.words().count() <= config.short_sentence_max_words)),
        flesch_reading_ease: reading_ease(doc.lang, asl, asw),
        flesch_kincaid_grade: kincaid_grade(asl, asw),
        syllables_ratio: asw,
        max_same_entity_distance: entities.max_same_entity_distance,
        unique_entities: entities.unique_entities,
        unique_entities_average: entities.unique_entities_average,
        avg_same_entity_distance: entities.avg_same_entity_distance,
        entity_to_token_ratio: entities.entity_to_token_ratio,
        unique_to_total_entities: entities.unique_to_total_entities,
        consecutive_entity_distance: entities.consecutive_entity_distance,
        modifiers_ratio: per_word(count_words(&|t| matches!(t.base_deprel(), "amod" | "advmod" | "nmod"))),
        negations_ratio: per_word(count_words(&is_negation)),
        past_perfect_verbs: per_sentence(past_perfect),
        past_tense_verbs: per_sentence(tokens.iter().filter(|t| t.feat("Tense") == Some("Past")).count()),
        punctuation_ratio: tokens.iter().filter(|t| t.upos == "PUNCT").count() as f64 / tokens.len() as f64,
        third_person_pronouns_ratio: per_word(count_words(&|t| t.upos == "PRON" && t.feat("Person") == Some("3"))),
    })
}

/// One row of the feature report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub doc_id: String,
    pub corpus: String,
    pub model: String,
    pub strategy: String,
    pub lang: Lang,
    pub features: FeatureVector,
}

impl FeatureRow {
    pub fn new(doc: &AnnotatedDocument, features: FeatureVector) -> Self {
        let meta = |k: &str| doc.meta(k).unwrap_or("").to_string();
        Self {
            doc_id: doc.doc_id.clone(),
            corpus: meta("corpus"),
            model: meta("model"),
            strategy: meta("strategy"),
            lang: doc.lang,
            features,
        }
    }
}

const ROW_KEYS: [&str; 5] = ["doc_id", "corpus", "model", "strategy", "lang"];

pub fn write_features_csv(path: &Path, rows: &[FeatureRow]) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ROW_KEYS.iter().chain(FeatureVector::NAMES))?;
    for r in rows {
        let mut record = vec![
            r.doc_id.clone(),
            r.corpus.clone(),
            r.model.clone(),
            r.strategy.clone(),
            r.lang.code().to_string(),
        ];
        record.extend(r.features.values().iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features_csv(path: &Path) -> Result<Vec<FeatureRow>, FeatureError> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let expected: Vec<&str> = ROW_KEYS.iter().chain(FeatureVector::NAMES).copied().collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(FeatureError::MalformedResource(format!("{}: unexpected header", path.display())));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| FeatureError::MalformedResource(format!("{} row {}: {what}", path.display(), i + 2));
        let lang: Lang = rec[4].parse().map_err(|_| bad("bad language"))?;
        let mut values = Vec::with_capacity(FeatureVector::NAMES.len());
        for cell in rec.iter().skip(ROW_KEYS.len()) {
            values.push(cell.parse::<f64>().map_err(|_| bad("bad number"))?);
        }
        let map: serde_json::Map<String, serde_json::Value> = FeatureVector::NAMES
            .iter()
            .zip(values)
            .map(|(n, v)| (n.to_string(), serde_json::json!(v)))
            .collect();
        let features: FeatureVector =
            serde_json::from_value(serde_json::Value::Object(map)).map_err(|_| bad("missing features"))?;
        rows.push(FeatureRow {
            doc_id: rec[0].to_string(),
            corpus: rec[1].to_string(),
            model: rec[2].to_string(),
            strategy: rec[3].to_string(),
            lang,
            features,
        });
    }
    Ok(rows)
}
