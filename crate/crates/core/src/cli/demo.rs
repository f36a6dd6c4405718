//! A self-contained demo project: two small synthetic corpora, frequency
//! lists, synthetic ratings and a config wired to the offline mock providers.
//! Used by the examples and the end-to-end tests.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::corpus::{Provenance, SentencePair, Split};
use crate::Lang;

const EN_SUBJECTS: [&str; 5] = ["The committee", "A young doctor", "The old bridge", "Our neighbour", "The museum"];
const EN_VERBS: [&str; 5] = ["approved", "described", "replaced", "repaired", "visited"];
const EN_OBJECTS: [&str; 5] = ["the new plan", "a small village", "the northern road", "an ancient church", "the busy market"];
const EN_CLAUSES: [&str; 4] = [
    "after a long and difficult debate",
    "despite the heavy rain that fell all night",
    "before the beginning of the winter season",
    "with considerable care and attention",
];

const FR_SUBJECTS: [&str; 5] = ["Le comité", "Un jeune médecin", "Le vieux pont", "Notre voisin", "Le musée"];
const FR_VERBS: [&str; 5] = ["a approuvé", "a décrit", "a remplacé", "a réparé", "a visité"];
const FR_OBJECTS: [&str; 5] = ["le nouveau plan", "un petit village", "la route du nord", "une église ancienne", "le marché animé"];
const FR_CLAUSES: [&str; 4] = [
    "après un long et difficile débat",
    "malgré la forte pluie tombée toute la nuit",
    "avant le début de la saison hivernale",
    "avec beaucoup de soin et d'attention",
];

struct Parts {
    subjects: [&'static str; 5],
    verbs: [&'static str; 5],
    objects: [&'static str; 5],
    clauses: [&'static str; 4],
}

const EN: Parts = Parts {
    subjects: EN_SUBJECTS,
    verbs: EN_VERBS,
    objects: EN_OBJECTS,
    clauses: EN_CLAUSES,
};
const FR: Parts = Parts {
    subjects: FR_SUBJECTS,
    verbs: FR_VERBS,
    objects: FR_OBJECTS,
    clauses: FR_CLAUSES,
};

fn parts(lang: Lang) -> &'static Parts {
    match lang {
        Lang::En => &EN,
        Lang::Fr => &FR,
    }
}

/// (complex, simple) sentence number `i` in `lang`.
fn sentence(lang: Lang, i: usize) -> (String, String) {
    let p = parts(lang);
    let (s, v, o, c) = (p.subjects[i % 5], p.verbs[(i / 5) % 5], p.objects[(i + i / 5) % 5], p.clauses[i % 4]);
    (format!("{s} {v} {o} {c}."), format!("{s} {v} {o}."))
}

/// Cross-lingual English-to-French pairs with a natively translated source.
pub fn english_french_pairs(corpus_id: &str, n: usize) -> Vec<SentencePair> {
    (0..n)
        .map(|i| {
            let (complex_en, _) = sentence(Lang::En, i);
            let (complex_fr, simple_fr) = sentence(Lang::Fr, i);
            SentencePair {
                id: format!("{corpus_id}-{i:03}"),
                source: complex_en,
                references: vec![simple_fr],
                source_lang: Lang::En,
                target_lang: Lang::Fr,
                corpus_id: corpus_id.to_string(),
                split: Split::Test,
                monolingual_origin: false,
                provenance: Some(Provenance {
                    original_lang: Lang::En,
                    original_references: Vec::new(),
                    translated_source: complex_fr,
                    translator: "native".into(),
                }),
            }
        })
        .collect()
}

fn frequency_list(lang: Lang) -> String {
    let p = parts(lang);
    let mut words: Vec<String> = Vec::new();
    for text in p.subjects.iter().chain(&p.verbs).chain(&p.objects).chain(&p.clauses) {
        for w in text.split_whitespace() {
            let w = w.to_lowercase();
            if !words.contains(&w) {
                words.push(w);
            }
        }
    }
    words.iter().enumerate().map(|(i, w)| format!("{w}\t{}\n", i + 1)).collect()
}

/// Ratings by two or three annotators per item, deterministic in `n`.
fn ratings(corpora: &[&str], n: usize) -> String {
    let mut out = String::from("item_id,annotator_id,comparison_base,simplicity,added,removed,corpus,strategy,model\n");
    for (ci, corpus) in corpora.iter().enumerate() {
        for i in 0..n {
            let annotators = if i % 7 == 3 { 3 } else { 2 };
            for a in 0..annotators {
                let x = i * 31 + a * 17 + ci * 7;
                let simplicity = (x % 5) as i64 - 2;
                let added = ((i * 3 + a) % 4) as i64;
                let removed = ((i + 2 * a + ci) % 6) as i64;
                let _ = writeln!(
                    out,
                    "{corpus}-{i:03},ann{a},source,{simplicity},{added},{removed},{corpus},direct,mock-payload"
                );
            }
        }
    }
    out
}

/// Config text for the demo project; paths are relative to its directory.
pub fn demo_config(n_repeats: usize) -> String {
    format!(
        r#"seed = 7

[[corpora]]
id = "wiki-en-fr"
path = "wiki-en-fr.jsonl"
format = "jsonl"

[[corpora]]
id = "clear-fr"
path = "clear-fr.tsv"
format = "tsv"
source_lang = "fr"
target_lang = "fr"
augment = true

[[backends]]
name = "mock-payload"
base_url = "mock:payload"

[preprocess]
embedder = "mock:constant"
translator = "mock:identity"

[generation]
backoff_base_ms = 0

[features]
annotator = "mock:flat"

[features.resources.en]
frequency_list = "freq-en.tsv"

[features.resources.fr]
frequency_list = "freq-fr.tsv"

[human]
ratings = "ratings.csv"
n_repeats = {n_repeats}
"#
    )
}

/// Writes the demo project into `dir` with `n` items per corpus and returns
/// the config path.
pub fn write_demo_project(dir: &Path, n: usize, n_repeats: usize) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut jsonl = String::new();
    for p in english_french_pairs("wiki-en-fr", n) {
        jsonl.push_str(&serde_json::to_string(&p).map_err(io::Error::from)?);
        jsonl.push('\n');
    }
    fs::write(dir.join("wiki-en-fr.jsonl"), jsonl)?;

    let mut tsv = String::from("id\tsource\treference\n");
    for i in 0..n {
        let (complex, simple) = sentence(Lang::Fr, i + 3);
        let _ = writeln!(tsv, "clear-fr-{i:03}\t{complex}\t{simple}");
    }
    fs::write(dir.join("clear-fr.tsv"), tsv)?;
    fs::write(dir.join("freq-en.tsv"), frequency_list(Lang::En))?;
    fs::write(dir.join("freq-fr.tsv"), frequency_list(Lang::Fr))?;
    fs::write(dir.join("ratings.csv"), ratings(&["wiki-en-fr", "clear-fr"], n))?;
    let config = dir.join("run.toml");
    fs::write(&config, demo_config(n_repeats))?;
    Ok(config)
}
