use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{CorpusError, SentencePair, Split};
use crate::Lang;

/// On-disk corpus layouts.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusFormat {
    /// One JSON object per line, carrying every [`SentencePair`] field.
    Jsonl,
    /// `id<TAB>source<TAB>reference`, one reference per row. Rows sharing an
    /// id are merged into one multi-reference pair. Metadata absent from the
    /// file is supplied here.
    Tsv {
        source_lang: Lang,
        target_lang: Lang,
        corpus_id: String,
        split: Split,
    },
}

/// A rejected input row (1-based line number).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub row: usize,
    pub reason: String,
}

/// Loads a corpus, failing on the first malformed row.
pub fn load_corpus(path: &Path, format: &CorpusFormat) -> Result<Vec<SentencePair>, CorpusError> {
    let (pairs, rejected) = load_inner(path, format, true)?;
    debug_assert!(rejected.is_empty());
    Ok(pairs)
}

/// Loads a corpus, skipping malformed rows and reporting them.
pub fn load_corpus_lenient(
    path: &Path,
    format: &CorpusFormat,
) -> Result<(Vec<SentencePair>, Vec<RowError>), CorpusError> {
    load_inner(path, format, false)
}

fn load_inner(
    path: &Path,
    format: &CorpusFormat,
    strict: bool,
) -> Result<(Vec<SentencePair>, Vec<RowError>), CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rejected = Vec::new();
    let mut reject = |row: usize, reason: String| -> Result<(), CorpusError> {
        if strict {
            Err(CorpusError::Format { row, reason })
        } else {
            log::warn!("{}: skipping row {row}: {reason}", path.display());
            rejected.push(RowError { row, reason });
            Ok(())
        }
    };

    let pairs = match format {
        CorpusFormat::Jsonl => {
            let mut pairs = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                let row = idx + 1;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<SentencePair>(line) {
                    Ok(pair) => match pair.validate() {
                        Ok(()) => pairs.push(pair),
                        Err(reason) => reject(row, reason)?,
                    },
                    Err(e) => reject(row, e.to_string())?,
                }
            }
            pairs
        }
        CorpusFormat::Tsv {
            source_lang,
            target_lang,
            corpus_id,
            split,
        } => {
            let mut order: Vec<String> = Vec::new();
            let mut merged: HashMap<String, (usize, SentencePair)> = HashMap::new();
            for (idx, line) in text.lines().enumerate() {
                let row = idx + 1;
                if line.trim().is_empty() {
                    continue;
                }
                let cols: Vec<&str> = line.split('\t').collect();
                if row == 1 && cols.first().map(|c| c.trim()) == Some("id") {
                    continue;
                }
                if cols.len() != 3 {
                    reject(row, format!("expected 3 tab-separated columns, found {}", cols.len()))?;
                    continue;
                }
                let (id, source, reference) = (cols[0].trim(), cols[1], cols[2]);
                if let Some((_, existing)) = merged.get_mut(id) {
                    if existing.source != source {
                        reject(row, format!("source differs from earlier rows for id `{id}`"))?;
                        continue;
                    }
                    if reference.trim().is_empty() {
                        reject(row, "empty reference".into())?;
                        continue;
                    }
                    existing.references.push(reference.to_string());
                    continue;
                }
                let pair = SentencePair {
                    id: id.to_string(),
                    source: source.to_string(),
                    references: vec![reference.to_string()],
                    source_lang: *source_lang,
                    target_lang: *target_lang,
                    corpus_id: corpus_id.clone(),
                    split: *split,
                    monolingual_origin: source_lang == target_lang,
                    provenance: None,
                };
                match pair.validate() {
                    Ok(()) => {
                        order.push(id.to_string());
                        merged.insert(id.to_string(), (row, pair));
                    }
                    Err(reason) => reject(row, reason)?,
                }
            }
            order
                .into_iter()
                .map(|id| merged.remove(&id).expect("id recorded").1)
                .collect()
        }
    };

    if pairs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok((pairs, rejected))
}

/// Writes pairs as JSONL, the format read back by [`CorpusFormat::Jsonl`].
pub fn save_corpus(path: &Path, pairs: &[SentencePair]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    for pair in pairs {
        serde_json::to_writer(&mut out, pair)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Provenance;
    use proptest::prelude::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    const ROW: &str = r#"{"id":"1","source":"A complex sentence.","references":["Une phrase."],"source_lang":"en","target_lang":"fr","corpus_id":"asset","split":"test"}"#;

    #[test]
    fn one_row_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "c.jsonl", &format!("{ROW}\n"));
        let pairs = load_corpus(&p, &CorpusFormat::Jsonl).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].references, vec!["Une phrase."]);
    }

    #[test]
    fn empty_references_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let row = ROW.replace(r#"["Une phrase."]"#, "[]");
        let p = write(&dir, "c.jsonl", &row);
        match load_corpus(&p, &CorpusFormat::Jsonl) {
            Err(CorpusError::Format { row: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strict_mode_names_malformed_row() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{ROW}\n{{\"id\": \"2\", \"source\": \n{}\n", ROW.replace("\"1\"", "\"3\""));
        let p = write(&dir, "c.jsonl", &body);
        match load_corpus(&p, &CorpusFormat::Jsonl) {
            Err(CorpusError::Format { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
        let (pairs, rejected) = load_corpus_lenient(&p, &CorpusFormat::Jsonl).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(rejected.len(), 1);
        assert_eq!(rejected[0].row, 2);
    }

    #[test]
    fn empty_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "e.jsonl", "\n\n");
        assert!(matches!(load_corpus(&p, &CorpusFormat::Jsonl), Err(CorpusError::EmptyCorpus)));
        let missing = dir.path().join("nope.jsonl");
        assert!(matches!(load_corpus(&missing, &CorpusFormat::Jsonl), Err(CorpusError::Io { .. })));
    }

    #[test]
    fn tsv_merges_references() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.tsv",
            "id\tsource\treference\na\tLong sentence.\tShort.\nb\tOther one.\tOther.\na\tLong sentence.\tBrief.\n",
        );
        let fmt = CorpusFormat::Tsv {
            source_lang: Lang::En,
            target_lang: Lang::En,
            corpus_id: "asset".into(),
            split: Split::Test,
        };
        let pairs = load_corpus(&p, &fmt).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].id, "a");
        assert_eq!(pairs[0].references, vec!["Short.", "Brief."]);
        assert!(pairs[0].monolingual_origin);
    }

    #[test]
    fn tsv_bad_column_count() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "c.tsv", "a\tx\ty\nb\tonly two\n");
        let fmt = CorpusFormat::Tsv {
            source_lang: Lang::Fr,
            target_lang: Lang::En,
            corpus_id: "clear".into(),
            split: Split::Test,
        };
        assert!(matches!(load_corpus(&p, &fmt), Err(CorpusError::Format { row: 2, .. })));
    }

    fn text() -> impl Strategy<Value = String> {
        "[a-zA-Zéà' .,\"\\\\]{0,12}[a-z]".prop_map(|s| s)
    }

    fn pair() -> impl Strategy<Value = SentencePair> {
        (
            "[a-z0-9]{1,6}",
            text(),
            prop::collection::vec(text(), 1..4),
            any::<bool>(),
            prop::option::of((text(), prop::collection::vec(text(), 0..3))),
        )
            .prop_map(|(id, source, references, en_to_fr, prov)| {
                let (source_lang, target_lang) = if en_to_fr { (Lang::En, Lang::Fr) } else { (Lang::Fr, Lang::En) };
                SentencePair {
                    id,
                    source,
                    references,
                    source_lang,
                    target_lang,
                    corpus_id: "c".into(),
                    split: Split::Test,
                    monolingual_origin: false,
                    provenance: prov.map(|(translated_source, original_references)| Provenance {
                        original_lang: source_lang,
                        original_references,
                        translated_source,
                        translator: "stub".into(),
                    }),
                }
            })
    }

    proptest! {
        #[test]
        fn save_load_round_trip(pairs in prop::collection::vec(pair(), 1..6)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("rt.jsonl");
            save_corpus(&p, &pairs).unwrap();
            let back = load_corpus(&p, &CorpusFormat::Jsonl).unwrap();
            prop_assert_eq!(back, pairs);
        }
    }
}
