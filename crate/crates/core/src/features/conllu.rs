//! CoNLL-U reading and writing.
//!
//! Document-level metadata is taken from `# key = value` comments other than
//! `sent_id` and `text` (e.g. `# lang = fr`, `# model = ...`). Named-entity
//! labels travel in the MISC column as `NER=B-PER`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::Lang;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedToken {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub morph: BTreeMap<String, String>,
    /// 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
    pub ner: Option<String>,
}

impl AnnotatedToken {
    pub fn feat(&self, key: &str) -> Option<&str> {
        self.morph.get(key).map(String::as_str)
    }

    /// Relation without its subtype (`nsubj:pass` → `nsubj`).
    pub fn base_deprel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }

    /// A word is a token whose form contains at least one letter.
    pub fn is_word(&self) -> bool {
        self.form.chars().any(char::is_alphabetic)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Sentence {
    pub sent_id: Option<String>,
    pub text: Option<String>,
    pub tokens: Vec<AnnotatedToken>,
}

impl Sentence {
    pub fn root(&self) -> &AnnotatedToken {
        self.tokens.iter().find(|t| t.head == 0).expect("validated sentence has a root")
    }

    pub fn words(&self) -> impl Iterator<Item = &AnnotatedToken> {
        self.tokens.iter().filter(|t| t.is_word())
    }

    /// Tokens whose head is `index`.
    pub fn children(&self, index: usize) -> impl Iterator<Item = &AnnotatedToken> {
        self.tokens.iter().filter(move |t| t.head == index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub lang: Lang,
    /// Document-level comments other than `newdoc id` and `lang`.
    pub meta: BTreeMap<String, String>,
    pub sentences: Vec<Sentence>,
}

impl AnnotatedDocument {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &AnnotatedToken> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.iter().all(|s| s.tokens.is_empty())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConlluError {
    #[error("line {line}: {reason}")]
    SyntaxError { line: usize, reason: String },
    #[error("sentence ending at line {line}: token {token} does not reach the root")]
    CycleError { line: usize, token: usize },
    #[error("sentence ending at line {line}: expected exactly one root, found {roots}")]
    MultiRootError { line: usize, roots: usize },
    #[error("reading CoNLL-U: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Default)]
struct Builder {
    docs: Vec<AnnotatedDocument>,
    current: Option<AnnotatedDocument>,
    sentence: Sentence,
    default_lang: Option<Lang>,
}

impl Builder {
    fn doc(&mut self) -> &mut AnnotatedDocument {
        let n = self.docs.len() + 1;
        let lang = self.default_lang.unwrap_or(Lang::En);
        self.current.get_or_insert_with(|| AnnotatedDocument {
            doc_id: format!("doc{n}"),
            lang,
            meta: BTreeMap::new(),
            sentences: Vec::new(),
        })
    }

    fn end_sentence(&mut self, line: usize) -> Result<(), ConlluError> {
        let sentence = std::mem::take(&mut self.sentence);
        if sentence.tokens.is_empty() {
            // Comments without tokens belong to the document.
            return Ok(());
        }
        validate(&sentence, line)?;
        self.doc().sentences.push(sentence);
        Ok(())
    }

    fn end_doc(&mut self) {
        if let Some(doc) = self.current.take() {
            self.docs.push(doc);
        }
    }
}

fn validate(sentence: &Sentence, line: usize) -> Result<(), ConlluError> {
    let n = sentence.tokens.len();
    if let Some(t) = sentence.tokens.iter().find(|t| t.head > n) {
        return Err(ConlluError::SyntaxError {
            line,
            reason: format!("token {} has head {} outside the sentence", t.index, t.head),
        });
    }
    let roots = sentence.tokens.iter().filter(|t| t.head == 0).count();
    if roots > 1 {
        return Err(ConlluError::MultiRootError { line, roots });
    }
    for t in &sentence.tokens {
        let mut at = t.index;
        let mut steps = 0;
        while at != 0 {
            at = sentence.tokens[at - 1].head;
            steps += 1;
            if steps > n {
                return Err(ConlluError::CycleError { line, token: t.index });
            }
        }
    }
    if roots == 0 {
        return Err(ConlluError::MultiRootError { line, roots });
    }
    Ok(())
}

fn parse_feats(s: &str, line: usize) -> Result<BTreeMap<String, String>, ConlluError> {
    if s == "_" {
        return Ok(BTreeMap::new());
    }
    s.split('|')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| ConlluError::SyntaxError {
                    line,
                    reason: format!("malformed feature `{kv}`"),
                })
        })
        .collect()
}

fn parse_ner(misc: &str) -> Option<String> {
    misc.split('|')
        .find_map(|kv| kv.strip_prefix("NER="))
        .map(str::to_string)
}

fn parse_token(fields: &[&str], expected: usize, line: usize) -> Result<AnnotatedToken, ConlluError> {
    let syntax = |reason: String| ConlluError::SyntaxError { line, reason };
    let index: usize = fields[0].parse().map_err(|_| syntax(format!("bad token id `{}`", fields[0])))?;
    if index != expected {
        return Err(syntax(format!("expected token id {expected}, found {index}")));
    }
    let head: usize = fields[6].parse().map_err(|_| syntax(format!("bad head `{}`", fields[6])))?;
    if head == index {
        return Err(ConlluError::CycleError { line, token: index });
    }
    Ok(AnnotatedToken {
        index,
        form: fields[1].to_string(),
        lemma: fields[2].to_string(),
        upos: fields[3].to_string(),
        xpos: fields[4].to_string(),
        morph: parse_feats(fields[5], line)?,
        head,
        deprel: fields[7].to_string(),
        deps: fields[8].to_string(),
        misc: fields[9].to_string(),
        ner: parse_ner(fields[9]),
    })
}

/// Parses CoNLL-U text. Documents without a `lang` comment get
/// `default_lang`.
pub fn parse_conllu_str(input: &str, default_lang: Lang) -> Result<Vec<AnnotatedDocument>, ConlluError> {
    let mut b = Builder {
        default_lang: Some(default_lang),
        ..Default::default()
    };
    let mut last_line = 0;
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let text = raw.trim_end_matches('\r');
        if text.trim().is_empty() {
            b.end_sentence(line)?;
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("newdoc") {
                b.end_sentence(line)?;
                b.end_doc();
                let id = rest.trim().strip_prefix("id").map(|r| r.trim_start().trim_start_matches('=').trim());
                let doc = b.doc();
                if let Some(id) = id.filter(|s| !s.is_empty()) {
                    doc.doc_id = id.to_string();
                }
                continue;
            }
            let Some((key, value)) = comment.split_once('=') else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "sent_id" => b.sentence.sent_id = Some(value.to_string()),
                "text" => b.sentence.text = Some(value.to_string()),
                "lang" => {
                    let lang = value.parse().map_err(|e| ConlluError::SyntaxError {
                        line,
                        reason: format!("{e}"),
                    })?;
                    b.doc().lang = lang;
                }
                _ => {
                    b.doc().meta.insert(key.to_string(), value.to_string());
                }
            }
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 10 {
            return Err(ConlluError::SyntaxError {
                line,
                reason: format!("expected 10 tab-separated columns, found {}", fields.len()),
            });
        }
        if fields[0].contains('-') || fields[0].contains('.') {
            // Multiword-token ranges and empty nodes.
            continue;
        }
        let expected = b.sentence.tokens.len() + 1;
        let token = parse_token(&fields, expected, line)?;
        b.sentence.tokens.push(token);
    }
    b.end_sentence(last_line + 1)?;
    b.end_doc();
    Ok(b.docs)
}

pub fn parse_conllu(mut reader: impl Read, default_lang: Lang) -> Result<Vec<AnnotatedDocument>, ConlluError> {
    let mut s = String::new();
    reader.read_to_string(&mut s)?;
    parse_conllu_str(&s, default_lang)
}

fn or_underscore(s: &str) -> &str {
    if s.is_empty() {
        "_"
    } else {
        s
    }
}

/// Serializes documents; parsing the result yields the same documents.
pub fn write_conllu(docs: &[AnnotatedDocument]) -> String {
    let mut out = String::new();
    for doc in docs {
        let _ = writeln!(out, "# newdoc id = {}", doc.doc_id);
        let _ = writeln!(out, "# lang = {}", doc.lang.code());
        for (k, v) in &doc.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        for s in &doc.sentences {
            if let Some(id) = &s.sent_id {
                let _ = writeln!(out, "# sent_id = {id}");
            }
            if let Some(text) = &s.text {
                let _ = writeln!(out, "# text = {text}");
            }
            for t in &s.tokens {
                let feats = if t.morph.is_empty() {
                    "_".to_string()
                } else {
                    t.morph.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join("|")
                };
                let misc = match (&t.ner, t.misc.as_str()) {
                    (Some(ner), "_" | "") => format!("NER={ner}"),
                    (_, m) => m.to_string(),
                };
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    t.index,
                    or_underscore(&t.form),
                    or_underscore(&t.lemma),
                    or_underscore(&t.upos),
                    or_underscore(&t.xpos),
                    feats,
                    t.head,
                    or_underscore(&t.deprel),
                    or_underscore(&t.deps),
                    or_underscore(&misc),
                );
            }
            out.push('\n');
        }
    }
    out
}
