//! Placeholder annotation for mock runs: whitespace/punctuation tokens, one
//! flat tree per sentence (first token is the root), `X` or `PUNCT` tags.
//! It carries no linguistic analysis; real runs read parser output.

use std::collections::BTreeMap;

use super::conllu::{AnnotatedDocument, AnnotatedToken, Sentence};
use crate::Lang;

fn split_token(word: &str, out: &mut Vec<String>) {
    let is_punct = |c: char| !c.is_alphanumeric() && !matches!(c, '\'' | '’' | '-');
    let Some(start) = word.find(|c: char| !is_punct(c)) else {
        out.extend(word.chars().map(String::from));
        return;
    };
    let (last, c) = word.char_indices().rev().find(|(_, c)| !is_punct(*c)).expect("has a non-punctuation char");
    let end = last + c.len_utf8();
    out.extend(word[..start].chars().map(String::from));
    out.push(word[start..end].to_string());
    out.extend(word[end..].chars().map(String::from));
}

fn token(index: usize, form: &str) -> AnnotatedToken {
    let punct = !form.chars().any(char::is_alphanumeric);
    AnnotatedToken {
        index,
        form: form.to_string(),
        lemma: form.to_lowercase(),
        upos: if punct { "PUNCT" } else { "X" }.to_string(),
        xpos: "_".into(),
        morph: BTreeMap::new(),
        head: if index == 1 { 0 } else { 1 },
        deprel: if index == 1 {
            "root"
        } else if punct {
            "punct"
        } else {
            "dep"
        }
        .to_string(),
        deps: "_".into(),
        misc: "_".into(),
        ner: None,
    }
}

pub fn flat_annotation(doc_id: &str, text: &str, lang: Lang, meta: BTreeMap<String, String>) -> AnnotatedDocument {
    let mut forms = Vec::new();
    for w in text.split_whitespace() {
        split_token(w, &mut forms);
    }
    let mut sentences = Vec::new();
    let mut current: Vec<AnnotatedToken> = Vec::new();
    let terminal = |f: &str| matches!(f, "." | "!" | "?");
    let mut forms = forms.into_iter().peekable();
    while let Some(f) = forms.next() {
        current.push(token(current.len() + 1, &f));
        // a run such as "?!" or "..." closes one sentence
        if terminal(&f) && !forms.peek().is_some_and(|n| terminal(n)) {
            sentences.push(Sentence {
                sent_id: None,
                text: None,
                tokens: std::mem::take(&mut current),
            });
        }
    }
    if !current.is_empty() {
        sentences.push(Sentence {
            sent_id: None,
            text: None,
            tokens: current,
        });
    }
    AnnotatedDocument {
        doc_id: doc_id.to_string(),
        lang,
        meta,
        sentences,
    }
}
