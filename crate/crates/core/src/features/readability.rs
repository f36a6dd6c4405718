//! Flesch Reading Ease and Flesch-Kincaid grade.
//!
//! French Reading Ease uses the Kandel-Moles constants; the grade level uses
//! the English constants for both languages. A document with tokens but no
//! words has ASL = ASW = 0.

use super::conllu::AnnotatedDocument;
use super::hyphenation::Hyphenator;
use super::FeatureError;
use crate::Lang;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadabilityCounts {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
}

impl ReadabilityCounts {
    pub fn of(doc: &AnnotatedDocument, hyphenator: &Hyphenator) -> Result<Self, FeatureError> {
        if doc.is_empty() {
            return Err(FeatureError::EmptyDocument(doc.doc_id.clone()));
        }
        let mut c = ReadabilityCounts {
            sentences: doc.sentences.len(),
            ..Default::default()
        };
        for word in doc.sentences.iter().flat_map(|s| s.words()) {
            c.words += 1;
            c.syllables += hyphenator.syllable_count(&word.form);
        }
        Ok(c)
    }

    /// Average sentence length in words.
    pub fn asl(&self) -> f64 {
        self.words as f64 / self.sentences as f64
    }

    /// Average syllables per word.
    pub fn asw(&self) -> f64 {
        if self.words == 0 {
            0.0
        } else {
            self.syllables as f64 / self.words as f64
        }
    }
}

pub fn reading_ease(lang: Lang, asl: f64, asw: f64) -> f64 {
    match lang {
        Lang::En => 206.835 - 1.015 * asl - 84.6 * asw,
        Lang::Fr => 207.0 - 1.015 * asl - 73.6 * asw,
    }
}

pub fn kincaid_grade(asl: f64, asw: f64) -> f64 {
    0.39 * asl + 11.8 * asw - 15.59
}

pub fn flesch_reading_ease(doc: &AnnotatedDocument, hyphenator: &Hyphenator) -> Result<f64, FeatureError> {
    let c = ReadabilityCounts::of(doc, hyphenator)?;
    Ok(reading_ease(doc.lang, c.asl(), c.asw()))
}

pub fn flesch_kincaid_grade(doc: &AnnotatedDocument, hyphenator: &Hyphenator) -> Result<f64, FeatureError> {
    let c = ReadabilityCounts::of(doc, hyphenator)?;
    Ok(kincaid_grade(c.asl(), c.asw()))
}
