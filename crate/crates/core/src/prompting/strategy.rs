use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PromptError;
use crate::Lang;

/// The five ways of combining translation and simplification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// One instruction to simplify directly in the target language.
    Direct,
    /// Single prompt: translate, then simplify the translation.
    CompTs,
    /// Single prompt: simplify, then translate the simplification.
    CompSt,
    /// Two prompts: translate; simplify the translation.
    DecompTs,
    /// Two prompts: simplify; translate the simplification.
    DecompSt,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Direct,
        Strategy::CompTs,
        Strategy::CompSt,
        Strategy::DecompTs,
        Strategy::DecompSt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::CompTs => "comp-ts",
            Strategy::CompSt => "comp-st",
            Strategy::DecompTs => "decomp-ts",
            Strategy::DecompSt => "decomp-st",
        }
    }

    /// Row label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Direct => "Direct",
            Strategy::CompTs => "T>S Comp.",
            Strategy::CompSt => "S>T Comp.",
            Strategy::DecompTs => "T>S Decomp.",
            Strategy::DecompSt => "S>T Decomp.",
        }
    }

    pub fn is_decomposition(self) -> bool {
        matches!(self, Strategy::DecompTs | Strategy::DecompSt)
    }

    /// Backend calls needed per item.
    pub fn calls(self) -> usize {
        if self.is_decomposition() {
            2
        } else {
            1
        }
    }

    /// Instruction prefixes, one per backend call, each ending in `": "`.
    pub fn instructions(self, target: Lang) -> Vec<String> {
        let lang = target.name();
        let translate = format!("Please translate the following text to {lang}: ");
        let simplify_in = format!("Please simplify the following text in {lang}: ");
        match self {
            Strategy::Direct => vec![simplify_in],
            Strategy::CompTs => vec![format!(
                "Please first translate the following text to {lang} and then simplify the translated text in {lang}: "
            )],
            Strategy::CompSt => vec![format!(
                "Please first simplify the following text and then translate the simplification to {lang}: "
            )],
            Strategy::DecompTs => vec![translate, simplify_in],
            Strategy::DecompSt => vec!["Please simplify the following text: ".to_string(), translate],
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = PromptError;

    /// Accepts the kebab-case names (`comp-ts`) and their unpunctuated,
    /// case-insensitive spellings (`CompTS`, `comp_ts`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().replace('-', "") == norm)
            .ok_or_else(|| PromptError::UnknownStrategy {
                name: s.to_string(),
                valid: Strategy::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", "),
            })
    }
}

/// One backend call: an instruction followed by its payload. The payload of a
/// chained step is the previous step's trimmed response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub instruction: String,
    /// `Some(source)` for the first step, `None` for chained steps.
    pub payload: Option<String>,
}

impl PromptTemplate {
    /// Renders with the stored payload, or `chained` for a chained step.
    pub fn render(&self, chained: &str) -> String {
        format!("{}{}", self.instruction, self.payload.as_deref().unwrap_or(chained))
    }
}

/// The ordered prompt templates for one item.
pub fn build_prompts(strategy: Strategy, source: &str, target_lang: Lang) -> Result<Vec<PromptTemplate>, PromptError> {
    if source.trim().is_empty() {
        return Err(PromptError::EmptySource);
    }
    Ok(strategy
        .instructions(target_lang)
        .into_iter()
        .enumerate()
        .map(|(i, instruction)| PromptTemplate {
            instruction,
            payload: (i == 0).then(|| source.to_string()),
        })
        .collect())
}

/// Like [`build_prompts`] but takes the target language as a code.
pub fn build_prompts_for_code(strategy: Strategy, source: &str, target_lang: &str) -> Result<Vec<PromptTemplate>, PromptError> {
    let lang: Lang = target_lang
        .parse()
        .map_err(|e: crate::lang::UnsupportedLanguage| PromptError::UnsupportedLanguage(e.0))?;
    build_prompts(strategy, source, lang)
}
