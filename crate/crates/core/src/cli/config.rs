//! Run configuration, read from a TOML file. Secrets are never stored in the
//! file; providers name the environment variable that holds their key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::corpus::{CorpusFormat, Split, DEFAULT_SIMILARITY_THRESHOLD};
use crate::features::FeatureConfig;
use crate::prompting::{BackendSpec, GenerationConfig, Strategy};
use crate::Lang;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatName {
    Jsonl,
    Tsv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub id: String,
    pub path: PathBuf,
    pub format: FormatName,
    /// Required for TSV input.
    #[serde(default)]
    pub source_lang: Option<Lang>,
    #[serde(default)]
    pub target_lang: Option<Lang>,
    #[serde(default = "default_split")]
    pub split: Split,
    /// Translate monolingual pairs into cross-lingual ones.
    #[serde(default)]
    pub augment: bool,
    /// Apply the similarity filter.
    #[serde(default = "yes")]
    pub filter: bool,
    /// Keep only the first `limit` pairs after preprocessing.
    #[serde(default)]
    pub limit: Option<usize>,
}

fn default_split() -> Split {
    Split::Test
}

fn yes() -> bool {
    true
}

impl CorpusConfig {
    pub fn format(&self) -> Result<CorpusFormat, CliError> {
        Ok(match self.format {
            FormatName::Jsonl => CorpusFormat::Jsonl,
            FormatName::Tsv => {
                let need = |l: Option<Lang>, what: &str| {
                    l.ok_or_else(|| CliError::Config(format!("corpus `{}`: TSV input needs `{what}`", self.id)))
                };
                CorpusFormat::Tsv {
                    source_lang: need(self.source_lang, "source_lang")?,
                    target_lang: need(self.target_lang, "target_lang")?,
                    corpus_id: self.id.clone(),
                    split: self.split,
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterOrder {
    /// Compare the source with the translated references.
    AfterAugmentation,
    /// Compare the source with the original references, then translate.
    BeforeAugmentation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub similarity_threshold: f64,
    /// Sentence embedder: `mock:bow`, `mock:constant`, `file:<path>` or a URL.
    pub embedder: String,
    pub embedder_key_env: Option<String>,
    /// Translator: `mock:identity`, `mock:upper` or a URL.
    pub translator: String,
    pub translator_key_env: Option<String>,
    pub filter_order: FilterOrder,
    pub batch_size: usize,
    pub parallelism: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            similarity_threshold: DEFAULT_SIMILARITY_THRESHOLD,
            embedder: "mock:bow".into(),
            embedder_key_env: None,
            translator: "mock:identity".into(),
            translator_key_env: None,
            filter_order: FilterOrder::AfterAugmentation,
            batch_size: 64,
            parallelism: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Token embedder per output language (`en`, `fr`): `mock:hash`,
    /// `file:<path>` or a URL. Languages without one get null semantic scores.
    pub token_embedders: BTreeMap<Lang, String>,
    pub token_embedder_key_env: Option<String>,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            token_embedders: Lang::ALL.iter().map(|l| (*l, "mock:hash".to_string())).collect(),
            token_embedder_key_env: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageResourceConfig {
    /// TeX pattern file; the bundled patterns are used when absent.
    #[serde(default)]
    pub patterns: Option<PathBuf>,
    pub frequency_list: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    /// CoNLL-U file or directory of `.conllu` files annotating the outputs.
    pub annotations: Option<PathBuf>,
    /// `mock:flat` annotates outputs with flat placeholder trees instead.
    pub annotator: Option<String>,
    pub resources: BTreeMap<Lang, LanguageResourceConfig>,
    pub thresholds: FeatureConfig,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub alpha: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self { alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanConfig {
    pub ratings: Option<PathBuf>,
    pub n_repeats: usize,
}

impl Default for HumanConfig {
    fn default() -> Self {
        Self {
            ratings: None,
            n_repeats: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub corpora: Vec<CorpusConfig>,
    pub backends: Vec<BackendSpec>,
    #[serde(default = "all_strategies")]
    pub strategies: Vec<String>,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub generation: GenerationConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub features: FeaturesConfig,
    #[serde(default)]
    pub stats: StatsConfig,
    #[serde(default)]
    pub human: HumanConfig,
}

fn all_strategies() -> Vec<String> {
    Strategy::ALL.iter().map(|s| s.name().to_string()).collect()
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Reads, resolves relative paths against the file's directory, and
    /// validates.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for c in &mut self.corpora {
            resolve(base, &mut c.path);
        }
        if let Some(p) = &mut self.output_dir {
            resolve(base, p);
        }
        if let Some(p) = &mut self.features.annotations {
            resolve(base, p);
        }
        for r in self.features.resources.values_mut() {
            resolve(base, &mut r.frequency_list);
            if let Some(p) = &mut r.patterns {
                resolve(base, p);
            }
        }
        if let Some(p) = &mut self.human.ratings {
            resolve(base, p);
        }
        for spec in [&mut self.preprocess.embedder, &mut self.preprocess.translator]
            .into_iter()
            .chain(self.metrics.token_embedders.values_mut())
        {
            if let Some(rest) = spec.strip_prefix("file:") {
                let mut p = PathBuf::from(rest);
                resolve(base, &mut p);
                *spec = format!("file:{}", p.display());
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.corpora.is_empty() {
            return bad("at least one corpus is required".into());
        }
        if self.backends.is_empty() {
            return bad("at least one backend is required".into());
        }
        self.strategies()?;
        let mut ids = std::collections::HashSet::new();
        for c in &self.corpora {
            if !ids.insert(&c.id) {
                return bad(format!("duplicate corpus id `{}`", c.id));
            }
            if !c.path.exists() {
                return bad(format!("corpus `{}`: {} does not exist", c.id, c.path.display()));
            }
            c.format()?;
        }
        let mut names = std::collections::HashSet::new();
        for b in &self.backends {
            if !names.insert(&b.name) {
                return bad(format!("duplicate backend name `{}`", b.name));
            }
        }
        let t = self.preprocess.similarity_threshold;
        if !t.is_finite() || t < -1.0 {
            return bad(format!("similarity_threshold must be a number >= -1, got {t}"));
        }
        self.generation.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.stats.alpha > 0.0 && self.stats.alpha < 1.0) {
            return bad(format!("alpha must be in (0, 1), got {}", self.stats.alpha));
        }
        Ok(())
    }

    /// Strategies in canonical order.
    pub fn strategies(&self) -> Result<Vec<Strategy>, CliError> {
        let mut out = Vec::new();
        for name in &self.strategies {
            let s: Strategy = name.parse().map_err(|e: crate::prompting::PromptError| CliError::Config(e.to_string()))?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        if out.is_empty() {
            return Err(CliError::Config("at least one strategy is required".into()));
        }
        out.sort();
        Ok(out)
    }

    /// Stable hash of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
