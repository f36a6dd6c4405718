//! The `clts` command line: one subcommand per pipeline stage, all sharing a
//! run directory with a `manifest.json`.

pub mod config;
pub mod demo;
pub mod manifest;
pub mod report;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{CorpusError, ProviderError};
use crate::features::FeatureError;
use crate::metrics::MetricError;
use crate::prompting::PromptError;
use crate::stats::StatsError;

pub use config::RunConfig;
pub use manifest::{Manifest, StageRecord};
pub use stages::{run_stage, Stage, StageContext};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("stage `{0}` has not been run in this run directory")]
    MissingArtifact(String),
}

impl CliError {
    /// 1 config, 2 data, 3 backend.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) | CliError::MissingArtifact(_) => 2,
            CliError::Backend(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PromptError> for CliError {
    fn from(e: PromptError) -> Self {
        match e {
            PromptError::UnknownStrategy { .. } | PromptError::InvalidConfig(_) => CliError::Config(e.to_string()),
            PromptError::Backend { .. } | PromptError::EmptyResponse { .. } | PromptError::TotalOutage { .. } => {
                CliError::Backend(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::EmbeddingBackend(_) => CliError::Backend(e.to_string()),
            CorpusError::InvalidThreshold(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ProviderError> for CliError {
    fn from(e: ProviderError) -> Self {
        CliError::Backend(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Embedding(_) => CliError::Backend(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::MissingResource(_) | FeatureError::Hyphenation(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "clts", version, about = "Cross-lingual text simplification evaluation pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load corpora, translate monolingual pairs and apply the similarity filter.
    Preprocess(CommonArgs),
    /// Run every prompting strategy against every configured backend.
    Generate(CommonArgs),
    /// Extract linguistic features from annotated outputs.
    Features(CommonArgs),
    /// Score outputs with BLEU, SARI and semantic similarity.
    Metrics(CommonArgs),
    /// Pairwise Welch t-tests between strategies.
    Stats(CommonArgs),
    /// Human-rating summary and agreement simulation.
    Iaa(CommonArgs),
    /// Render the Markdown report and summary tables.
    Report(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Run directory; defaults to `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Skip the stage if its recorded artifacts are current, and reuse cached
    /// generations.
    #[arg(long)]
    pub resume: bool,
    /// Overrides the seed from the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    pub fn split(self) -> (Stage, CommonArgs) {
        match self {
            Command::Preprocess(a) => (Stage::Preprocess, a),
            Command::Generate(a) => (Stage::Generate, a),
            Command::Features(a) => (Stage::Features, a),
            Command::Metrics(a) => (Stage::Metrics, a),
            Command::Stats(a) => (Stage::Stats, a),
            Command::Iaa(a) => (Stage::Iaa, a),
            Command::Report(a) => (Stage::Report, a),
        }
    }
}

/// Loads the config named by `args` and builds the stage context.
pub fn context(args: &CommonArgs) -> Result<StageContext, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let run_dir = match (&args.out, &config.output_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => p.clone(),
        (None, None) => return Err(CliError::Config("no run directory: pass --out or set output_dir".into())),
    };
    Ok(StageContext::new(config, run_dir, args.resume))
}

/// Parses `args`, runs the stage and maps the outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (stage, common) = cli.command.split();
    match context(&common).and_then(|ctx| run_stage(stage, &ctx)) {
        Ok(record) => {
            log::info!("{} finished: {:?}", stage.name(), record.counts);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("clts {}: {e}", stage.name());
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 1);
        assert_eq!(CliError::Data(String::new()).exit_code(), 2);
        assert_eq!(CliError::MissingArtifact("stats".into()).exit_code(), 2);
        assert_eq!(CliError::Backend(String::new()).exit_code(), 3);
    }

    #[test]
    fn every_subcommand_takes_common_flags() {
        for sub in ["preprocess", "generate", "features", "metrics", "stats", "iaa", "report"] {
            let cli = Cli::try_parse_from(["clts", sub, "--config", "c.toml", "--out", "o", "--resume", "--seed", "7"])
                .unwrap_or_else(|e| panic!("{sub}: {e}"));
            let (stage, args) = cli.command.split();
            assert_eq!(stage.name(), sub);
            assert!(args.resume);
            assert_eq!(args.seed, Some(7));
        }
    }

    #[test]
    fn strategy_errors_map_to_config() {
        let e: CliError = "pivot".parse::<crate::prompting::Strategy>().unwrap_err().into();
        assert_eq!(e.exit_code(), 1);
    }
}
