//! Stage implementations. Each stage reads the artifacts of earlier stages
//! from the run directory and records its own in the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{FilterOrder, RunConfig};
use super::manifest::{artifacts, now, sha256_file, Manifest, StageRecord};
use super::{report, CliError};
use crate::corpus::providers::{sentence_embedder_from_spec, translator_from_spec};
use crate::corpus::{
    augment_with_translation, filter_by_similarity, load_corpus, FilterOptions, SentenceEmbedder, SentencePair,
    SimilarityDecision, Translator,
};
use crate::features::{
    extract_features, flat_annotation, parse_conllu, write_features_csv, AnnotatedDocument, FeatureError,
    FeatureResources, FeatureRow, FeatureVector, FrequencyList, Hyphenator, LanguageResources,
};
use crate::http::ProviderSpec;
use crate::metrics::{
    score_outputs, token_embedder_from_spec, write_aggregates_csv, write_records_jsonl, MetricRecord,
    PerLanguageEmbedder,
};
use crate::prompting::{cache_key, run_matrix, slug, ChatBackend, OutputStore, Strategy};
use crate::stats::{
    compare_strategies, human_eval_summary, iaa_simulation, load_ratings, write_human_summary_csv, write_iaa_csv,
    write_significance_csv, Dimension, Observation,
};
use crate::Lang;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Preprocess,
    Generate,
    Features,
    Metrics,
    Stats,
    Iaa,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Preprocess,
        Stage::Generate,
        Stage::Features,
        Stage::Metrics,
        Stage::Stats,
        Stage::Iaa,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Preprocess => "preprocess",
            Stage::Generate => "generate",
            Stage::Features => "features",
            Stage::Metrics => "metrics",
            Stage::Stats => "stats",
            Stage::Iaa => "iaa",
            Stage::Report => "report",
        }
    }

    /// Earlier stages whose artifacts this stage reads, when present.
    fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Preprocess | Stage::Iaa => &[],
            Stage::Generate => &[Stage::Preprocess],
            Stage::Features => &[Stage::Generate],
            Stage::Metrics => &[Stage::Preprocess, Stage::Generate],
            Stage::Stats => &[Stage::Metrics, Stage::Features],
            Stage::Report => &[Stage::Metrics, Stage::Stats, Stage::Features, Stage::Iaa],
        }
    }
}

pub struct StageContext {
    pub config: RunConfig,
    pub run_dir: PathBuf,
    pub resume: bool,
}

impl StageContext {
    pub fn new(config: RunConfig, run_dir: PathBuf, resume: bool) -> Self {
        Self { config, run_dir, resume }
    }

    pub fn dir(&self, stage: Stage) -> PathBuf {
        self.run_dir.join(stage.name())
    }

    /// Files outside the run directory that `stage` reads.
    fn external_inputs(&self, stage: Stage) -> Vec<PathBuf> {
        let cfg = &self.config;
        let mut files = Vec::new();
        match stage {
            Stage::Preprocess => files.extend(cfg.corpora.iter().map(|c| c.path.clone())),
            Stage::Features => {
                if let Some(p) = &cfg.features.annotations {
                    files.extend(conllu_files(p).unwrap_or_default());
                }
                for r in cfg.features.resources.values() {
                    files.push(r.frequency_list.clone());
                    files.extend(r.patterns.clone());
                }
            }
            Stage::Iaa => files.extend(cfg.human.ratings.clone()),
            _ => {}
        }
        files
    }

    /// Hash of the configuration, the external inputs and the upstream
    /// artifacts. A stage is current when this matches its record.
    fn input_hash(&self, stage: Stage, manifest: &Manifest) -> String {
        let mut h = Sha256::new();
        h.update(self.config.hash().as_bytes());
        for f in self.external_inputs(stage) {
            h.update(f.to_string_lossy().as_bytes());
            if let Ok((digest, _)) = sha256_file(&f) {
                h.update(digest.as_bytes());
            }
            h.update([0]);
        }
        for up in stage.upstream() {
            if let Some(rec) = manifest.stages.get(up.name()) {
                for a in &rec.artifacts {
                    h.update(a.path.as_bytes());
                    h.update(a.sha256.as_bytes());
                }
            }
        }
        hex::encode(h.finalize())
    }
}

/// What a stage produced.
#[derive(Debug, Default)]
pub(crate) struct StageOutput {
    pub files: Vec<PathBuf>,
    pub counts: BTreeMap<String, usize>,
    pub errors: usize,
}

/// Runs `stage` and records it in the manifest. With `resume`, a stage whose
/// inputs and artifacts are unchanged is skipped.
pub fn run_stage(stage: Stage, ctx: &StageContext) -> Result<StageRecord, CliError> {
    fs::create_dir_all(&ctx.run_dir)?;
    let mut manifest = Manifest::load(&ctx.run_dir)?;
    let input_hash = ctx.input_hash(stage, &manifest);
    if ctx.resume && manifest.is_current(&ctx.run_dir, stage.name(), &input_hash) {
        log::info!("{} is up to date; skipping", stage.name());
        return Ok(manifest.stages[stage.name()].clone());
    }
    let started_at = now();
    let out = match stage {
        Stage::Preprocess => preprocess(ctx)?,
        Stage::Generate => generate(ctx, &manifest)?,
        Stage::Features => features(ctx, &manifest)?,
        Stage::Metrics => metrics(ctx, &manifest)?,
        Stage::Stats => stats(ctx, &manifest)?,
        Stage::Iaa => iaa(ctx)?,
        Stage::Report => report::build(ctx, &manifest)?,
    };
    let record = StageRecord {
        config_hash: input_hash,
        started_at,
        finished_at: now(),
        counts: out.counts,
        errors: out.errors,
        artifacts: artifacts(&ctx.run_dir, &out.files)?,
    };
    manifest.stages.insert(stage.name().to_string(), record.clone());
    manifest.save(&ctx.run_dir)?;
    Ok(record)
}

/// Empties and recreates a stage directory.
fn fresh_dir(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        fs::remove_dir_all(path)?;
    }
    fs::create_dir_all(path)?;
    Ok(())
}

fn provider(spec: &str) -> Result<ProviderSpec, CliError> {
    spec.parse().map_err(CliError::Config)
}

pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut f, r).map_err(std::io::Error::from)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

fn kept_path(ctx: &StageContext, corpus_id: &str) -> PathBuf {
    ctx.dir(Stage::Preprocess).join(format!("{}.kept.jsonl", slug(corpus_id)))
}

/// Preprocessed pairs of every configured corpus, in config order.
fn load_kept(ctx: &StageContext, manifest: &Manifest) -> Result<Vec<SentencePair>, CliError> {
    manifest.require(Stage::Preprocess.name())?;
    let mut pairs = Vec::new();
    for c in &ctx.config.corpora {
        let path = kept_path(ctx, &c.id);
        if !path.exists() {
            return Err(CliError::MissingArtifact(Stage::Preprocess.name().into()));
        }
        pairs.extend(read_jsonl::<SentencePair>(&path)?);
    }
    Ok(pairs)
}

#[derive(Serialize)]
struct DecisionLine<'a> {
    corpus: &'a str,
    #[serde(flatten)]
    decision: &'a SimilarityDecision,
}

#[derive(Serialize)]
struct FailureLine<'a> {
    corpus: &'a str,
    pair_id: &'a str,
    error: String,
}

fn preprocess(ctx: &StageContext) -> Result<StageOutput, CliError> {
    let cfg = &ctx.config;
    let pc = &cfg.preprocess;
    let dir = ctx.dir(Stage::Preprocess);
    fresh_dir(&dir)?;
    let retry = cfg.generation.retry_policy();
    let embedder: Option<Box<dyn SentenceEmbedder>> = if cfg.corpora.iter().any(|c| c.filter) {
        Some(sentence_embedder_from_spec(&provider(&pc.embedder)?, pc.embedder_key_env.as_deref(), retry)?)
    } else {
        None
    };
    let translator: Option<Box<dyn Translator>> = if cfg.corpora.iter().any(|c| c.augment) {
        Some(translator_from_spec(&provider(&pc.translator)?, pc.translator_key_env.as_deref(), retry)?)
    } else {
        None
    };
    let opts = FilterOptions {
        threshold: pc.similarity_threshold,
        batch_size: pc.batch_size.max(1),
        parallelism: pc.parallelism.max(1),
    };

    let mut out = StageOutput::default();
    let mut decisions = Vec::new();
    let mut failures = Vec::new();
    for c in &cfg.corpora {
        let mut pairs = load_corpus(&c.path, &c.format()?)?;
        out.counts.insert(format!("{}.loaded", c.id), pairs.len());
        let mut dropped = Vec::new();
        let mut filter = |pairs: Vec<SentencePair>| -> Result<Vec<SentencePair>, CliError> {
            let Some(embedder) = embedder.as_deref().filter(|_| c.filter) else {
                return Ok(pairs);
            };
            let outcome = filter_by_similarity(&pairs, embedder, &opts)?;
            let rejected: BTreeSet<&str> = outcome.filtered_ids().collect();
            dropped.extend(pairs.iter().filter(|p| rejected.contains(p.id.as_str())).cloned());
            decisions.extend(outcome.decisions.iter().map(|d| (c.id.clone(), d.clone())));
            Ok(outcome.kept)
        };
        let mut augment = |pairs: Vec<SentencePair>| -> Vec<SentencePair> {
            let Some(translator) = translator.as_deref().filter(|_| c.augment) else {
                return pairs;
            };
            let outcome = augment_with_translation(&pairs, translator, pc.parallelism);
            failures.extend(outcome.failures.into_iter().map(|f| (c.id.clone(), f)));
            outcome.pairs
        };
        pairs = match pc.filter_order {
            FilterOrder::AfterAugmentation => filter(augment(pairs))?,
            FilterOrder::BeforeAugmentation => augment(filter(pairs)?),
        };
        if let Some(limit) = c.limit {
            pairs.truncate(limit);
        }
        if let Some(p) = pairs.iter().find(|p| p.source_lang == p.target_lang) {
            log::warn!("corpus {}: pair {} is still monolingual; enable `augment`", c.id, p.id);
        }
        out.counts.insert(format!("{}.kept", c.id), pairs.len());
        out.counts.insert(format!("{}.filtered", c.id), dropped.len());
        let kept = kept_path(ctx, &c.id);
        let filtered = dir.join(format!("{}.filtered.jsonl", slug(&c.id)));
        write_jsonl(&kept, &pairs)?;
        write_jsonl(&filtered, &dropped)?;
        out.files.extend([kept, filtered]);
    }

    let path = dir.join("decisions.jsonl");
    let lines: Vec<DecisionLine> = decisions
        .iter()
        .map(|(corpus, decision)| DecisionLine { corpus, decision })
        .collect();
    write_jsonl(&path, &lines)?;
    out.files.push(path);
    let path = dir.join("augment_failures.jsonl");
    let lines: Vec<FailureLine> = failures
        .iter()
        .map(|(corpus, f)| FailureLine {
            corpus,
            pair_id: &f.pair_id,
            error: f.error.to_string(),
        })
        .collect();
    write_jsonl(&path, &lines)?;
    out.files.push(path);
    out.errors = failures.len();
    out.counts.insert("augment_failures".into(), failures.len());
    Ok(out)
}

/// One output to be parsed by an external annotator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRequest {
    pub doc_id: String,
    pub corpus: String,
    pub model: String,
    pub strategy: Strategy,
    pub lang: Lang,
    pub text: String,
}

pub const ANNOTATION_REQUESTS: &str = "annotation_requests.jsonl";

fn generate(ctx: &StageContext, manifest: &Manifest) -> Result<StageOutput, CliError> {
    let cfg = &ctx.config;
    let pairs = load_kept(ctx, manifest)?;
    let strategies = cfg.strategies()?;
    let backends: Vec<Box<dyn ChatBackend>> =
        cfg.backends.iter().map(|b| b.build().map_err(CliError::Config)).collect::<Result<_, _>>()?;
    let dir = ctx.dir(Stage::Generate);
    if !ctx.resume {
        fresh_dir(&dir)?;
    }
    let store = OutputStore::open(&dir)?;
    let run = run_matrix(&pairs, &strategies, &backends, &cfg.generation, &store)?;

    let target: BTreeMap<(&str, &str), Lang> =
        pairs.iter().map(|p| ((p.corpus_id.as_str(), p.id.as_str()), p.target_lang)).collect();
    let requests: Vec<AnnotationRequest> = run
        .outputs
        .iter()
        .map(|o| AnnotationRequest {
            doc_id: o.pair_id.clone(),
            corpus: o.corpus_id.clone(),
            model: o.model_id.clone(),
            strategy: o.strategy,
            lang: target[&(o.corpus_id.as_str(), o.pair_id.as_str())],
            text: o.hypothesis.clone(),
        })
        .collect();
    let req_path = dir.join(ANNOTATION_REQUESTS);
    write_jsonl(&req_path, &requests)?;

    let mut out = StageOutput {
        files: store.output_files()?,
        ..StageOutput::default()
    };
    let errors = dir.join("errors.jsonl");
    if errors.exists() {
        out.files.push(errors);
    }
    out.files.push(req_path);
    out.counts.insert("pairs".into(), pairs.len());
    out.counts.insert("outputs".into(), run.outputs.len());
    out.counts.insert("cache_hits".into(), run.cache_hits);
    out.counts.insert("failed".into(), run.ledger.len());
    out.errors = run.ledger.len();
    Ok(out)
}

/// `path` itself, or the `.conllu` files directly inside it, sorted.
fn conllu_files(path: &Path) -> std::io::Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "conllu"))
        .collect();
    files.sort();
    Ok(files)
}

fn load_annotations(path: &Path) -> Result<Vec<AnnotatedDocument>, CliError> {
    if !path.exists() {
        return Err(CliError::Config(format!("annotations {} do not exist", path.display())));
    }
    let mut docs = Vec::new();
    for f in conllu_files(path)? {
        let file = fs::File::open(&f)?;
        let parsed = parse_conllu(file, Lang::En)
            .map_err(|e| CliError::Data(format!("{}: {e}", f.display())))?;
        docs.extend(parsed);
    }
    Ok(docs)
}

fn features(ctx: &StageContext, manifest: &Manifest) -> Result<StageOutput, CliError> {
    let fc = &ctx.config.features;
    manifest.require(Stage::Generate.name())?;
    let docs = match (&fc.annotations, fc.annotator.as_deref()) {
        (Some(path), _) => load_annotations(path)?,
        (None, Some("mock:flat")) => {
            let requests: Vec<AnnotationRequest> = read_jsonl(&ctx.dir(Stage::Generate).join(ANNOTATION_REQUESTS))?;
            requests
                .iter()
                .map(|r| {
                    let meta = BTreeMap::from([
                        ("corpus".to_string(), r.corpus.clone()),
                        ("model".to_string(), r.model.clone()),
                        ("strategy".to_string(), r.strategy.name().to_string()),
                    ]);
                    flat_annotation(&r.doc_id, &r.text, r.lang, meta)
                })
                .collect()
        }
        (None, Some(other)) => {
            return Err(CliError::Config(format!("unknown annotator `{other}` (expected `mock:flat`)")))
        }
        (None, None) => {
            return Err(CliError::Config(
                "features need `features.annotations` (CoNLL-U) or `features.annotator = \"mock:flat\"`".into(),
            ))
        }
    };

    let mut resources = FeatureResources::new();
    for lang in docs.iter().map(|d| d.lang).collect::<BTreeSet<_>>() {
        let rc = fc
            .resources
            .get(&lang)
            .ok_or_else(|| CliError::Config(format!("no feature resources configured for `{lang}`")))?;
        let hyphenator = match &rc.patterns {
            Some(p) => Hyphenator::load(p).map_err(FeatureError::from)?,
            None => Hyphenator::builtin(lang),
        };
        let frequency = FrequencyList::load(&rc.frequency_list)?;
        resources = resources.with(lang, LanguageResources { hyphenator, frequency });
    }

    let results: Vec<Result<FeatureVector, FeatureError>> = docs
        .par_iter()
        .map(|d| extract_features(d, &resources, &fc.thresholds))
        .collect();
    let mut rows = Vec::new();
    let mut skipped = 0;
    for (doc, r) in docs.iter().zip(results) {
        match r {
            Ok(f) => rows.push(FeatureRow::new(doc, f)),
            Err(FeatureError::EmptyDocument(id)) => {
                log::warn!("document {id} has no tokens; skipped");
                skipped += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let dir = ctx.dir(Stage::Features);
    fresh_dir(&dir)?;
    let path = dir.join("features.csv");
    write_features_csv(&path, &rows)?;
    let mut out = StageOutput::default();
    out.files.push(path);
    out.counts.insert("documents".into(), rows.len());
    out.counts.insert("skipped_empty".into(), skipped);
    out.errors = skipped;
    Ok(out)
}

fn metrics(ctx: &StageContext, manifest: &Manifest) -> Result<StageOutput, CliError> {
    let cfg = &ctx.config;
    let pairs = load_kept(ctx, manifest)?;
    manifest.require(Stage::Generate.name())?;
    let store = OutputStore::open(&ctx.dir(Stage::Generate))?;
    let strategies = cfg.strategies()?;

    let mut outputs = Vec::new();
    let mut missing = 0;
    for b in &cfg.backends {
        for &s in &strategies {
            for p in &pairs {
                match store.get(&cache_key(s, p, &b.name, &cfg.generation)?) {
                    Some(o) => outputs.push(o),
                    None => missing += 1,
                }
            }
        }
    }
    if missing > 0 {
        log::warn!("{missing} (model, strategy, item) triple(s) have no output and are not scored");
    }

    let mut embedder = PerLanguageEmbedder::new();
    for (lang, spec) in &cfg.metrics.token_embedders {
        let e = token_embedder_from_spec(
            &provider(spec)?,
            cfg.metrics.token_embedder_key_env.as_deref(),
            cfg.generation.retry_policy(),
        )?;
        embedder = embedder.with(*lang, e);
    }
    let report = score_outputs(&outputs, &pairs, Some(&embedder))?;

    let dir = ctx.dir(Stage::Metrics);
    fresh_dir(&dir)?;
    let items = dir.join("items.jsonl");
    let table = dir.join("metrics.csv");
    write_records_jsonl(&items, &report.records)?;
    write_aggregates_csv(&table, &report.aggregates)?;
    let mut out = StageOutput {
        files: vec![items, table],
        ..StageOutput::default()
    };
    out.counts.insert("items".into(), report.records.len());
    out.counts.insert("missing_outputs".into(), missing);
    out.counts.insert(
        "null_semantic".into(),
        report.records.iter().filter(|r| r.semantic.is_none()).count(),
    );
    out.errors = missing;
    Ok(out)
}

/// Drops (cell, strategy) groups with fewer than two values; a t-test needs
/// at least two observations per group.
fn testable(observations: Vec<Observation>) -> Vec<Observation> {
    let mut sizes: BTreeMap<(String, String, String, Strategy), usize> = BTreeMap::new();
    for o in &observations {
        *sizes
            .entry((o.corpus.clone(), o.model.clone(), o.metric.clone(), o.strategy))
            .or_default() += 1;
    }
    for (k, n) in &sizes {
        if *n < 2 {
            log::warn!("{}/{}/{} {}: only {n} value(s); not tested", k.0, k.1, k.2, k.3);
        }
    }
    observations
        .into_iter()
        .filter(|o| sizes[&(o.corpus.clone(), o.model.clone(), o.metric.clone(), o.strategy)] >= 2)
        .collect()
}

fn stats(ctx: &StageContext, manifest: &Manifest) -> Result<StageOutput, CliError> {
    manifest.require(Stage::Metrics.name())?;
    let records: Vec<MetricRecord> = read_jsonl(&ctx.dir(Stage::Metrics).join("items.jsonl"))?;
    let mut obs = Vec::new();
    for r in &records {
        for (metric, value) in [("bleu", r.bleu), ("sari", r.sari), ("semantic", r.semantic)] {
            if let Some(value) = value {
                obs.push(Observation {
                    corpus: r.corpus_id.clone(),
                    model: r.model_id.clone(),
                    strategy: r.strategy,
                    metric: metric.to_string(),
                    value,
                });
            }
        }
    }
    let mut feature_rows = 0;
    if manifest.stages.contains_key(Stage::Features.name()) {
        let rows = crate::features::read_features_csv(&ctx.dir(Stage::Features).join("features.csv"))?;
        for row in &rows {
            let Ok(strategy) = row.strategy.parse::<Strategy>() else {
                log::warn!("feature row {} has no known strategy; not tested", row.doc_id);
                continue;
            };
            feature_rows += 1;
            for (name, value) in FeatureVector::NAMES.iter().zip(row.features.values()) {
                obs.push(Observation {
                    corpus: row.corpus.clone(),
                    model: row.model.clone(),
                    strategy,
                    metric: name.to_string(),
                    value,
                });
            }
        }
    }
    let results = compare_strategies(&testable(obs), ctx.config.stats.alpha)?;

    let dir = ctx.dir(Stage::Stats);
    fresh_dir(&dir)?;
    let path = dir.join("significance.csv");
    write_significance_csv(&path, &results)?;
    let mut out = StageOutput::default();
    out.files.push(path);
    out.counts.insert("tests".into(), results.len());
    out.counts.insert("feature_rows".into(), feature_rows);
    out.counts.insert(
        "bonferroni_significant".into(),
        results.iter().filter(|r| r.bonferroni_significant).count(),
    );
    Ok(out)
}

fn iaa(ctx: &StageContext) -> Result<StageOutput, CliError> {
    let hc = &ctx.config.human;
    let path = hc
        .ratings
        .as_ref()
        .ok_or_else(|| CliError::Config("`human.ratings` is not set".into()))?;
    if !path.exists() {
        return Err(CliError::Config(format!("ratings file {} does not exist", path.display())));
    }
    let records = load_ratings(path)?;
    let results = Dimension::ALL
        .iter()
        .map(|d| iaa_simulation(&records, *d, hc.n_repeats, ctx.config.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = human_eval_summary(&records);

    let dir = ctx.dir(Stage::Iaa);
    fresh_dir(&dir)?;
    let kappa = dir.join("iaa.csv");
    let means = dir.join("human_summary.csv");
    write_iaa_csv(&kappa, &results)?;
    write_human_summary_csv(&means, &summary)?;
    let mut out = StageOutput {
        files: vec![kappa, means],
        ..StageOutput::default()
    };
    out.counts.insert("ratings".into(), records.len());
    out.counts.insert("repeats".into(), hc.n_repeats);
    Ok(out)
}
