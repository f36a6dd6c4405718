//! The `report` stage: Markdown tables assembled from the CSV artifacts of
//! earlier stages. Output is deterministic for identical inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::manifest::Manifest;
use super::stages::{Stage, StageContext, StageOutput};
use super::CliError;
use crate::features::{read_features_csv, FeatureRow, FeatureVector};
use crate::metrics::MetricAggregate;
use crate::prompting::Strategy;

/// A row of `significance.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub corpus: String,
    pub model: String,
    pub metric: String,
    pub strategy_a: Strategy,
    pub strategy_b: Strategy,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub significant: bool,
    pub bonferroni_significant: bool,
}

/// A row of `iaa.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub dimension: String,
    pub median_kappa: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_repeats: usize,
    pub seed: u64,
}

/// A row of `human_summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanRow {
    pub corpus: String,
    pub comparison_base: String,
    pub strategy: String,
    pub n: usize,
    pub simplicity: f64,
    pub added: f64,
    pub removed: f64,
}

/// Mean feature values of one (corpus, model, strategy) group.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMeans {
    pub corpus: String,
    pub model: String,
    pub strategy: String,
    pub n: usize,
    pub means: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportInputs {
    pub metrics: Vec<MetricAggregate>,
    pub significance: Vec<SignificanceRow>,
    pub features: Option<Vec<FeatureMeans>>,
    pub human: Option<(Vec<HumanRow>, Vec<AgreementRow>)>,
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let err = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(err)
}

/// Groups feature rows and averages every feature. Group order follows the
/// labels; strategies in canonical order where they parse.
pub fn feature_means(rows: &[FeatureRow]) -> Vec<FeatureMeans> {
    let order = |s: &str| s.parse::<Strategy>().map(|s| s as usize).unwrap_or(usize::MAX);
    let mut groups: BTreeMap<(String, String, usize, String), Vec<&FeatureRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.corpus.clone(), r.model.clone(), order(&r.strategy), r.strategy.clone()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((corpus, model, _, strategy), rows)| {
            let n = rows.len();
            let mut means = vec![0.0; FeatureVector::NAMES.len()];
            for r in &rows {
                for (m, v) in means.iter_mut().zip(r.features.values()) {
                    *m += v;
                }
            }
            means.iter_mut().for_each(|m| *m /= n as f64);
            FeatureMeans {
                corpus,
                model,
                strategy,
                n,
                means,
            }
        })
        .collect()
}

fn write_feature_means_csv(path: &Path, means: &[FeatureMeans]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Data(e.to_string()))?;
    let header = ["corpus", "model", "strategy", "n"].into_iter().chain(FeatureVector::NAMES.iter().copied());
    w.write_record(header).map_err(|e| CliError::Data(e.to_string()))?;
    for m in means {
        let row = [m.corpus.clone(), m.model.clone(), m.strategy.clone(), m.n.to_string()]
            .into_iter()
            .chain(m.means.iter().map(|v| format!("{v:.4}")));
        w.write_record(row).map_err(|e| CliError::Data(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Marks the entries equal to the column maximum at display precision.
/// Every tied entry is marked; missing values never are.
pub fn best_marks(cells: &[Option<String>], values: &[Option<f64>]) -> Vec<bool> {
    let best = values
        .iter()
        .zip(cells)
        .filter_map(|(v, c)| v.zip(c.as_ref()))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.clone());
    cells.iter().map(|c| c.is_some() && *c == best).collect()
}

fn fmt_opt(v: Option<f64>, digits: usize) -> Option<String> {
    v.map(|x| format!("{x:.digits$}"))
}

fn p_cell(p: f64, significant: bool, bonferroni: bool) -> String {
    let mark = if bonferroni {
        "**"
    } else if significant {
        "*"
    } else {
        ""
    };
    if p < 0.001 {
        format!("<0.001{mark}")
    } else {
        format!("{p:.3}{mark}")
    }
}

fn strategy_label(name: &str) -> String {
    name.parse::<Strategy>().map(|s| s.label().to_string()).unwrap_or_else(|_| name.to_string())
}

/// Reads one metric column of an aggregate row.
type Getter = fn(&MetricAggregate) -> Option<f64>;

fn metric_tables(md: &mut String, metrics: &[MetricAggregate]) {
    md.push_str("## Automatic evaluation\n\n");
    if metrics.is_empty() {
        md.push_str("No scored outputs.\n\n");
        return;
    }
    let mut blocks: BTreeMap<(&str, &str), Vec<&MetricAggregate>> = BTreeMap::new();
    for m in metrics {
        blocks.entry((&m.corpus, &m.model)).or_default().push(m);
    }
    for ((corpus, model), mut rows) in blocks {
        rows.sort_by_key(|r| r.strategy);
        let _ = writeln!(md, "### {corpus} / {model}\n");
        md.push_str("| Strategy | n | BLEU | SARI | Semantic F1 |\n|---|---:|---:|---:|---:|\n");
        let columns: [(Getter, usize); 3] =
            [(|r| r.bleu, 2), (|r| r.sari, 2), (|r| r.semantic_f1, 3)];
        let cells: Vec<Vec<String>> = columns
            .iter()
            .map(|(get, digits)| {
                let values: Vec<Option<f64>> = rows.iter().map(|r| get(r)).collect();
                let text: Vec<Option<String>> = values.iter().map(|v| fmt_opt(*v, *digits)).collect();
                let marks = best_marks(&text, &values);
                text.into_iter()
                    .zip(marks)
                    .map(|(t, bold)| match t {
                        Some(t) if bold => format!("**{t}**"),
                        Some(t) => t,
                        None => "n/a".to_string(),
                    })
                    .collect()
            })
            .collect();
        for (i, r) in rows.iter().enumerate() {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} |",
                r.strategy.label(),
                r.n_items,
                cells[0][i],
                cells[1][i],
                cells[2][i]
            );
        }
        md.push('\n');
    }
    md.push_str("Best value per column in bold; ties are all bold. BLEU is corpus-level, SARI and semantic F1 are item means.\n\n");
}

fn human_tables(md: &mut String, human: &Option<(Vec<HumanRow>, Vec<AgreementRow>)>) {
    md.push_str("## Human evaluation\n\n");
    let Some((means, agreement)) = human else {
        md.push_str("Not available: the `iaa` stage has not been run.\n\n");
        return;
    };
    md.push_str("| Corpus | Compared with | Strategy | n | Simplicity | Added | Removed |\n");
    md.push_str("|---|---|---|---:|---:|---:|---:|\n");
    for r in means {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {:.2} | {:.2} | {:.2} |",
            r.corpus,
            r.comparison_base,
            strategy_label(&r.strategy),
            r.n,
            r.simplicity,
            r.added,
            r.removed
        );
    }
    md.push_str("\n### Agreement\n\n| Dimension | Median κ | 95% interval | Repeats | Seed |\n|---|---:|---|---:|---:|\n");
    for a in agreement {
        let _ = writeln!(
            md,
            "| {} | {:.3} | [{:.3}, {:.3}] | {} | {} |",
            a.dimension, a.median_kappa, a.ci_low, a.ci_high, a.n_repeats, a.seed
        );
    }
    md.push('\n');
}

fn feature_tables(md: &mut String, features: &Option<Vec<FeatureMeans>>) {
    md.push_str("## Linguistic features\n\n");
    let Some(features) = features else {
        md.push_str("Not available: the `features` stage has not been run.\n\n");
        return;
    };
    let mut blocks: BTreeMap<(&str, &str), Vec<&FeatureMeans>> = BTreeMap::new();
    for f in features {
        blocks.entry((&f.corpus, &f.model)).or_default().push(f);
    }
    for ((corpus, model), groups) in blocks {
        let _ = writeln!(md, "### {corpus} / {model}\n");
        md.push_str("| Feature |");
        for g in &groups {
            let _ = write!(md, " {} |", strategy_label(&g.strategy));
        }
        md.push_str("\n|---|");
        md.push_str(&"---:|".repeat(groups.len()));
        md.push('\n');
        for (i, name) in FeatureVector::NAMES.iter().enumerate() {
            let _ = write!(md, "| {name} |");
            for g in &groups {
                let _ = write!(md, " {:.3} |", g.means[i]);
            }
            md.push('\n');
        }
        md.push_str("| documents |");
        for g in &groups {
            let _ = write!(md, " {} |", g.n);
        }
        md.push_str("\n\n");
    }
}

const CORE_METRICS: [(&str, &str); 3] = [("bleu", "BLEU"), ("sari", "SARI"), ("semantic", "Semantic F1")];

fn significance_tables(md: &mut String, rows: &[SignificanceRow]) {
    md.push_str("## Significance\n\n");
    if rows.is_empty() {
        md.push_str("No tests were run.\n\n");
        return;
    }
    let mut blocks: BTreeMap<(&str, &str), Vec<&SignificanceRow>> = BTreeMap::new();
    for r in rows {
        blocks.entry((&r.corpus, &r.model)).or_default().push(r);
    }
    for ((corpus, model), rows) in blocks {
        let _ = writeln!(md, "### {corpus} / {model}\n");
        let mut pairs: BTreeMap<(Strategy, Strategy), BTreeMap<&str, &SignificanceRow>> = BTreeMap::new();
        for r in &rows {
            pairs.entry((r.strategy_a, r.strategy_b)).or_default().insert(&r.metric, r);
        }
        md.push_str("| Pair |");
        for (_, label) in CORE_METRICS {
            let _ = write!(md, " {label} p |");
        }
        md.push_str(" Features (Bonferroni) |\n|---|---:|---:|---:|---:|\n");
        for ((a, b), by_metric) in &pairs {
            let _ = write!(md, "| {} vs {} |", a.label(), b.label());
            for (metric, _) in CORE_METRICS {
                match by_metric.get(metric) {
                    Some(r) => {
                        let _ = write!(md, " {} |", p_cell(r.p, r.significant, r.bonferroni_significant));
                    }
                    None => md.push_str(" n/a |"),
                }
            }
            let feature_tests: Vec<&&SignificanceRow> = by_metric
                .iter()
                .filter(|(m, _)| !CORE_METRICS.iter().any(|(c, _)| c == *m))
                .map(|(_, r)| r)
                .collect();
            let hits = feature_tests.iter().filter(|r| r.bonferroni_significant).count();
            let _ = writeln!(md, " {hits}/{} |", feature_tests.len());
        }
        md.push('\n');
    }
    md.push_str("`*` p < α; `**` also significant after Bonferroni correction. The feature column counts features whose difference survives the correction.\n\n");
}

const NOTES: &str = "## Notes\n\n\
- SARI compares each output with the source sentence rendered in the target language, since the original source is in the other language.\n\
- Flesch reading ease uses language-specific constants. The Flesch-Kincaid grade uses the English formula for both languages.\n\
- Entity features count mentions from BIO named-entity tags. Unique entities are distinct case-folded surface forms; entity distances are measured in tokens across the whole document.\n\
- The agreement interval holds the 2.5th and 97.5th percentiles of κ over the simulation repeats. It is not a bootstrap confidence interval.\n\
- Welch's t-test compares every pair of strategies within a (corpus, model, metric) cell. The Bonferroni divisor is the number of pairs tested in that cell.\n";

/// Renders the full Markdown report.
pub fn render(inputs: &ReportInputs) -> String {
    let mut md = String::from("# Evaluation report\n\n");
    metric_tables(&mut md, &inputs.metrics);
    human_tables(&mut md, &inputs.human);
    feature_tables(&mut md, &inputs.features);
    significance_tables(&mut md, &inputs.significance);
    md.push_str(NOTES);
    md
}

pub(crate) fn build(ctx: &StageContext, manifest: &Manifest) -> Result<StageOutput, CliError> {
    manifest.require(Stage::Metrics.name())?;
    manifest.require(Stage::Stats.name())?;
    let metrics_csv = ctx.dir(Stage::Metrics).join("metrics.csv");
    let significance_csv = ctx.dir(Stage::Stats).join("significance.csv");
    let mut inputs = ReportInputs {
        metrics: read_csv(&metrics_csv)?,
        significance: read_csv(&significance_csv)?,
        ..Default::default()
    };
    if manifest.stages.contains_key(Stage::Features.name()) {
        let rows = read_features_csv(&ctx.dir(Stage::Features).join("features.csv"))?;
        inputs.features = Some(feature_means(&rows));
    }
    let iaa_dir = ctx.dir(Stage::Iaa);
    if manifest.stages.contains_key(Stage::Iaa.name()) {
        inputs.human = Some((
            read_csv(&iaa_dir.join("human_summary.csv"))?,
            read_csv(&iaa_dir.join("iaa.csv"))?,
        ));
    }

    let dir = ctx.dir(Stage::Report);
    if dir.exists() {
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    let mut files: Vec<PathBuf> = Vec::new();
    let md = dir.join("report.md");
    fs::write(&md, render(&inputs))?;
    files.push(md);
    for src in [&metrics_csv, &significance_csv] {
        let dst = dir.join(src.file_name().expect("file name"));
        fs::copy(src, &dst)?;
        files.push(dst);
    }
    if let Some(means) = &inputs.features {
        let path = dir.join("features_summary.csv");
        write_feature_means_csv(&path, means)?;
        files.push(path);
    }
    if inputs.human.is_some() {
        for name in ["human_summary.csv", "iaa.csv"] {
            let dst = dir.join(name);
            fs::copy(iaa_dir.join(name), &dst)?;
            files.push(dst);
        }
    }
    let mut out = StageOutput::default();
    out.counts.insert("tables".into(), files.len());
    out.files = files;
    Ok(out)
}
