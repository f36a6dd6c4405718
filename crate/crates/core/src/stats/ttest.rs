use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided;
use super::StatsError;
use crate::prompting::Strategy;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Welch's unequal-variance t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    /// Both samples have zero variance: `p` is 1 if their means agree, else 0.
    pub degenerate: bool,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, ss / (n - 1.0))
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::InsufficientData(format!(
            "need at least 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let equal = ma == mb;
        return Ok(WelchTest {
            t: if equal { 0.0 } else { (ma - mb).signum() * f64::INFINITY },
            df: na + nb - 2.0,
            p: if equal { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchTest {
        t,
        df,
        p: student_t_two_sided(t, df),
        degenerate: false,
    })
}

/// One labelled value of a metric or feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub corpus: String,
    pub model: String,
    pub strategy: Strategy,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub corpus: String,
    pub model: String,
    pub metric_name: String,
    pub group_a: Strategy,
    pub group_b: Strategy,
    pub t_stat: f64,
    pub df: f64,
    pub p_value: f64,
    /// `p_value < alpha`, uncorrected.
    pub significant: bool,
    /// `p_value < alpha / m`, with `m` the number of tests in the cell.
    pub bonferroni_significant: bool,
    pub degenerate: bool,
}

/// All pairwise strategy tests within each (corpus, model, metric) cell.
/// Results are ordered by cell, then by strategy pair in canonical order.
pub fn compare_strategies(observations: &[Observation], alpha: f64) -> Result<Vec<TestResult>, StatsError> {
    let mut cells: BTreeMap<(&str, &str, &str), BTreeMap<Strategy, Vec<f64>>> = BTreeMap::new();
    for o in observations {
        cells
            .entry((&o.corpus, &o.model, &o.metric))
            .or_default()
            .entry(o.strategy)
            .or_default()
            .push(o.value);
    }
    let mut out = Vec::new();
    for ((corpus, model, metric), groups) in cells {
        let strategies: Vec<&Strategy> = groups.keys().collect();
        let m = strategies.len() * strategies.len().saturating_sub(1) / 2;
        for (i, a) in strategies.iter().enumerate() {
            for b in &strategies[i + 1..] {
                let w = welch_t_test(&groups[*a], &groups[*b]).map_err(|e| {
                    StatsError::InsufficientData(format!("{corpus}/{model}/{metric} {a} vs {b}: {e}"))
                })?;
                out.push(TestResult {
                    corpus: corpus.to_string(),
                    model: model.to_string(),
                    metric_name: metric.to_string(),
                    group_a: **a,
                    group_b: **b,
                    t_stat: w.t,
                    df: w.df,
                    p_value: w.p,
                    significant: w.p < alpha,
                    bonferroni_significant: w.p < alpha / m as f64,
                    degenerate: w.degenerate,
                });
            }
        }
    }
    Ok(out)
}

pub fn write_significance_csv(path: &Path, results: &[TestResult]) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "corpus",
        "model",
        "metric",
        "strategy_a",
        "strategy_b",
        "t",
        "df",
        "p",
        "significant",
        "bonferroni_significant",
    ])?;
    for r in results {
        w.write_record([
            r.corpus.clone(),
            r.model.clone(),
            r.metric_name.clone(),
            r.group_a.name().to_string(),
            r.group_b.name().to_string(),
            format!("{:.6}", r.t_stat),
            format!("{:.4}", r.df),
            format!("{:.6e}", r.p_value),
            r.significant.to_string(),
            r.bonferroni_significant.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
