use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonBase {
    Source,
    Translation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Simplicity,
    Added,
    Removed,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Simplicity, Dimension::Added, Dimension::Removed];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Simplicity => "simplicity",
            Dimension::Added => "added",
            Dimension::Removed => "removed",
        }
    }

    pub fn categories(self) -> Vec<i64> {
        match self {
            Dimension::Simplicity => (-2..=2).collect(),
            Dimension::Added | Dimension::Removed => (0..=5).collect(),
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One annotator's judgement of one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub item_id: String,
    pub annotator_id: String,
    pub comparison_base: ComparisonBase,
    /// −2..=2.
    pub simplicity: i64,
    /// 0..=5.
    pub added: i64,
    /// 0..=5.
    pub removed: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl RatingRecord {
    pub fn get(&self, dimension: Dimension) -> i64 {
        match dimension {
            Dimension::Simplicity => self.simplicity,
            Dimension::Added => self.added,
            Dimension::Removed => self.removed,
        }
    }
}

const REQUIRED: [&str; 6] = ["item_id", "annotator_id", "comparison_base", "simplicity", "added", "removed"];

/// Reads a ratings CSV. Besides the required columns, optional `corpus`,
/// `strategy` and `model` columns are kept for grouping. Line numbers in
/// errors count the header as line 1.
pub fn read_ratings(reader: impl Read) -> Result<Vec<RatingRecord>, StatsError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = r.headers()?.clone();
    if let Some(missing) = REQUIRED.iter().find(|h| !headers.iter().any(|x| x == **h)) {
        return Err(StatsError::FormatError {
            line: 1,
            reason: format!("missing column `{missing}`"),
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<RatingRecord>().enumerate() {
        let line = i + 2;
        let rec = row.map_err(|e| StatsError::FormatError {
            line,
            reason: e.to_string(),
        })?;
        for d in Dimension::ALL {
            let v = rec.get(d);
            if !d.categories().contains(&v) {
                return Err(StatsError::ScaleViolation {
                    line,
                    dimension: d,
                    value: v,
                });
            }
        }
        if !seen.insert((rec.comparison_base, rec.item_id.clone(), rec.annotator_id.clone())) {
            return Err(StatsError::FormatError {
                line,
                reason: format!("annotator `{}` rated item `{}` twice", rec.annotator_id, rec.item_id),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_ratings(path: &Path) -> Result<Vec<RatingRecord>, StatsError> {
    let f = std::fs::File::open(path).map_err(|e| StatsError::FormatError {
        line: 0,
        reason: format!("{}: {e}", path.display()),
    })?;
    read_ratings(f)
}

/// Mean ratings of one (corpus, comparison base, strategy) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanSummaryRow {
    pub corpus: String,
    pub comparison_base: ComparisonBase,
    pub strategy: String,
    pub n: usize,
    pub simplicity: f64,
    pub added: f64,
    pub removed: f64,
}

/// Group means; records without corpus or strategy labels group under "".
pub fn human_eval_summary(ratings: &[RatingRecord]) -> Vec<HumanSummaryRow> {
    let mut groups: BTreeMap<(String, ComparisonBase, String), Vec<&RatingRecord>> = BTreeMap::new();
    for r in ratings {
        let key = (
            r.corpus.clone().unwrap_or_default(),
            r.comparison_base,
            r.strategy.clone().unwrap_or_default(),
        );
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((corpus, comparison_base, strategy), rs)| {
            let n = rs.len();
            let mean = |d: Dimension| rs.iter().map(|r| r.get(d) as f64).sum::<f64>() / n as f64;
            HumanSummaryRow {
                corpus,
                comparison_base,
                strategy,
                n,
                simplicity: mean(Dimension::Simplicity),
                added: mean(Dimension::Added),
                removed: mean(Dimension::Removed),
            }
        })
        .collect()
}

pub fn write_human_summary_csv(path: &Path, rows: &[HumanSummaryRow]) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["corpus", "comparison_base", "strategy", "n", "simplicity", "added", "removed"])?;
    for r in rows {
        let base = match r.comparison_base {
            ComparisonBase::Source => "source",
            ComparisonBase::Translation => "translation",
        };
        w.write_record([
            r.corpus.clone(),
            base.to_string(),
            r.strategy.clone(),
            r.n.to_string(),
            format!("{:.4}", r.simplicity),
            format!("{:.4}", r.added),
            format!("{:.4}", r.removed),
        ])?;
    }
    w.flush()?;
    Ok(())
}
