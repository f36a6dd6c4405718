//! Significance tests, human-rating ingestion and inter-annotator agreement.

mod iaa;
mod kappa;
mod ratings;
mod special;
mod ttest;

pub use iaa::{iaa_simulation, percentile, repeat_rng, simulate_once, write_iaa_csv, KappaSimResult};
pub use kappa::quadratic_weighted_kappa;
pub use ratings::{
    human_eval_summary, load_ratings, read_ratings, write_human_summary_csv, ComparisonBase, Dimension,
    HumanSummaryRow, RatingRecord,
};
pub use special::{ln_gamma, reg_inc_beta, student_t_two_sided};
pub use ttest::{
    compare_strategies, welch_t_test, write_significance_csv, Observation, TestResult, WelchTest, DEFAULT_ALPHA,
};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("rating vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("rating {0} is not one of the categories")]
    OutOfRangeCategory(i64),
    #[error("item `{0}` has fewer than two ratings")]
    InsufficientRatings(String),
    #[error("ratings line {line}: {reason}")]
    FormatError { line: usize, reason: String },
    #[error("ratings line {line}: {dimension} value {value} is outside its scale")]
    ScaleViolation {
        line: usize,
        dimension: Dimension,
        value: i64,
    },
    #[error("writing report: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
}
