use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kappa::quadratic_weighted_kappa;
use super::ratings::{ComparisonBase, Dimension, RatingRecord};
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaSimResult {
    pub dimension: Dimension,
    pub median_kappa: f64,
    /// 2.5th and 97.5th percentiles of the per-repeat kappas.
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_repeats: usize,
    pub seed: u64,
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Ratings per item, items in sorted order. An item is identified by its
/// comparison base and id.
fn ratings_by_item(
    ratings: &[RatingRecord],
    dimension: Dimension,
) -> Result<Vec<Vec<i64>>, StatsError> {
    let mut items: BTreeMap<(ComparisonBase, &str), Vec<(&str, i64)>> = BTreeMap::new();
    for r in ratings {
        items
            .entry((r.comparison_base, &r.item_id))
            .or_default()
            .push((&r.annotator_id, r.get(dimension)));
    }
    items
        .into_iter()
        .map(|((_, id), mut rs)| {
            if rs.len() < 2 {
                return Err(StatsError::InsufficientRatings(id.to_string()));
            }
            rs.sort();
            Ok(rs.into_iter().map(|(_, v)| v).collect())
        })
        .collect()
}

/// One repeat: a random primary rating per item against the rounded mean of
/// the rest (half away from zero).
pub fn simulate_once(items: &[Vec<i64>], categories: &[i64], rng: &mut impl Rng) -> Result<f64, StatsError> {
    let mut primary = Vec::with_capacity(items.len());
    let mut secondary = Vec::with_capacity(items.len());
    for ratings in items {
        let pick = rng.random_range(0..ratings.len());
        let rest_sum: i64 = ratings.iter().sum::<i64>() - ratings[pick];
        let mean = rest_sum as f64 / (ratings.len() - 1) as f64;
        primary.push(ratings[pick]);
        secondary.push(mean.round() as i64);
    }
    quadratic_weighted_kappa(&primary, &secondary, categories)
}

/// The random stream of repeat `r` under `seed`.
pub fn repeat_rng(seed: u64, repeat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repeat as u64);
    rng
}

/// Repeated one-vs-rest agreement: median and percentile interval of the
/// per-repeat quadratic weighted kappa. Results do not depend on the number
/// of threads.
pub fn iaa_simulation(
    ratings: &[RatingRecord],
    dimension: Dimension,
    n_repeats: usize,
    seed: u64,
) -> Result<KappaSimResult, StatsError> {
    if n_repeats == 0 {
        return Err(StatsError::InsufficientData("n_repeats must be at least 1".into()));
    }
    let items = ratings_by_item(ratings, dimension)?;
    if items.is_empty() {
        return Err(StatsError::InsufficientData(format!("no ratings for {dimension}")));
    }
    let categories = dimension.categories();
    let mut kappas: Vec<f64> = (0..n_repeats)
        .into_par_iter()
        .map(|r| simulate_once(&items, &categories, &mut repeat_rng(seed, r)))
        .collect::<Result<_, _>>()?;
    kappas.sort_by(f64::total_cmp);
    Ok(KappaSimResult {
        dimension,
        median_kappa: percentile(&kappas, 0.5),
        ci_low: percentile(&kappas, 0.025),
        ci_high: percentile(&kappas, 0.975),
        n_repeats,
        seed,
    })
}

pub fn write_iaa_csv(path: &Path, results: &[KappaSimResult]) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["dimension", "median_kappa", "ci_low", "ci_high", "n_repeats", "seed"])?;
    for r in results {
        w.write_record([
            r.dimension.name().to_string(),
            format!("{:.6}", r.median_kappa),
            format!("{:.6}", r.ci_low),
            format!("{:.6}", r.ci_high),
            r.n_repeats.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
