//! Human ratings: per-group means, pairwise weighted kappa and the
//! random-annotator-pair agreement simulation.
//!
//! cargo run --example agreement_simulation -- [ratings.csv]

use clts_eval::stats::{
    human_eval_summary, iaa_simulation, load_ratings, quadratic_weighted_kappa, ComparisonBase, Dimension,
    RatingRecord,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three annotators who mostly agree on a latent score per item.
fn synthetic(items: usize) -> Vec<RatingRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut out = Vec::new();
    for i in 0..items {
        let latent: i64 = rng.random_range(-2..=2);
        for a in 0..3 {
            let noise: i64 = rng.random_range(-1..=1);
            out.push(RatingRecord {
                item_id: format!("item-{i:03}"),
                annotator_id: format!("ann{a}"),
                comparison_base: if i % 2 == 0 { ComparisonBase::Source } else { ComparisonBase::Translation },
                simplicity: (latent + noise).clamp(-2, 2),
                added: rng.random_range(0..=2),
                removed: (latent + 2 + noise).clamp(0, 5),
                corpus: Some("demo".into()),
                strategy: Some(["direct", "decomp-ts"][i % 2].into()),
                model: Some("mock".into()),
            });
        }
    }
    out
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ratings = match std::env::args().nth(1) {
        Some(path) => load_ratings(path.as_ref())?,
        None => synthetic(60),
    };

    println!("{:<8} {:<12} {:<12} {:>4} {:>7} {:>7} {:>7}", "corpus", "base", "strategy", "n", "simpl", "added", "removed");
    for r in human_eval_summary(&ratings) {
        println!(
            "{:<8} {:<12} {:<12} {:>4} {:>7.2} {:>7.2} {:>7.2}",
            r.corpus,
            format!("{:?}", r.comparison_base),
            r.strategy,
            r.n,
            r.simplicity,
            r.added,
            r.removed
        );
    }

    // two fixed annotators on the items both rated
    let by = |who: &str, d: Dimension| -> Vec<i64> {
        ratings.iter().filter(|r| r.annotator_id == who).map(|r| r.get(d)).collect()
    };
    let (a, b) = (by("ann0", Dimension::Simplicity), by("ann1", Dimension::Simplicity));
    if a.len() == b.len() && !a.is_empty() {
        let k = quadratic_weighted_kappa(&a, &b, &Dimension::Simplicity.categories())?;
        println!("\nann0 vs ann1 simplicity kappa {k:.3}");
    }

    println!("\n{:<12} {:>8} {:>16}", "dimension", "median", "95% interval");
    for d in Dimension::ALL {
        let sim = iaa_simulation(&ratings, d, 1000, 42)?;
        println!("{:<12} {:>8.3} [{:>6.3}, {:>6.3}]", d.name(), sim.median_kappa, sim.ci_low, sim.ci_high);
    }
    Ok(())
}
