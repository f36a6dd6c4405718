//! Welch's t-test, alone and across all strategy pairs with a Bonferroni
//! correction.
//!
//! cargo run --example significance_tests

use clts_eval::prompting::Strategy;
use clts_eval::stats::{compare_strategies, welch_t_test, Observation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = [31.2, 28.4, 35.0, 30.1, 29.7, 33.3];
    let b = [36.5, 34.2, 39.8, 35.1, 37.0, 38.4];
    let w = welch_t_test(&a, &b)?;
    println!("t = {:.3}, df = {:.2}, p = {:.5}\n", w.t, w.df, w.p);

    // per-item SARI for each strategy; two strategies are shifted upwards
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut observations = Vec::new();
    for (k, s) in Strategy::ALL.into_iter().enumerate() {
        let shift = if k >= 3 { 6.0 } else { 0.0 };
        for _ in 0..40 {
            observations.push(Observation {
                corpus: "demo".into(),
                model: "mock".into(),
                strategy: s,
                metric: "sari".into(),
                value: 35.0 + shift + rng.random_range(-8.0..8.0),
            });
        }
    }
    let results = compare_strategies(&observations, 0.05)?;
    println!("{:<14} {:<14} {:>8} {:>9}  marks", "a", "b", "t", "p");
    for r in &results {
        let mark = match (r.significant, r.bonferroni_significant) {
            (_, true) => "**",
            (true, false) => "*",
            _ => "",
        };
        println!("{:<14} {:<14} {:>8.3} {:>9.2e}  {mark}", r.group_a.label(), r.group_b.label(), r.t_stat, r.p_value);
    }
    Ok(())
}
