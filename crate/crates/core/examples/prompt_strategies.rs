//! The five prompting strategies: rendered prompts, call counts, and cached
//! generation with a counting mock backend.
//!
//! cargo run --example prompt_strategies

use clts_eval::cli::demo::english_french_pairs;
use clts_eval::prompting::{
    build_prompts, run_matrix, GenerationConfig, MockBackend, MockMode, OutputStore, Strategy, DEFAULT_SYSTEM_PROMPT,
};
use clts_eval::Lang;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("system prompt:\n  {DEFAULT_SYSTEM_PROMPT}\n");
    for strategy in Strategy::ALL {
        println!("{} ({} call(s))", strategy.label(), strategy.calls());
        for (i, p) in build_prompts(strategy, "<source>", Lang::Fr)?.iter().enumerate() {
            println!("  step {}: {}", i + 1, p.render("<step 1 output>"));
        }
    }

    let dir = tempfile::tempdir()?;
    let pairs = english_french_pairs("demo", 3);
    let cfg = GenerationConfig {
        backoff_base_ms: 0,
        ..GenerationConfig::default()
    };
    let backend = [MockBackend::new("mock-payload", MockMode::Payload)];
    let store = OutputStore::open(dir.path())?;

    let first = run_matrix(&pairs, &Strategy::ALL, &backend, &cfg, &store)?;
    println!("\nfirst run: {} outputs, {} backend calls", first.outputs.len(), backend[0].calls());
    let before = backend[0].calls();
    let second = run_matrix(&pairs, &Strategy::ALL, &backend, &cfg, &store)?;
    println!(
        "second run: {} cache hits, {} new calls",
        second.cache_hits,
        backend[0].calls() - before
    );

    let o = first.outputs.iter().find(|o| o.strategy == Strategy::DecompTs).expect("decomposition output");
    println!("\n{} on {}:", o.strategy.label(), o.pair_id);
    for (i, x) in o.prompt_log.iter().enumerate() {
        println!("  prompt {}: {}", i + 1, x.user_prompt);
    }
    println!("  intermediate: {}", o.intermediate.as_deref().unwrap_or(""));
    println!("  final: {}", o.hypothesis);
    Ok(())
}
