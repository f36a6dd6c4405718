//! Runs every stage of the pipeline on a small synthetic project with the
//! offline mock providers and prints the resulting report.
//!
//! ```text
//! cargo run --example mock_pipeline -- [dir]
//! ```

use clts_eval::cli::demo::write_demo_project;
use clts_eval::cli::{context, run_stage, CommonArgs, Stage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("clts-mock-pipeline"));
    let config = write_demo_project(&dir.join("project"), 20, 200)?;
    let args = CommonArgs {
        config,
        out: Some(dir.join("run")),
        resume: false,
        seed: None,
    };
    let ctx = context(&args)?;
    for stage in Stage::ALL {
        let record = run_stage(stage, &ctx)?;
        println!("{:<10} {:?}", stage.name(), record.counts);
    }
    let report = std::fs::read_to_string(ctx.dir(Stage::Report).join("report.md"))?;
    println!("\n{report}");
    Ok(())
}
