//! Generate a seeded synthetic inventory with planted gold answers, then
//! compare the ontology pipeline against the keyword baseline.
//!
//! ```text
//! cargo run -p cloudql --example evaluate
//! ```

use cloudql::eval::generate::{generate_corpus, GeneratorParams, DEFAULT_REFERENCE_NOW};
use cloudql::eval::{parse_gold, render_report, run_comparison, RealClock};
use cloudql::pipeline::{AppConfig, Pipeline};

fn main() -> anyhow::Result<()> {
    let params = GeneratorParams::default(); // seed 42
    let (corpus, gold_text) = generate_corpus(&params);
    let gold = parse_gold(&gold_text)?;
    println!(
        "generated {} documents and {} gold queries (seed {})",
        corpus.lines().count(),
        gold.len(),
        params.seed
    );

    let config = AppConfig {
        now: Some(DEFAULT_REFERENCE_NOW),
        ..AppConfig::default()
    };
    let mut pipeline = Pipeline::new(config)?;
    pipeline.ingest_corpus_str(&corpus);
    pipeline.build_index()?;

    let report = run_comparison(&pipeline, &gold, &RealClock::default())?;
    print!("{}", render_report(&report));
    Ok(())
}
