//! Ask natural-language questions end to end: intent extraction,
//! compilation to a graph pattern, execution, ranking, and rendering.
//!
//! ```text
//! cargo run -p cloudql --example ask
//! ```

use cloudql::answer::render_text;
use cloudql::pipeline::{AppConfig, Pipeline};
use cloudql::query::print_ir;
use std::path::PathBuf;

fn main() -> anyhow::Result<()> {
    let fixture = PathBuf::from(format!(
        "{}/fixtures/golden.jsonl",
        env!("CARGO_MANIFEST_DIR")
    ));
    let config = AppConfig {
        corpus: Some(fixture),
        // Pin the clock so "last two weeks" means the same thing every run.
        now: Some(1_754_700_000),
        ..AppConfig::default()
    };
    let pipeline = Pipeline::new(config)?;

    let questions = [
        "List all compute instances in the production environment that have security vulnerabilities.",
        "list the NLB that fronts the CRM service in my production tenancy",
        "List all compute instances created in the last two weeks by user alice",
        "What are the top 10 expensive resources in my cloud environment?",
        "vms in the staging environment with vulnerabilities", // relaxation kicks in
    ];

    for question in questions {
        println!("==> {question}");
        let asked = pipeline.ask(question)?;
        if let Some(compiled) = &asked.compiled {
            println!("    [{}]", print_ir(&compiled.ir).replace('\n', " "));
        }
        print!("{}", render_text(&asked.answer));
        println!();
    }
    Ok(())
}
