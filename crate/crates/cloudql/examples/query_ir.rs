//! Work with the graph query IR directly: parse the textual grammar,
//! print it back canonically, execute it, and cross-check the executor
//! against the brute-force reference.
//!
//! ```text
//! cargo run -p cloudql --example query_ir
//! ```

use cloudql::ingest::load_corpus;
use cloudql::model::Taxonomy;
use cloudql::query::{brute_force_execute, execute, parse_ir_text, print_ir};

fn main() -> anyhow::Result<()> {
    let fixture = format!("{}/fixtures/golden.jsonl", env!("CARGO_MANIFEST_DIR"));
    let (graph, _) = load_corpus(&fixture, Taxonomy::default(), None)?;

    let ir = parse_ir_text(
        r#"
        MATCH (ci:ComputeInstance)-[:DEPLOYED_IN]->(:Environment {name:"Production"})
        MATCH (ci)-[:HAS_VULNERABILITY]->(v:Vulnerability)
        RETURN ci.name, v.description
        "#,
    )?;

    println!("canonical form:\n{}\n", print_ir(&ir));

    let rows = execute(&graph, &ir)?;
    for binding in &rows {
        println!("binding: {binding}");
    }

    let reference = brute_force_execute(&graph, &ir)?;
    println!("\nbrute force agrees: {}", rows == reference);

    // The grammar supports predicates, ordering, and limits too.
    let top =
        parse_ir_text("MATCH (n) WHERE EXISTS(n.cost) RETURN n.name ORDER BY n.cost DESC LIMIT 3")?;
    println!("\nthree most expensive resources:");
    for binding in execute(&graph, &top)? {
        let id = binding.get("n").unwrap();
        let cost = graph.node(id).and_then(|n| n.lookup("cost")).unwrap();
        println!("  {id}: {}", cost.render());
    }
    Ok(())
}
