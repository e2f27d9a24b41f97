//! The latent semantic index on its own: TF-IDF matrix, truncated SVD,
//! query folding, top-k similarity, and term resolution for words the
//! lexicon has never seen.
//!
//! ```text
//! cargo run -p cloudql --example semantic_search
//! ```

use cloudql::lsi::{build_matrix, embed_query, top_k_similar, truncated_svd};
use cloudql::model::Taxonomy;
use cloudql::nlq::{resolve_term, Lexicon, Resolution};
use cloudql::{KnowledgeGraph, ResourceNode};

fn main() -> anyhow::Result<()> {
    let mut graph = KnowledgeGraph::default();
    let docs = [
        (
            "web-1",
            "ComputeInstance",
            "virtual machine running the storefront web tier",
        ),
        (
            "web-2",
            "ComputeInstance",
            "virtual machine running background workers",
        ),
        (
            "db-1",
            "Database",
            "postgres database holding orders and payments",
        ),
        (
            "bkt-1",
            "StorageBucket",
            "object storage bucket with nightly backups",
        ),
        (
            "pol-1",
            "CompliancePolicy",
            "payment card industry data security standard",
        ),
    ];
    for (id, kind, description) in docs {
        graph.upsert_node(ResourceNode::new(id, kind, id).with_description(description))?;
    }

    let matrix = build_matrix(&graph);
    println!(
        "matrix: {} terms x {} docs, {} nonzeros",
        matrix.n_terms(),
        matrix.n_docs(),
        matrix.nnz()
    );

    let model = truncated_svd(&matrix, 4, 1e-9, 500)?;
    println!("singular values: {:?}\n", model.singular_values);

    for query in ["payments database", "virtual machine", "backup storage"] {
        let terms: Vec<String> = query.split_whitespace().map(str::to_owned).collect();
        let latent = embed_query(&model, &matrix, &terms);
        println!("top matches for {query:?}:");
        for (doc, score) in top_k_similar(&model, &matrix, &latent, 3) {
            println!("  {doc:<8} cosine {score:.3}");
        }
    }

    // A word outside the lexicon resolves through the index to a node kind.
    let lexicon = Lexicon::builtin(&Taxonomy::default(), None);
    for term in ["postgres", "zzqx"] {
        match resolve_term(term, &lexicon, &graph, Some(&model), Some(&matrix)) {
            Resolution::Kind { kind, score } => {
                println!("\n{term:?} resolves to {kind} ({score:.2})")
            }
            Resolution::RelType { rel_type, .. } => println!("\n{term:?} resolves to {rel_type}"),
            Resolution::Unresolved => println!("\n{term:?} stays unresolved"),
        }
    }
    Ok(())
}
