//! cloudql turns natural-language questions about a cloud-resource inventory
//! into graph-pattern queries over an ontology-derived knowledge graph, and
//! renders ranked structured results with human-readable summaries.
//!
//! The pipeline is deterministic end to end: a data-driven lexicon extracts
//! intent, the intent compiles to a graph query IR, the executor matches the
//! pattern against the in-memory knowledge graph, and a latent semantic index
//! (TF-IDF + truncated SVD) resolves unknown terms and scores relevance. An
//! evaluation harness compares the pipeline against a keyword baseline.
//!
//! Start with the runnable examples (`cargo run --example ask`), or:
//!
//! ```
//! use cloudql::model::{KnowledgeGraph, RelationshipEdge, ResourceNode};
//! use cloudql::query;
//!
//! let mut graph = KnowledgeGraph::default();
//! graph.upsert_node(ResourceNode::new("web-1", "ComputeInstance", "web-1")).unwrap();
//! graph.upsert_node(ResourceNode::new("env-prod", "Environment", "Production")).unwrap();
//! graph.add_edge(RelationshipEdge::new("web-1", "DEPLOYED_IN", "env-prod")).unwrap();
//!
//! let ir = query::parse_ir_text(
//!     r#"MATCH (i:ComputeInstance)-[:DEPLOYED_IN]->(e:Environment) RETURN i.name"#,
//! ).unwrap();
//! let rows = query::execute(&graph, &ir).unwrap();
//! assert_eq!(rows.len(), 1);
//! ```

pub mod answer;
pub mod classify;
pub mod eval;
pub mod http;
pub mod ingest;
pub mod lsi;
pub mod model;
pub mod nlq;
pub mod pipeline;
pub mod query;

#[cfg(any(test, feature = "test-oracles"))]
pub mod oracle;

pub use model::{KnowledgeGraph, PropertyValue, RelationshipEdge, ResourceNode, Taxonomy};
pub use pipeline::{AppConfig, Pipeline};
