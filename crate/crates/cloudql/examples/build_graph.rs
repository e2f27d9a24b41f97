//! Build a knowledge graph by hand: nodes, typed edges, label-index
//! lookups, integrity validation, and cascade removal.
//!
//! ```text
//! cargo run -p cloudql --example build_graph
//! ```

use cloudql::model::{KnowledgeGraph, PropertyValue, RelationshipEdge, ResourceNode};

fn main() -> anyhow::Result<()> {
    let mut graph = KnowledgeGraph::default();

    graph.upsert_node(
        ResourceNode::new("web-1", "ComputeInstance", "web-1")
            .with_property("cost", PropertyValue::Number(42.5))
            .with_property("state", PropertyValue::Text("running".into()))
            .with_description("front-end web server"),
    )?;
    graph.upsert_node(ResourceNode::new("env-prod", "Environment", "Production"))?;
    graph.upsert_node(ResourceNode::new(
        "vuln-1",
        "Vulnerability",
        "Open SSH Port",
    ))?;

    graph.add_edge(RelationshipEdge::new("web-1", "DEPLOYED_IN", "env-prod"))?;
    graph.add_edge(RelationshipEdge::new(
        "web-1",
        "HAS_VULNERABILITY",
        "vuln-1",
    ))?;

    println!(
        "graph: {} nodes, {} edges, version {}",
        graph.node_count(),
        graph.edge_count(),
        graph.version()
    );
    println!(
        "compute instances: {:?}",
        graph.nodes_with_kind("ComputeInstance").collect::<Vec<_>>()
    );
    println!("web-1 out-edges: {:?}", graph.out_neighbors("web-1"));
    println!("violations: {:?}", graph.validate());

    // Removal cascades: both incident edges disappear with the node.
    graph.remove_node("web-1");
    println!(
        "after removal: {} nodes, {} edges, violations: {:?}",
        graph.node_count(),
        graph.edge_count(),
        graph.validate()
    );
    Ok(())
}
