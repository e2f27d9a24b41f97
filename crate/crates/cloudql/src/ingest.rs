//! Corpus-file and change-event ingestion into the knowledge graph.
//!
//! A corpus is UTF-8 JSON lines, one resource document per line. Loading is
//! two-pass (nodes, then relationships) so forward references resolve;
//! malformed lines and unresolved edges are reported and skipped rather
//! than aborting the load. A change-event stream applies ordered mutations
//! to an existing graph and reproduces exactly the graph a batch load of
//! the same data would build.

use crate::classify::{classify_service, CategoryLexicon};
use crate::model::{
    KnowledgeGraph, ModelError, PropertyValue, RelationshipEdge, ResourceNode, Taxonomy,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

/// One corpus line: a self-describing resource document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceDocument {
    pub id: String,
    pub kind: String,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub properties: BTreeMap<String, PropertyValue>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub relationships: Vec<DocumentRelationship>,
    #[serde(default)]
    pub api_endpoints: Vec<String>,
    #[serde(default)]
    pub created_at: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRelationship {
    pub rel: String,
    pub dst: String,
}

impl ResourceDocument {
    /// The node this document describes. API endpoints fold into the
    /// `api_endpoints` property so they are visible to indexing and
    /// queries; a service document additionally gets a `category` property
    /// from the classifier unless the corpus set one explicitly.
    pub fn to_node(&self, categories: Option<&CategoryLexicon>) -> ResourceNode {
        let mut node = ResourceNode {
            id: self.id.clone(),
            kind: self.kind.clone(),
            name: if self.name.is_empty() {
                self.id.clone()
            } else {
                self.name.clone()
            },
            properties: self.properties.clone(),
            description: self.description.clone(),
            created_at: self.created_at,
        };
        if !self.api_endpoints.is_empty() {
            node.properties
                .entry("api_endpoints".into())
                .or_insert_with(|| PropertyValue::Text(self.api_endpoints.join(" ")));
        }
        if self.kind == "Service" && !node.properties.contains_key("category") {
            if let Some(lexicon) = categories {
                let category = classify_service(self, lexicon);
                if category.label != "unknown" {
                    node.properties
                        .insert("category".into(), PropertyValue::Text(category.label));
                }
            }
        }
        node
    }
}

/// Why a corpus line or relationship was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Skip {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for Skip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Load/apply outcome counts plus per-line diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub nodes_loaded: usize,
    pub edges_added: usize,
    pub skipped: Vec<Skip>,
    pub noops: Vec<String>,
}

impl IngestReport {
    pub fn summary(&self) -> String {
        format!(
            "{} nodes, {} edges, {} skipped",
            self.nodes_loaded,
            self.edges_added,
            self.skipped.len()
        )
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("event {seq} arrived after {prev}: stream is out of order")]
    OutOfOrder { prev: u64, seq: u64 },
    #[error("malformed event at line {line}: {reason}")]
    MalformedEvent { line: usize, reason: String },
}

/// Loads a JSONL corpus into a fresh graph. Two passes: every well-formed
/// document becomes a node, then relationships are added; edges whose
/// target never materialized are reported and dropped.
pub fn load_corpus(
    path: impl AsRef<Path>,
    taxonomy: Taxonomy,
    categories: Option<&CategoryLexicon>,
) -> Result<(KnowledgeGraph, IngestReport), IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(load_corpus_str(&text, taxonomy, categories))
}

/// In-memory variant of [`load_corpus`].
pub fn load_corpus_str(
    text: &str,
    taxonomy: Taxonomy,
    categories: Option<&CategoryLexicon>,
) -> (KnowledgeGraph, IngestReport) {
    let mut graph = KnowledgeGraph::new(taxonomy);
    let report = load_corpus_into(&mut graph, text, categories);
    (graph, report)
}

/// Applies a corpus to an existing graph: the same two-pass load, but
/// relationships may also target nodes that were already present.
pub fn load_corpus_into(
    graph: &mut KnowledgeGraph,
    text: &str,
    categories: Option<&CategoryLexicon>,
) -> IngestReport {
    let mut report = IngestReport::default();
    let mut docs: Vec<(usize, ResourceDocument)> = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match serde_json::from_str::<ResourceDocument>(trimmed) {
            Ok(doc) => docs.push((line_no, doc)),
            Err(e) => report.skipped.push(Skip {
                line: line_no,
                reason: e.to_string(),
            }),
        }
    }

    for (line_no, doc) in &docs {
        match graph.upsert_node(doc.to_node(categories)) {
            Ok(_) => report.nodes_loaded += 1,
            Err(e) => report.skipped.push(Skip {
                line: *line_no,
                reason: e.to_string(),
            }),
        }
    }
    for (line_no, doc) in &docs {
        if !graph.contains_node(&doc.id) {
            continue; // the node itself was skipped
        }
        for rel in &doc.relationships {
            let edge = RelationshipEdge::new(&doc.id, &rel.rel, &rel.dst);
            match graph.add_edge(edge) {
                Ok(_) => report.edges_added += 1,
                Err(e @ (ModelError::DanglingEndpoint(_) | ModelError::InvalidEdge(_))) => {
                    report.skipped.push(Skip {
                        line: *line_no,
                        reason: format!("relationship to {:?} dropped: {e}", rel.dst),
                    });
                }
                Err(e) => report.skipped.push(Skip {
                    line: *line_no,
                    reason: e.to_string(),
                }),
            }
        }
    }

    debug_assert!(graph.validate().is_empty());
    report
}

/// Writes the graph back out as a normalized corpus: one document per node
/// in id order, relationships inlined on their source node.
pub fn write_snapshot(graph: &KnowledgeGraph, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let path = path.as_ref();
    let to_io = |source| IngestError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::File::create(path).map_err(to_io)?;
    for node in graph.nodes() {
        let relationships: Vec<DocumentRelationship> = graph
            .out_neighbors(&node.id)
            .iter()
            .map(|(rel, dst)| DocumentRelationship {
                rel: rel.clone(),
                dst: dst.clone(),
            })
            .collect();
        let doc = ResourceDocument {
            id: node.id.clone(),
            kind: node.kind.clone(),
            name: node.name.clone(),
            properties: node.properties.clone(),
            description: node.description.clone(),
            relationships,
            api_endpoints: Vec::new(),
            created_at: node.created_at,
        };
        let json = serde_json::to_string(&doc).expect("document serializes");
        writeln!(file, "{json}").map_err(to_io)?;
    }
    Ok(())
}

/// One entry of a change-event stream. `seq` must strictly increase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ChangeOp {
    UpsertNode {
        node: ResourceDocument,
    },
    RemoveNode {
        id: String,
    },
    SetProperty {
        id: String,
        key: String,
        value: PropertyValue,
    },
    AddEdge {
        src: String,
        rel: String,
        dst: String,
        #[serde(default)]
        properties: BTreeMap<String, PropertyValue>,
    },
    RemoveEdge {
        src: String,
        rel: String,
        dst: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeEvent {
    pub seq: u64,
    #[serde(flatten)]
    pub op: ChangeOp,
}

/// Applies an ordered event stream to the graph. Removals of absent
/// entities are recorded no-ops; additions against missing endpoints are
/// reported and skipped; a non-increasing `seq` aborts with `OutOfOrder`.
pub fn apply_events(
    graph: &mut KnowledgeGraph,
    events: impl IntoIterator<Item = ChangeEvent>,
    categories: Option<&CategoryLexicon>,
) -> Result<(u64, IngestReport), IngestError> {
    let mut report = IngestReport::default();
    let mut prev_seq: Option<u64> = None;

    for event in events {
        if let Some(prev) = prev_seq {
            if event.seq <= prev {
                return Err(IngestError::OutOfOrder {
                    prev,
                    seq: event.seq,
                });
            }
        }
        prev_seq = Some(event.seq);
        let seq = event.seq;

        match event.op {
            ChangeOp::UpsertNode { node } => match graph.upsert_node(node.to_node(categories)) {
                Ok(_) => report.nodes_loaded += 1,
                Err(e) => report.skipped.push(Skip {
                    line: seq as usize,
                    reason: e.to_string(),
                }),
            },
            ChangeOp::RemoveNode { id } => {
                if graph.contains_node(&id) {
                    graph.remove_node(&id);
                } else {
                    report
                        .noops
                        .push(format!("event {seq}: remove of absent node {id:?}"));
                }
            }
            ChangeOp::SetProperty { id, key, value } => match graph.node(&id) {
                Some(node) => {
                    let mut node = node.clone();
                    node.properties.insert(key, value);
                    match graph.upsert_node(node) {
                        Ok(_) => {}
                        Err(e) => report.skipped.push(Skip {
                            line: seq as usize,
                            reason: e.to_string(),
                        }),
                    }
                }
                None => report
                    .noops
                    .push(format!("event {seq}: set_property on absent node {id:?}")),
            },
            ChangeOp::AddEdge {
                src,
                rel,
                dst,
                properties,
            } => {
                let mut edge = RelationshipEdge::new(src, rel, dst);
                edge.properties = properties;
                match graph.add_edge(edge) {
                    Ok(_) => report.edges_added += 1,
                    Err(e) => report.skipped.push(Skip {
                        line: seq as usize,
                        reason: e.to_string(),
                    }),
                }
            }
            ChangeOp::RemoveEdge { src, rel, dst } => {
                if !graph.remove_edge(&src, &rel, &dst) {
                    report.noops.push(format!(
                        "event {seq}: remove of absent edge ({src})-[{rel}]->({dst})"
                    ));
                }
            }
        }
    }
    Ok((graph.version(), report))
}

/// Parses a JSONL event file.
pub fn read_events(path: impl AsRef<Path>) -> Result<Vec<ChangeEvent>, IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_events(&text)
}

pub fn parse_events(text: &str) -> Result<Vec<ChangeEvent>, IngestError> {
    let mut events = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let event: ChangeEvent =
            serde_json::from_str(trimmed).map_err(|e| IngestError::MalformedEvent {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        events.push(event);
    }
    Ok(events)
}

/// Derives the upsert/add-edge event stream that rebuilds a corpus from
/// scratch, mirroring what the batch loader would produce.
pub fn corpus_to_events(text: &str) -> Vec<ChangeEvent> {
    let docs: Vec<ResourceDocument> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .filter_map(|l| serde_json::from_str(l.trim()).ok())
        .collect();
    let mut events = Vec::new();
    let mut seq = 0u64;

    for doc in &docs {
        seq += 1;
        let mut node_only = doc.clone();
        node_only.relationships.clear();
        events.push(ChangeEvent {
            seq,
            op: ChangeOp::UpsertNode { node: node_only },
        });
    }
    for doc in &docs {
        for rel in &doc.relationships {
            seq += 1;
            events.push(ChangeEvent {
                seq,
                op: ChangeOp::AddEdge {
                    src: doc.id.clone(),
                    rel: rel.rel.clone(),
                    dst: rel.dst.clone(),
                    properties: BTreeMap::new(),
                },
            });
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, kind: &str, rels: &[(&str, &str)]) -> String {
        let rels: Vec<String> = rels
            .iter()
            .map(|(r, d)| format!(r#"{{"rel":"{r}","dst":"{d}"}}"#))
            .collect();
        format!(
            r#"{{"id":"{id}","kind":"{kind}","name":"{id}","relationships":[{}]}}"#,
            rels.join(",")
        )
    }

    #[test]
    fn forward_references_resolve_via_two_pass_load() {
        let corpus = [
            line("a", "Service", &[("DEPENDS_ON", "b")]),
            line("b", "Database", &[]),
        ]
        .join("\n");
        let (graph, report) = load_corpus_str(&corpus, Taxonomy::default(), None);
        assert_eq!(graph.node_count(), 2);
        assert_eq!(graph.edge_count(), 1);
        assert!(report.skipped.is_empty());
        assert!(graph.validate().is_empty());
    }

    #[test]
    fn empty_file_gives_empty_graph_and_report() {
        let (graph, report) = load_corpus_str("", Taxonomy::default(), None);
        assert_eq!(graph.node_count(), 0);
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn missing_kind_skips_that_line_only() {
        let corpus = format!("{}\n{{\"id\":\"x\"}}\n", line("a", "Service", &[]));
        let (graph, report) = load_corpus_str(&corpus, Taxonomy::default(), None);
        assert_eq!(graph.node_count(), 1);
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].line, 2);
    }

    #[test]
    fn unresolved_relationship_is_reported_and_dropped() {
        let corpus = line("a", "Service", &[("DEPENDS_ON", "ghost")]);
        let (graph, report) = load_corpus_str(&corpus, Taxonomy::default(), None);
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(report.skipped.len(), 1);
        assert!(report.skipped[0].reason.contains("ghost"));
        assert!(graph.validate().is_empty());
    }

    #[test]
    fn event_lifecycle_upsert_set_remove() {
        let mut graph = KnowledgeGraph::default();
        let events = vec![
            ChangeEvent {
                seq: 1,
                op: ChangeOp::UpsertNode {
                    node: serde_json::from_str(&line("n", "Database", &[])).unwrap(),
                },
            },
            ChangeEvent {
                seq: 2,
                op: ChangeOp::SetProperty {
                    id: "n".into(),
                    key: "state".into(),
                    value: PropertyValue::Text("stopped".into()),
                },
            },
            ChangeEvent {
                seq: 3,
                op: ChangeOp::RemoveNode { id: "n".into() },
            },
        ];
        apply_events(&mut graph, events, None).unwrap();
        assert_eq!(graph.node_count(), 0);
    }

    #[test]
    fn out_of_order_seq_names_both() {
        let mut graph = KnowledgeGraph::default();
        let mk = |seq| ChangeEvent {
            seq,
            op: ChangeOp::RemoveNode { id: "x".into() },
        };
        let err = apply_events(&mut graph, vec![mk(1), mk(3), mk(2)], None).unwrap_err();
        match err {
            IngestError::OutOfOrder { prev, seq } => {
                assert_eq!((prev, seq), (3, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn removals_of_absent_entities_are_recorded_noops() {
        let mut graph = KnowledgeGraph::default();
        let events = vec![
            ChangeEvent {
                seq: 5,
                op: ChangeOp::RemoveNode { id: "nope".into() },
            },
            ChangeEvent {
                seq: 6,
                op: ChangeOp::RemoveEdge {
                    src: "a".into(),
                    rel: "DEPENDS_ON".into(),
                    dst: "b".into(),
                },
            },
        ];
        let (_, report) = apply_events(&mut graph, events, None).unwrap();
        assert_eq!(report.noops.len(), 2);
    }

    #[test]
    fn event_replay_reproduces_batch_load() {
        let corpus = [
            line("a", "Service", &[("DEPENDS_ON", "b"), ("DEPLOYED_IN", "e")]),
            line("b", "Database", &[("DEPLOYED_IN", "e")]),
            line("e", "Environment", &[]),
        ]
        .join("\n");
        let (batch, _) = load_corpus_str(&corpus, Taxonomy::default(), None);

        let mut replayed = KnowledgeGraph::default();
        apply_events(&mut replayed, corpus_to_events(&corpus), None).unwrap();

        assert_eq!(batch.node_count(), replayed.node_count());
        assert_eq!(batch.edge_count(), replayed.edge_count());
        for node in batch.nodes() {
            assert_eq!(Some(node), replayed.node(&node.id));
        }
        let batch_edges: Vec<_> = batch.edges().collect();
        let replay_edges: Vec<_> = replayed.edges().collect();
        assert_eq!(batch_edges, replay_edges);
    }

    #[test]
    fn snapshot_round_trips_through_the_loader() {
        let corpus = [
            line("a", "Service", &[("DEPENDS_ON", "b")]),
            line("b", "Database", &[]),
        ]
        .join("\n");
        let (graph, _) = load_corpus_str(&corpus, Taxonomy::default(), None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snapshot.jsonl");
        write_snapshot(&graph, &path).unwrap();
        let (reloaded, report) = load_corpus(&path, Taxonomy::default(), None).unwrap();
        assert!(report.skipped.is_empty());
        assert_eq!(graph.node_count(), reloaded.node_count());
        assert_eq!(graph.edge_count(), reloaded.edge_count());
        for node in graph.nodes() {
            assert_eq!(Some(node), reloaded.node(&node.id));
        }
    }
}
