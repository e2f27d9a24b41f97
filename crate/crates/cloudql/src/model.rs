//! Knowledge-graph data model: nodes, typed edges, property values, and the
//! in-memory store with label and adjacency indexes.
//!
//! The graph is the instance level of a cloud-resource ontology. Node kinds
//! and relationship types live in a [`Taxonomy`], a registered string set
//! seeded with the standard cloud vocabulary but open for extension.

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Pseudo-kind used by the query layer for "any resource". Never stored on a
/// node; compiles to an unlabeled pattern.
pub const ANY_RESOURCE: &str = "AnyResource";

/// Node kinds registered by default.
pub const DEFAULT_KINDS: &[&str] = &[
    "ComputeInstance",
    "Database",
    "StorageBucket",
    "Service",
    "NLB",
    "Firewall",
    "Subnet",
    "VCN",
    "InternetGateway",
    "Environment",
    "Tenancy",
    "Vulnerability",
    "CompliancePolicy",
    "User",
];

/// Relationship types registered by default, with their canonical direction.
///
/// Each entry is `(rel_type, src hint, dst hint)`. A `*` hint means any kind.
/// The canonical direction is the one stored in the graph; the query layer
/// may traverse either way.
pub const DEFAULT_REL_TYPES: &[(&str, &str, &str)] = &[
    ("DEPENDS_ON", "*", "*"),
    ("COMMUNICATES_WITH", "*", "*"),
    ("SECURED_BY", "*", "Firewall"),
    ("DEPLOYED_IN", "*", "*"), // dst is Environment or Tenancy
    ("HAS_VULNERABILITY", "*", "Vulnerability"),
    ("HOSTED_ON", "*", "ComputeInstance"),
    ("FRONTED_BY", "Service", "NLB"),
    ("IN_SUBNET", "*", "Subnet"),
    ("IN_VCN", "Subnet", "VCN"),
    ("SUBJECT_TO", "*", "CompliancePolicy"),
    ("CREATED_BY", "*", "User"),
];

/// Canonical relationship used to attach a condition on a given kind to a
/// query anchor: `kind -> (rel_type, anchor takes the src side)`.
pub const CANONICAL_CONDITION_EDGES: &[(&str, &str, bool)] = &[
    ("Environment", "DEPLOYED_IN", true),
    ("Tenancy", "DEPLOYED_IN", true),
    ("Firewall", "SECURED_BY", true),
    ("Vulnerability", "HAS_VULNERABILITY", true),
    ("ComputeInstance", "HOSTED_ON", true),
    ("NLB", "FRONTED_BY", true),
    ("Subnet", "IN_SUBNET", true),
    ("VCN", "IN_VCN", true),
    ("CompliancePolicy", "SUBJECT_TO", true),
    ("User", "CREATED_BY", true),
    // A Service condition on a non-Service anchor means the anchor fronts or
    // hosts it; the service sits on the src side of both canonical edges.
    ("Service", "FRONTED_BY", false),
];

/// A scalar property value. Numbers are finite; timestamps are non-negative
/// seconds since the Unix epoch (UTC).
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Text(String),
    Number(f64),
    Bool(bool),
    Timestamp(i64),
}

impl PropertyValue {
    /// Checks the value-level invariants (finite numbers, non-negative
    /// timestamps).
    pub fn is_valid(&self) -> bool {
        match self {
            PropertyValue::Number(n) => n.is_finite(),
            PropertyValue::Timestamp(t) => *t >= 0,
            _ => true,
        }
    }

    /// Comparison used by predicate evaluation. `None` means the two values
    /// are of incomparable types (an `UnknownComparison`, treated as
    /// predicate-false by the executor). Numbers and timestamps compare
    /// numerically with each other.
    pub fn compare(&self, other: &PropertyValue) -> Option<Ordering> {
        use PropertyValue::*;
        match (self, other) {
            (Text(a), Text(b)) => Some(a.cmp(b)),
            (Bool(a), Bool(b)) => Some(a.cmp(b)),
            (Number(a), Number(b)) => Some(a.total_cmp(b)),
            (Timestamp(a), Timestamp(b)) => Some(a.cmp(b)),
            (Number(a), Timestamp(b)) => Some(a.total_cmp(&(*b as f64))),
            (Timestamp(a), Number(b)) => Some((*a as f64).total_cmp(b)),
            _ => None,
        }
    }

    /// Total order over all values, used for deterministic ORDER BY. Groups
    /// by class (bool < numeric < text), then compares within the class.
    pub fn total_order(&self, other: &PropertyValue) -> Ordering {
        fn class(v: &PropertyValue) -> u8 {
            match v {
                PropertyValue::Bool(_) => 0,
                PropertyValue::Number(_) | PropertyValue::Timestamp(_) => 1,
                PropertyValue::Text(_) => 2,
            }
        }
        class(self)
            .cmp(&class(other))
            .then_with(|| self.compare(other).unwrap_or(Ordering::Equal))
    }

    fn as_number(&self) -> Option<f64> {
        match self {
            PropertyValue::Number(n) => Some(*n),
            PropertyValue::Timestamp(t) => Some(*t as f64),
            _ => None,
        }
    }

    /// Equality used by pattern property matching; numeric across
    /// number/timestamp.
    pub fn matches(&self, other: &PropertyValue) -> bool {
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => a == b,
            _ => self == other,
        }
    }

    /// Renders the value for tables and summaries.
    pub fn render(&self) -> String {
        match self {
            PropertyValue::Text(s) => s.clone(),
            PropertyValue::Number(n) => format!("{n}"),
            PropertyValue::Bool(b) => b.to_string(),
            PropertyValue::Timestamp(t) => t.to_string(),
        }
    }

    /// Text used when the value participates in a node's indexing document.
    pub fn index_text(&self) -> String {
        self.render()
    }
}

// JSON mapping: Text <-> string, Number <-> number, Bool <-> bool,
// Timestamp <-> {"$ts": seconds}. Keeps corpus property maps flat while
// preserving the timestamp type across snapshots.
impl Serialize for PropertyValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            PropertyValue::Text(s) => serializer.serialize_str(s),
            PropertyValue::Number(n) => serializer.serialize_f64(*n),
            PropertyValue::Bool(b) => serializer.serialize_bool(*b),
            PropertyValue::Timestamp(t) => {
                let mut m = serializer.serialize_map(Some(1))?;
                m.serialize_entry("$ts", t)?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for PropertyValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = PropertyValue;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a string, number, boolean, or {\"$ts\": seconds}")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Text(v.to_owned()))
            }
            fn visit_bool<E: de::Error>(self, v: bool) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Bool(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Number(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Number(v as f64))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Number(v))
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<PropertyValue, A::Error> {
                let key: String = map
                    .next_key()?
                    .ok_or_else(|| de::Error::custom("empty object is not a property value"))?;
                if key != "$ts" {
                    return Err(de::Error::custom(format!("unknown property tag {key:?}")));
                }
                let secs: i64 = map.next_value()?;
                Ok(PropertyValue::Timestamp(secs))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// A node of the knowledge graph: one cloud resource, service, policy, user…
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceNode {
    pub id: String,
    pub kind: String,
    pub name: String,
    #[serde(default)]
    pub properties: BTreeMap<String, PropertyValue>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub created_at: i64,
}

impl ResourceNode {
    pub fn new(id: impl Into<String>, kind: impl Into<String>, name: impl Into<String>) -> Self {
        ResourceNode {
            id: id.into(),
            kind: kind.into(),
            name: name.into(),
            properties: BTreeMap::new(),
            description: String::new(),
            created_at: 0,
        }
    }

    pub fn with_property(mut self, key: impl Into<String>, value: PropertyValue) -> Self {
        self.properties.insert(key.into(), value);
        self
    }

    pub fn with_description(mut self, text: impl Into<String>) -> Self {
        self.description = text.into();
        self
    }

    pub fn with_created_at(mut self, epoch_secs: i64) -> Self {
        self.created_at = epoch_secs;
        self
    }

    /// Property lookup as seen by queries. The built-in fields `id`, `name`,
    /// `kind`, `description`, and `created_at` shadow the property map.
    pub fn lookup(&self, property: &str) -> Option<PropertyValue> {
        match property {
            "id" => Some(PropertyValue::Text(self.id.clone())),
            "name" => Some(PropertyValue::Text(self.name.clone())),
            "kind" => Some(PropertyValue::Text(self.kind.clone())),
            "description" => Some(PropertyValue::Text(self.description.clone())),
            "created_at" => Some(PropertyValue::Timestamp(self.created_at)),
            _ => self.properties.get(property).cloned(),
        }
    }

    /// The node's free-text document for indexing and keyword search:
    /// name, kind, description, then property values in key order.
    pub fn indexing_text(&self) -> String {
        let mut parts = vec![
            self.name.clone(),
            self.kind.clone(),
            self.description.clone(),
        ];
        for value in self.properties.values() {
            parts.push(value.index_text());
        }
        parts.retain(|p| !p.is_empty());
        parts.join(" ")
    }

    fn check(&self, taxonomy: &Taxonomy) -> Result<(), ModelError> {
        if self.id.is_empty() {
            return Err(ModelError::InvalidNode("node id is empty".into()));
        }
        if !taxonomy.has_kind(&self.kind) {
            return Err(ModelError::InvalidNode(format!(
                "unknown kind {:?} for node {:?}",
                self.kind, self.id
            )));
        }
        if self.properties.keys().any(|k| k.is_empty()) {
            return Err(ModelError::InvalidNode(format!(
                "node {:?} has an empty property key",
                self.id
            )));
        }
        if let Some((k, v)) = self.properties.iter().find(|(_, v)| !v.is_valid()) {
            return Err(ModelError::InvalidNode(format!(
                "node {:?} property {k:?} holds an invalid value {v:?}",
                self.id
            )));
        }
        if self.created_at < 0 {
            return Err(ModelError::InvalidNode(format!(
                "node {:?} has a negative created_at",
                self.id
            )));
        }
        Ok(())
    }
}

/// A directed, typed edge. At most one edge exists per
/// `(src_id, rel_type, dst_id)` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationshipEdge {
    pub src_id: String,
    pub rel_type: String,
    pub dst_id: String,
    #[serde(default)]
    pub properties: BTreeMap<String, PropertyValue>,
}

impl RelationshipEdge {
    pub fn new(
        src_id: impl Into<String>,
        rel_type: impl Into<String>,
        dst_id: impl Into<String>,
    ) -> Self {
        RelationshipEdge {
            src_id: src_id.into(),
            rel_type: rel_type.into(),
            dst_id: dst_id.into(),
            properties: BTreeMap::new(),
        }
    }
}

/// The registered ontology vocabulary: node kinds, relationship types, and
/// the canonical condition edge per kind.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    kinds: BTreeSet<String>,
    rel_types: BTreeSet<String>,
    condition_edges: BTreeMap<String, (String, bool)>,
}

impl Default for Taxonomy {
    fn default() -> Self {
        let kinds = DEFAULT_KINDS.iter().map(|k| k.to_string()).collect();
        let rel_types = DEFAULT_REL_TYPES
            .iter()
            .map(|(r, _, _)| r.to_string())
            .collect();
        let condition_edges = CANONICAL_CONDITION_EDGES
            .iter()
            .map(|(kind, rel, anchor_src)| (kind.to_string(), (rel.to_string(), *anchor_src)))
            .collect();
        Taxonomy {
            kinds,
            rel_types,
            condition_edges,
        }
    }
}

impl Taxonomy {
    pub fn has_kind(&self, kind: &str) -> bool {
        self.kinds.contains(kind)
    }

    pub fn has_rel_type(&self, rel_type: &str) -> bool {
        self.rel_types.contains(rel_type)
    }

    /// Registers an additional node kind. Idempotent.
    pub fn register_kind(&mut self, kind: impl Into<String>) {
        self.kinds.insert(kind.into());
    }

    /// Registers an additional relationship type. Idempotent.
    pub fn register_rel_type(&mut self, rel_type: impl Into<String>) {
        self.rel_types.insert(rel_type.into());
    }

    /// The canonical edge connecting a query anchor to a condition node of
    /// `kind`: `(rel_type, anchor takes the src side)`.
    pub fn condition_edge(&self, kind: &str) -> Option<(&str, bool)> {
        self.condition_edges
            .get(kind)
            .map(|(rel, anchor_src)| (rel.as_str(), *anchor_src))
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.kinds.iter().map(String::as_str)
    }

    pub fn rel_types(&self) -> impl Iterator<Item = &str> {
        self.rel_types.iter().map(String::as_str)
    }
}

/// Errors from graph mutations.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid node: {0}")]
    InvalidNode(String),
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("edge endpoint {0:?} does not exist")]
    DanglingEndpoint(String),
}

/// An integrity violation found by [`KnowledgeGraph::validate`]. Violations
/// are data, not errors; a healthy graph yields none.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DanglingEndpoint {
        src: String,
        rel_type: String,
        dst: String,
        missing: String,
    },
    AdjacencyMismatch {
        id: String,
        detail: String,
    },
    LabelIndexMismatch {
        kind: String,
        detail: String,
    },
    UnknownKind {
        id: String,
        kind: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEndpoint {
                src,
                rel_type,
                dst,
                missing,
            } => write!(
                f,
                "edge ({src})-[{rel_type}]->({dst}) references missing node {missing:?}"
            ),
            Violation::AdjacencyMismatch { id, detail } => {
                write!(f, "adjacency mismatch at node {id:?}: {detail}")
            }
            Violation::LabelIndexMismatch { kind, detail } => {
                write!(f, "label index mismatch for kind {kind:?}: {detail}")
            }
            Violation::UnknownKind { id, kind } => {
                write!(f, "node {id:?} has unregistered kind {kind:?}")
            }
        }
    }
}

type EdgeKey = (String, String, String); // (src, rel_type, dst)

/// The in-memory property graph with label and adjacency indexes.
///
/// Single-writer, multi-reader: mutations take `&mut self` and bump
/// [`version`](Self::version); reads are `&self` and never change it.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    taxonomy: Taxonomy,
    nodes: BTreeMap<String, ResourceNode>,
    edges: BTreeMap<EdgeKey, BTreeMap<String, PropertyValue>>,
    out_adj: BTreeMap<String, Vec<(String, String)>>,
    in_adj: BTreeMap<String, Vec<(String, String)>>,
    label_index: BTreeMap<String, BTreeSet<String>>,
    version: u64,
}

impl Default for KnowledgeGraph {
    fn default() -> Self {
        Self::new(Taxonomy::default())
    }
}

impl KnowledgeGraph {
    pub fn new(taxonomy: Taxonomy) -> Self {
        KnowledgeGraph {
            taxonomy,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            out_adj: BTreeMap::new(),
            in_adj: BTreeMap::new(),
            label_index: BTreeMap::new(),
            version: 0,
        }
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn taxonomy_mut(&mut self) -> &mut Taxonomy {
        &mut self.taxonomy
    }

    /// Monotonically increasing version, bumped on every mutation.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: &str) -> Option<&ResourceNode> {
        self.nodes.get(id)
    }

    pub fn contains_node(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// All nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &ResourceNode> {
        self.nodes.values()
    }

    /// All node ids in id order.
    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    /// All edges in (src, rel, dst) order.
    pub fn edges(&self) -> impl Iterator<Item = RelationshipEdge> + '_ {
        self.edges
            .iter()
            .map(|((src, rel, dst), props)| RelationshipEdge {
                src_id: src.clone(),
                rel_type: rel.clone(),
                dst_id: dst.clone(),
                properties: props.clone(),
            })
    }

    /// Ids of nodes with the given kind, in id order.
    pub fn nodes_with_kind(&self, kind: &str) -> impl Iterator<Item = &str> {
        self.label_index
            .get(kind)
            .into_iter()
            .flat_map(|set| set.iter().map(String::as_str))
    }

    pub fn kind_count(&self, kind: &str) -> usize {
        self.label_index.get(kind).map_or(0, BTreeSet::len)
    }

    /// Outgoing `(rel_type, dst)` pairs, sorted.
    pub fn out_neighbors(&self, id: &str) -> &[(String, String)] {
        self.out_adj.get(id).map_or(&[], Vec::as_slice)
    }

    /// Incoming `(rel_type, src)` pairs, sorted.
    pub fn in_neighbors(&self, id: &str) -> &[(String, String)] {
        self.in_adj.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn has_edge(&self, src: &str, rel_type: &str, dst: &str) -> bool {
        self.edges
            .contains_key(&(src.to_owned(), rel_type.to_owned(), dst.to_owned()))
    }

    /// Inserts or fully replaces a node. Returns the new graph version.
    pub fn upsert_node(&mut self, node: ResourceNode) -> Result<u64, ModelError> {
        node.check(&self.taxonomy)?;
        if let Some(old) = self.nodes.get(&node.id) {
            if old.kind != node.kind {
                if let Some(set) = self.label_index.get_mut(&old.kind) {
                    set.remove(&node.id);
                    if set.is_empty() {
                        self.label_index.remove(&old.kind);
                    }
                }
            }
        }
        self.label_index
            .entry(node.kind.clone())
            .or_default()
            .insert(node.id.clone());
        self.nodes.insert(node.id.clone(), node);
        self.version += 1;
        Ok(self.version)
    }

    /// Adds an edge between existing nodes. Re-adding the same triple
    /// replaces its properties instead of multiplying the edge.
    pub fn add_edge(&mut self, edge: RelationshipEdge) -> Result<u64, ModelError> {
        if edge.src_id.is_empty() || edge.dst_id.is_empty() {
            return Err(ModelError::InvalidEdge("empty endpoint id".into()));
        }
        if !self.taxonomy.has_rel_type(&edge.rel_type) {
            return Err(ModelError::InvalidEdge(format!(
                "unknown relationship type {:?}",
                edge.rel_type
            )));
        }
        for id in [&edge.src_id, &edge.dst_id] {
            if !self.nodes.contains_key(id) {
                return Err(ModelError::DanglingEndpoint(id.clone()));
            }
        }
        if let Some((k, v)) = edge
            .properties
            .iter()
            .find(|(k, v)| k.is_empty() || !v.is_valid())
        {
            return Err(ModelError::InvalidEdge(format!(
                "edge property {k:?} holds an invalid entry {v:?}"
            )));
        }
        let key = (
            edge.src_id.clone(),
            edge.rel_type.clone(),
            edge.dst_id.clone(),
        );
        let fresh = !self.edges.contains_key(&key);
        self.edges.insert(key, edge.properties);
        if fresh {
            Self::adj_insert(
                &mut self.out_adj,
                &edge.src_id,
                &edge.rel_type,
                &edge.dst_id,
            );
            Self::adj_insert(&mut self.in_adj, &edge.dst_id, &edge.rel_type, &edge.src_id);
        }
        self.version += 1;
        Ok(self.version)
    }

    /// Removes a node and all incident edges. No-op (version unchanged) if
    /// the id is absent.
    pub fn remove_node(&mut self, id: &str) -> u64 {
        let Some(node) = self.nodes.remove(id) else {
            return self.version;
        };
        if let Some(set) = self.label_index.get_mut(&node.kind) {
            set.remove(id);
            if set.is_empty() {
                self.label_index.remove(&node.kind);
            }
        }
        for (rel, dst) in self.out_adj.remove(id).unwrap_or_default() {
            self.edges
                .remove(&(id.to_owned(), rel.clone(), dst.clone()));
            Self::adj_remove(&mut self.in_adj, &dst, &rel, id);
        }
        for (rel, src) in self.in_adj.remove(id).unwrap_or_default() {
            self.edges
                .remove(&(src.clone(), rel.clone(), id.to_owned()));
            Self::adj_remove(&mut self.out_adj, &src, &rel, id);
        }
        self.version += 1;
        self.version
    }

    /// Removes one edge triple. Returns whether anything was removed; the
    /// version is bumped only when it was.
    pub fn remove_edge(&mut self, src: &str, rel_type: &str, dst: &str) -> bool {
        let key = (src.to_owned(), rel_type.to_owned(), dst.to_owned());
        if self.edges.remove(&key).is_none() {
            return false;
        }
        Self::adj_remove(&mut self.out_adj, src, rel_type, dst);
        Self::adj_remove(&mut self.in_adj, dst, rel_type, src);
        self.version += 1;
        true
    }

    fn adj_insert(
        adj: &mut BTreeMap<String, Vec<(String, String)>>,
        id: &str,
        rel: &str,
        other: &str,
    ) {
        let list = adj.entry(id.to_owned()).or_default();
        let entry = (rel.to_owned(), other.to_owned());
        if let Err(pos) = list.binary_search(&entry) {
            list.insert(pos, entry);
        }
    }

    fn adj_remove(
        adj: &mut BTreeMap<String, Vec<(String, String)>>,
        id: &str,
        rel: &str,
        other: &str,
    ) {
        if let Some(list) = adj.get_mut(id) {
            let entry = (rel.to_owned(), other.to_owned());
            if let Ok(pos) = list.binary_search(&entry) {
                list.remove(pos);
            }
            if list.is_empty() {
                adj.remove(id);
            }
        }
    }

    /// Checks every structural invariant and reports violations. An empty
    /// list means the graph is consistent.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        for node in self.nodes.values() {
            if !self.taxonomy.has_kind(&node.kind) {
                violations.push(Violation::UnknownKind {
                    id: node.id.clone(),
                    kind: node.kind.clone(),
                });
            }
        }

        for (src, rel, dst) in self.edges.keys() {
            for endpoint in [src, dst] {
                if !self.nodes.contains_key(endpoint) {
                    violations.push(Violation::DanglingEndpoint {
                        src: src.clone(),
                        rel_type: rel.clone(),
                        dst: dst.clone(),
                        missing: endpoint.clone(),
                    });
                }
            }
        }

        // Rebuild both adjacency maps from the edge set and diff.
        let mut expected_out: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        let mut expected_in: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        for (src, rel, dst) in self.edges.keys() {
            expected_out
                .entry(src.clone())
                .or_default()
                .push((rel.clone(), dst.clone()));
            expected_in
                .entry(dst.clone())
                .or_default()
                .push((rel.clone(), src.clone()));
        }
        for list in expected_out.values_mut().chain(expected_in.values_mut()) {
            list.sort();
        }
        for (label, actual, expected) in [
            ("out", &self.out_adj, &expected_out),
            ("in", &self.in_adj, &expected_in),
        ] {
            let ids: BTreeSet<&String> = actual.keys().chain(expected.keys()).collect();
            for id in ids {
                let a = actual.get(id).map_or(&[][..], Vec::as_slice);
                let e = expected.get(id).map_or(&[][..], Vec::as_slice);
                if a != e {
                    violations.push(Violation::AdjacencyMismatch {
                        id: id.clone(),
                        detail: format!("{label}-adjacency holds {a:?}, edges imply {e:?}"),
                    });
                }
            }
        }

        // Label index must exactly partition node ids by kind.
        let mut expected_labels: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for node in self.nodes.values() {
            expected_labels
                .entry(node.kind.clone())
                .or_default()
                .insert(node.id.clone());
        }
        let kinds: BTreeSet<&String> = self
            .label_index
            .keys()
            .chain(expected_labels.keys())
            .collect();
        for kind in kinds {
            let actual = self.label_index.get(kind);
            let expected = expected_labels.get(kind);
            if actual != expected {
                violations.push(Violation::LabelIndexMismatch {
                    kind: kind.clone(),
                    detail: format!("index holds {actual:?}, nodes imply {expected:?}"),
                });
            }
        }

        violations
    }

    #[cfg(test)]
    pub(crate) fn corrupt_adjacency_for_test(&mut self, id: &str, rel: &str, other: &str) {
        Self::adj_insert(&mut self.out_adj, id, rel, other);
    }

    #[cfg(test)]
    pub(crate) fn corrupt_edge_for_test(&mut self, src: &str, rel: &str, dst: &str) {
        self.edges
            .insert((src.into(), rel.into(), dst.into()), BTreeMap::new());
    }
}

/// Canonical ordering for node ids: case-insensitive first, byte order as
/// the tiebreak. Keeps result rows stable under the mixed-case ids that show
/// up in real inventories.
pub fn id_order(a: &str, b: &str) -> Ordering {
    let fold = |s: &str| s.to_lowercase();
    fold(a).cmp(&fold(b)).then_with(|| a.cmp(b))
}
