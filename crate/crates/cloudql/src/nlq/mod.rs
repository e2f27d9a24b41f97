//! Natural-language query compilation: tokenization, lexicon-driven intent
//! extraction, term resolution through the semantic index, and translation
//! of intents into the graph query IR.

mod compile;
mod extract;
pub mod lexicon;
pub mod tokenize;

pub use compile::{compile_intent, CompileError, CompiledQuery};
pub use extract::{extract_intent, ExtractError};
pub use lexicon::{AnchorSide, Lexicon, LexiconError};

use crate::lsi::{embed_query, top_k_similar, LsiModel, TermDocMatrix};
use crate::model::{KnowledgeGraph, PropertyValue};

/// LSI cosine threshold below which a term stays unresolved.
pub const RESOLVE_THRESHOLD: f64 = 0.35;

/// One value condition extracted from the query: constrain nodes of `kind`
/// (or the anchor itself, when `kind` is the anchor sentinel) to have
/// `property = value`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntentCondition {
    pub kind: String,
    pub property: String,
    pub value: PropertyValue,
    pub display: String,
    pub confidence: f64,
}

/// One relationship filter: the anchor must reach a node of `target_kind`
/// over `rel_type`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntentFilter {
    pub rel_type: String,
    pub target_kind: String,
    pub anchor_side: AnchorSide,
    pub display: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub property: String,
    pub descending: bool,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeWindowSpec {
    pub property: String,
    pub start: i64,
    pub end: i64,
}

/// Structured reading of a natural-language query: entities, conditions,
/// filters, aggregation, time window, attribution, and whatever tokens no
/// rule consumed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryIntent {
    /// Entity kinds in order of first mention; the first is the anchor.
    pub entity_kinds: Vec<String>,
    pub conditions: Vec<IntentCondition>,
    pub filters: Vec<IntentFilter>,
    pub aggregation: Option<Aggregation>,
    pub time_window: Option<TimeWindowSpec>,
    pub attribution: Option<String>,
    /// Content tokens no cue consumed.
    pub residual_terms: Vec<String>,
    /// Consumed content weight over total content weight, in [0, 1].
    pub confidence: f64,
    /// Every content token of the query, for semantic scoring downstream.
    pub content_terms: Vec<String>,
}

/// Outcome of resolving one unknown term.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    Kind { kind: String, score: f64 },
    RelType { rel_type: String, score: f64 },
    Unresolved,
}

/// Resolves a term to a node kind or relationship type: exact lexicon hits
/// score 1.0; otherwise the term is folded into the semantic index and the
/// kind of the most similar document wins when its cosine clears
/// [`RESOLVE_THRESHOLD`].
pub fn resolve_term(
    term: &str,
    lexicon: &Lexicon,
    graph: &KnowledgeGraph,
    model: Option<&LsiModel>,
    matrix: Option<&TermDocMatrix>,
) -> Resolution {
    if let Some(kind) = lexicon.entity_kind_of(term) {
        return Resolution::Kind {
            kind: kind.to_owned(),
            score: 1.0,
        };
    }
    if let Some(rel_type) = lexicon.rel_type_of(term) {
        return Resolution::RelType {
            rel_type: rel_type.to_owned(),
            score: 1.0,
        };
    }
    let (Some(model), Some(matrix)) = (model, matrix) else {
        return Resolution::Unresolved;
    };
    let latent = embed_query(model, matrix, &[term.to_owned()]);
    let top = top_k_similar(model, matrix, &latent, 1);
    match top.first() {
        Some((doc_id, score)) if *score >= RESOLVE_THRESHOLD => match graph.node(doc_id) {
            Some(node) => Resolution::Kind {
                kind: node.kind.clone(),
                score: *score,
            },
            None => Resolution::Unresolved,
        },
        _ => Resolution::Unresolved,
    }
}
