//! Query answering: execute the compiled IR, rank bindings by combined
//! graph/semantic relevance, and render the structured table plus the
//! templated natural-language summary.
//!
//! Scores combine a graph score (the fraction of extracted constraints the
//! executed query retained; 1.0 in strict mode) with a semantic score (the
//! cosine between the query embedding and the anchor node's document; 0
//! when no index is loaded). Score comparisons are quantized so floating
//! noise cannot shuffle rows of equal relevance.

use crate::lsi::{cosine, embed_query, LsiModel, TermDocMatrix};
use crate::model::{id_order, KnowledgeGraph, PropertyValue};
use crate::nlq::{compile_intent, CompiledQuery, Lexicon, QueryIntent};
use crate::query::{execute, Binding, ExecError, ReturnItem};
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt::Write as _;

/// Relative weights for the combined relevance score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    pub graph: f64,
    pub semantic: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            graph: 0.7,
            semantic: 0.3,
        }
    }
}

/// Score granularity for ordering; differences below this tie instead of
/// reordering.
const SCORE_QUANTUM: f64 = 1e-9;

/// One ranked result row.
#[derive(Debug, Clone)]
pub struct RankedResult {
    pub binding: Binding,
    /// One value per RETURN item; `None` when the property is absent.
    pub projected: Vec<Option<PropertyValue>>,
    pub score: f64,
}

/// Structured output: column headers and stringified rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub total_count: usize,
}

/// A complete answer to one query.
#[derive(Debug, Clone)]
pub struct Answer {
    pub table: ResultTable,
    pub summary: String,
    pub results: Vec<RankedResult>,
    /// True when constraints were dropped to produce non-empty results.
    pub approximate: bool,
    /// Fraction of extracted constraints the executed query retained.
    pub graph_score: f64,
}

/// A semantic index pair, borrowed for scoring.
#[derive(Clone, Copy)]
pub struct Index<'a> {
    pub model: &'a LsiModel,
    pub matrix: &'a TermDocMatrix,
}

/// Executes a compiled query and assembles the ranked, rendered answer.
pub fn answer(
    graph: &KnowledgeGraph,
    index: Option<Index<'_>>,
    weights: ScoreWeights,
    lexicon: &Lexicon,
    intent: &QueryIntent,
    compiled: &CompiledQuery,
) -> Result<Answer, ExecError> {
    answer_scored(graph, index, weights, lexicon, intent, compiled, 1.0, false)
}

#[allow(clippy::too_many_arguments)]
fn answer_scored(
    graph: &KnowledgeGraph,
    index: Option<Index<'_>>,
    weights: ScoreWeights,
    lexicon: &Lexicon,
    intent: &QueryIntent,
    compiled: &CompiledQuery,
    graph_score: f64,
    approximate: bool,
) -> Result<Answer, ExecError> {
    let bindings = execute(graph, &compiled.ir)?;

    let query_latent = index.map(|ix| embed_query(ix.model, ix.matrix, &intent.content_terms));
    let doc_index_of = |id: &str| -> Option<usize> {
        index.and_then(|ix| {
            ix.matrix
                .doc_ids()
                .binary_search_by(|d| d.as_str().cmp(id))
                .ok()
        })
    };

    let mut results: Vec<RankedResult> = bindings
        .into_iter()
        .map(|binding| {
            let semantic = match (&query_latent, binding.get(&compiled.anchor_var)) {
                (Some(latent), Some(anchor_id)) => match (index, doc_index_of(anchor_id)) {
                    (Some(ix), Some(doc)) => {
                        cosine(latent, ix.model.doc_latent_vector(doc)).max(0.0)
                    }
                    _ => 0.0,
                },
                _ => 0.0,
            };
            let projected = project(graph, &compiled.ir.returns, &binding);
            let score = weights.graph * graph_score + weights.semantic * semantic;
            RankedResult {
                binding,
                projected,
                score,
            }
        })
        .collect();

    let var_order: Vec<&str> = compiled
        .ir
        .node_patterns
        .iter()
        .map(|p| p.var.as_str())
        .collect();
    results.sort_by(|a, b| {
        let qa = (a.score / SCORE_QUANTUM).round() as i64;
        let qb = (b.score / SCORE_QUANTUM).round() as i64;
        qb.cmp(&qa).then_with(|| {
            for var in &var_order {
                let cmp = id_order(
                    a.binding.get(var).unwrap_or(""),
                    b.binding.get(var).unwrap_or(""),
                );
                if cmp != Ordering::Equal {
                    return cmp;
                }
            }
            Ordering::Equal
        })
    });

    let columns: Vec<String> = compiled
        .return_kinds
        .iter()
        .map(|kind| lexicon.header(kind.as_deref()))
        .collect();
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            r.projected
                .iter()
                .map(|v| v.as_ref().map(PropertyValue::render).unwrap_or_default())
                .collect()
        })
        .collect();
    let total_count = rows.len();
    let table = ResultTable {
        columns,
        rows,
        total_count,
    };
    let summary = render_summary(lexicon, intent, &results);

    Ok(Answer {
        table,
        summary,
        results,
        approximate,
        graph_score,
    })
}

fn project(
    graph: &KnowledgeGraph,
    returns: &[ReturnItem],
    binding: &Binding,
) -> Vec<Option<PropertyValue>> {
    returns
        .iter()
        .map(|item| match item {
            ReturnItem::Node(var) => binding
                .get(var)
                .map(|id| PropertyValue::Text(id.to_owned())),
            ReturnItem::Property(var, property) => binding
                .get(var)
                .and_then(|id| graph.node(id))
                .and_then(|node| node.lookup(property)),
        })
        .collect()
}

/// Renders the deterministic one-sentence summary:
/// `There are {n} {plural} in the {conditions} with {filters}: {items}`,
/// with singular grammar for one row and a fixed no-match sentence for
/// zero.
pub fn render_summary(lexicon: &Lexicon, intent: &QueryIntent, results: &[RankedResult]) -> String {
    let kind = intent
        .entity_kinds
        .first()
        .map(String::as_str)
        .unwrap_or("AnyResource");
    let n = results.len();

    if n == 0 {
        return format!("No {} matched the query.", lexicon.noun(kind, true));
    }

    let mut out = if n == 1 {
        format!("There is 1 {}", lexicon.noun(kind, false))
    } else {
        format!("There are {n} {}", lexicon.noun(kind, true))
    };

    let condition_phrases = distinct(intent.conditions.iter().map(|c| c.display.as_str()));
    if !condition_phrases.is_empty() {
        let _ = write!(out, " in the {}", join_natural(&condition_phrases));
    }
    let filter_phrases = distinct(intent.filters.iter().map(|f| f.display.as_str()));
    if !filter_phrases.is_empty() {
        let _ = write!(out, " with {}", join_natural(&filter_phrases));
    }

    let items: Vec<String> = results
        .iter()
        .map(|r| {
            let name = r
                .projected
                .first()
                .and_then(|v| v.as_ref())
                .map(PropertyValue::render)
                .unwrap_or_default();
            match r.projected.get(1).and_then(|v| v.as_ref()) {
                Some(salient) => format!("{name} with {}", salient.render()),
                None => name,
            }
        })
        .collect();
    let _ = write!(out, ": {}", join_natural(&items));
    out
}

fn distinct<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = Vec::new();
    for item in items {
        if !item.is_empty() && !seen.contains(&item) {
            seen.push(item);
        }
    }
    seen
}

fn join_natural<S: AsRef<str>>(items: &[S]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].as_ref().to_owned(),
        n => {
            let head: Vec<&str> = items[..n - 1].iter().map(AsRef::as_ref).collect();
            format!("{} and {}", head.join(", "), items[n - 1].as_ref())
        }
    }
}

/// Strict execution first; when it comes back empty, constraints are
/// dropped cumulatively (least confident first, later extractions before
/// earlier ones on ties) until something matches. Results from a relaxed
/// query carry `approximate = true` and a graph score below 1.
pub fn relaxed_answer(
    graph: &KnowledgeGraph,
    index: Option<Index<'_>>,
    weights: ScoreWeights,
    lexicon: &Lexicon,
    taxonomy: &crate::model::Taxonomy,
    intent: &QueryIntent,
) -> Result<Answer, AnswerError> {
    let salient = |kind: &str| lexicon.salient_property(kind).to_owned();
    let compiled = compile_intent(intent, taxonomy, salient)?;
    let strict = answer(graph, index, weights, lexicon, intent, &compiled)?;
    if !strict.results.is_empty() {
        return Ok(strict);
    }

    // Constraint handles: (confidence, extraction order). Later extractions
    // drop first on equal confidence.
    enum Handle {
        Condition(usize),
        Filter(usize),
        Window,
    }
    let mut handles: Vec<(f64, usize, Handle)> = Vec::new();
    let mut order = 0usize;
    for (i, c) in intent.conditions.iter().enumerate() {
        handles.push((c.confidence, order, Handle::Condition(i)));
        order += 1;
    }
    for (i, f) in intent.filters.iter().enumerate() {
        handles.push((f.confidence, order, Handle::Filter(i)));
        order += 1;
    }
    if intent.time_window.is_some() {
        handles.push((1.0, order, Handle::Window));
    }
    let total = handles.len();
    if total == 0 {
        return Ok(strict);
    }
    handles.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));

    for dropped in 1..=total {
        let mut relaxed = intent.clone();
        let mut drop_conditions = Vec::new();
        let mut drop_filters = Vec::new();
        for (_, _, handle) in handles.iter().take(dropped) {
            match handle {
                Handle::Condition(i) => drop_conditions.push(*i),
                Handle::Filter(i) => drop_filters.push(*i),
                Handle::Window => relaxed.time_window = None,
            }
        }
        drop_conditions.sort_unstable_by(|a, b| b.cmp(a));
        for i in drop_conditions {
            relaxed.conditions.remove(i);
        }
        drop_filters.sort_unstable_by(|a, b| b.cmp(a));
        for i in drop_filters {
            relaxed.filters.remove(i);
        }

        let compiled = compile_intent(&relaxed, taxonomy, |k| {
            lexicon.salient_property(k).to_owned()
        })?;
        let graph_score = (total - dropped) as f64 / total as f64;
        let candidate = answer_scored(
            graph,
            index,
            weights,
            lexicon,
            &relaxed,
            &compiled,
            graph_score,
            true,
        )?;
        if !candidate.results.is_empty() {
            return Ok(candidate);
        }
    }
    Ok(strict)
}

#[derive(Debug, thiserror::Error)]
pub enum AnswerError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Compile(#[from] crate::nlq::CompileError),
}

/// Aligned-text rendering of the table plus summary.
pub fn render_text(answer: &Answer) -> String {
    let mut out = String::new();
    let table = &answer.table;
    let mut widths: Vec<usize> = table.columns.iter().map(String::len).collect();
    for row in &table.rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let render_row = |cells: &[String]| -> String {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i + 1 == cells.len() {
                line.push_str(cell);
            } else {
                let _ = write!(line, "{cell:<width$}  ", width = widths[i]);
            }
        }
        line.trim_end().to_owned()
    };
    out.push_str(&render_row(&table.columns));
    out.push('\n');
    let _ = writeln!(
        out,
        "{}",
        "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len().saturating_sub(1)))
    );
    for row in &table.rows {
        out.push_str(&render_row(row));
        out.push('\n');
    }
    out.push('\n');
    if answer.approximate {
        let _ = writeln!(
            out,
            "(approximate: {:.0}% of constraints retained)",
            answer.graph_score * 100.0
        );
    }
    out.push_str(&answer.summary);
    out.push('\n');
    out
}

#[derive(Serialize)]
struct JsonAnswer<'a> {
    columns: &'a [String],
    rows: &'a [Vec<String>],
    scores: Vec<f64>,
    summary: &'a str,
    approximate: bool,
    total_count: usize,
}

/// JSON rendering, shared verbatim by the CLI and the HTTP endpoint.
pub fn render_json(answer: &Answer) -> String {
    let payload = JsonAnswer {
        columns: &answer.table.columns,
        rows: &answer.table.rows,
        scores: answer.results.iter().map(|r| r.score).collect(),
        summary: &answer.summary,
        approximate: answer.approximate,
        total_count: answer.table.total_count,
    };
    serde_json::to_string_pretty(&payload).expect("answer serializes")
}

/// CSV rendering with RFC 4180 quoting.
pub fn render_csv(answer: &Answer) -> String {
    let quote = |cell: &str| -> String {
        if cell.contains([',', '"', '\n', '\r']) {
            format!("\"{}\"", cell.replace('"', "\"\""))
        } else {
            cell.to_owned()
        }
    };
    let mut out = String::new();
    let header: Vec<String> = answer.table.columns.iter().map(|c| quote(c)).collect();
    out.push_str(&header.join(","));
    out.push_str("\r\n");
    for row in &answer.table.rows {
        let cells: Vec<String> = row.iter().map(|c| quote(c)).collect();
        out.push_str(&cells.join(","));
        out.push_str("\r\n");
    }
    out
}
