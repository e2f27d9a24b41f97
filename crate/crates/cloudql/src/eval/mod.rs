//! Evaluation harness: a keyword-search baseline, precision/recall/F1
//! metrics with macro averaging, and the comparative runner that pits the
//! ontology pipeline against bag-of-words retrieval over a gold query set.
//!
//! Timing uses an injectable monotonic clock so reports are reproducible:
//! a fixed clock pins every duration to zero, the real clock measures wall
//! time. Index build time is never part of per-query timing.

pub mod generate;

use crate::lsi::TermDocMatrix;
use crate::model::{id_order, KnowledgeGraph};
use crate::nlq::tokenize::content_terms;
use crate::pipeline::Pipeline;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

/// One labeled evaluation query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldQuery {
    pub query: String,
    pub relevant_ids: BTreeSet<String>,
    pub archetype: String,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("gold file line {line}: {reason}")]
    BadGoldLine { line: usize, reason: String },
    #[error("gold file is empty")]
    EmptyGoldFile,
    #[error("gold query {query:?} has an empty relevant set")]
    EmptyGold { query: String },
    #[error("gold query {query:?} names unknown node {id:?}")]
    UnknownGoldId { query: String, id: String },
    #[error("query failed: {0}")]
    Ask(String),
}

/// Loads a JSONL gold file. Empty files are an error: a gold set with no
/// queries cannot anchor a comparison.
pub fn load_gold(path: impl AsRef<Path>) -> Result<Vec<GoldQuery>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_gold(&text)
}

pub fn parse_gold(text: &str) -> Result<Vec<GoldQuery>, EvalError> {
    let mut gold = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let entry: GoldQuery =
            serde_json::from_str(trimmed).map_err(|e| EvalError::BadGoldLine {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        gold.push(entry);
    }
    if gold.is_empty() {
        return Err(EvalError::EmptyGoldFile);
    }
    Ok(gold)
}

/// Precision / recall / F1 for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricsFragment {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Standard set metrics over an ordered retrieval. Empty retrievals score
/// zero precision by convention; an empty relevant set is a malformed gold
/// entry and errors.
pub fn compute_metrics(
    retrieved: &[String],
    relevant: &BTreeSet<String>,
) -> Result<MetricsFragment, EvalError> {
    if relevant.is_empty() {
        return Err(EvalError::EmptyGold {
            query: String::new(),
        });
    }
    let hits = retrieved.iter().filter(|id| relevant.contains(*id)).count() as f64;
    let precision = if retrieved.is_empty() {
        0.0
    } else {
        hits / retrieved.len() as f64
    };
    let recall = hits / relevant.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricsFragment {
        precision,
        recall,
        f1,
    })
}

/// Bag-of-words baseline: scores every node document by the summed TF-IDF
/// weight of the query terms it shares, with no graph structure and no
/// lexicon. Zero-scoring documents are not retrieved.
pub fn keyword_search(
    graph: &KnowledgeGraph,
    matrix: &TermDocMatrix,
    query: &str,
    k: usize,
) -> Vec<(String, f64)> {
    let mut terms: Vec<String> = content_terms(query);
    terms.sort();
    terms.dedup();
    let term_ids: Vec<u32> = terms.iter().filter_map(|t| matrix.term_id(t)).collect();

    let mut scored: Vec<(String, f64)> = matrix
        .doc_ids()
        .iter()
        .enumerate()
        .filter(|(_, id)| graph.contains_node(id))
        .map(|(d, id)| {
            let score: f64 = term_ids.iter().map(|&t| matrix.weight(t, d)).sum();
            (id.clone(), score)
        })
        .filter(|(_, score)| *score > 0.0)
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| id_order(&a.0, &b.0)));
    scored.truncate(k);
    scored
}

/// Monotonic clock used for query timing; injectable so reports can be
/// byte-reproducible.
pub trait Clock {
    fn now_ms(&self) -> f64;
}

/// Wall-clock timing.
pub struct RealClock {
    origin: Instant,
}

impl Default for RealClock {
    fn default() -> Self {
        RealClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for RealClock {
    fn now_ms(&self) -> f64 {
        self.origin.elapsed().as_secs_f64() * 1e3
    }
}

/// A clock that never advances: every measured duration is exactly zero.
pub struct FixedClock;

impl Clock for FixedClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryOutcome {
    pub query: String,
    pub archetype: String,
    pub ontology: MetricsFragment,
    pub keyword: MetricsFragment,
    pub keyword_at_fixed_k: MetricsFragment,
    pub ontology_ms: f64,
    pub keyword_ms: f64,
    pub ontology_retrieved: Vec<String>,
    pub keyword_retrieved: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Default)]
pub struct SystemSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_ms: f64,
    pub median_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub per_query: Vec<QueryOutcome>,
    pub ontology: SystemSummary,
    pub keyword: SystemSummary,
    pub keyword_at_fixed_k: SystemSummary,
    /// Baseline cutoff note: per-query k defaults to the gold size.
    pub fixed_k: usize,
}

/// Baseline cutoff for the additional fixed-k report row.
pub const FIXED_BASELINE_K: usize = 10;

/// Runs both systems over every gold query and macro-averages the metrics.
/// The pipeline must already hold the graph; the baseline gets the same
/// TF-IDF matrix the index uses (built here if the pipeline has none).
pub fn run_comparison(
    pipeline: &Pipeline,
    gold: &[GoldQuery],
    clock: &dyn Clock,
) -> Result<ComparisonReport, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGoldFile);
    }
    for entry in gold {
        if entry.relevant_ids.is_empty() {
            return Err(EvalError::EmptyGold {
                query: entry.query.clone(),
            });
        }
        for id in &entry.relevant_ids {
            if !pipeline.graph().contains_node(id) {
                return Err(EvalError::UnknownGoldId {
                    query: entry.query.clone(),
                    id: id.clone(),
                });
            }
        }
    }

    let owned_matrix;
    let matrix = match pipeline.index() {
        Some(index) => index.matrix,
        None => {
            owned_matrix = crate::lsi::build_matrix(pipeline.graph());
            &owned_matrix
        }
    };

    let mut per_query = Vec::with_capacity(gold.len());
    for entry in gold {
        let t0 = clock.now_ms();
        let ontology_retrieved = pipeline
            .retrieve(&entry.query)
            .map_err(|e| EvalError::Ask(format!("{:?}: {e}", entry.query)))?;
        let ontology_ms = clock.now_ms() - t0;

        let k = entry.relevant_ids.len();
        let t1 = clock.now_ms();
        let keyword_hits = keyword_search(pipeline.graph(), matrix, &entry.query, k);
        let keyword_ms = clock.now_ms() - t1;
        let keyword_retrieved: Vec<String> = keyword_hits.into_iter().map(|(id, _)| id).collect();
        let keyword_fixed: Vec<String> =
            keyword_search(pipeline.graph(), matrix, &entry.query, FIXED_BASELINE_K)
                .into_iter()
                .map(|(id, _)| id)
                .collect();

        per_query.push(QueryOutcome {
            ontology: compute_metrics(&ontology_retrieved, &entry.relevant_ids)?,
            keyword: compute_metrics(&keyword_retrieved, &entry.relevant_ids)?,
            keyword_at_fixed_k: compute_metrics(&keyword_fixed, &entry.relevant_ids)?,
            query: entry.query.clone(),
            archetype: entry.archetype.clone(),
            ontology_ms,
            keyword_ms,
            ontology_retrieved,
            keyword_retrieved,
        });
    }

    let summarize = |metric: &dyn Fn(&QueryOutcome) -> MetricsFragment,
                     time: &dyn Fn(&QueryOutcome) -> f64|
     -> SystemSummary {
        let n = per_query.len() as f64;
        let mut times: Vec<f64> = per_query.iter().map(time).collect();
        times.sort_by(f64::total_cmp);
        let median_ms = if times.is_empty() {
            0.0
        } else if times.len() % 2 == 1 {
            times[times.len() / 2]
        } else {
            (times[times.len() / 2 - 1] + times[times.len() / 2]) / 2.0
        };
        SystemSummary {
            precision: per_query.iter().map(|q| metric(q).precision).sum::<f64>() / n,
            recall: per_query.iter().map(|q| metric(q).recall).sum::<f64>() / n,
            f1: per_query.iter().map(|q| metric(q).f1).sum::<f64>() / n,
            mean_ms: times.iter().sum::<f64>() / n,
            median_ms,
        }
    };

    Ok(ComparisonReport {
        ontology: summarize(&|q| q.ontology, &|q| q.ontology_ms),
        keyword: summarize(&|q| q.keyword, &|q| q.keyword_ms),
        keyword_at_fixed_k: summarize(&|q| q.keyword_at_fixed_k, &|q| q.keyword_ms),
        per_query,
        fixed_k: FIXED_BASELINE_K,
    })
}

/// Human-readable comparison table plus per-query drill-down. Timing
/// columns reflect the injected clock. Reported magnitudes are specific to
/// the corpus and machine at hand; only the ordering between the two rows
/// is meant to travel.
pub fn render_report(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>10} {:>10} {:>10} {:>14}",
        "Search Approach", "Precision", "Recall", "F1-Score", "Avg Query Time"
    );
    let _ = writeln!(out, "{}", "-".repeat(76));
    for (label, s) in [
        ("Traditional Keyword Search", &report.keyword),
        ("Ontology-Driven NLP Search", &report.ontology),
    ] {
        let _ = writeln!(
            out,
            "{:<28} {:>9.1}% {:>9.1}% {:>9.1}% {:>11.1} ms",
            label,
            s.precision * 100.0,
            s.recall * 100.0,
            s.f1 * 100.0,
            s.mean_ms
        );
    }
    let _ = writeln!(
        out,
        "(keyword baseline at fixed k={}: P {:.1}% R {:.1}% F1 {:.1}%)",
        report.fixed_k,
        report.keyword_at_fixed_k.precision * 100.0,
        report.keyword_at_fixed_k.recall * 100.0,
        report.keyword_at_fixed_k.f1 * 100.0,
    );
    let _ = writeln!(out, "\nPer-query breakdown:");
    for q in &report.per_query {
        let _ = writeln!(
            out,
            "  [{}] {:?}\n    ontology: P {:.2} R {:.2} F1 {:.2} ({:.1} ms, {} ids) | keyword: P {:.2} R {:.2} F1 {:.2} ({:.1} ms, {} ids)",
            q.archetype,
            q.query,
            q.ontology.precision,
            q.ontology.recall,
            q.ontology.f1,
            q.ontology_ms,
            q.ontology_retrieved.len(),
            q.keyword.precision,
            q.keyword.recall,
            q.keyword.f1,
            q.keyword_ms,
            q.keyword_retrieved.len(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::AppConfig;

    #[test]
    fn hand_counted_metrics() {
        let retrieved: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let relevant: BTreeSet<String> = ["b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let m = compute_metrics(&retrieved, &relevant).unwrap();
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_retrieval_is_all_ones() {
        let retrieved: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let relevant: BTreeSet<String> = retrieved.iter().cloned().collect();
        let m = compute_metrics(&retrieved, &relevant).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn disjoint_retrieval_is_all_zeros() {
        let retrieved: Vec<String> = vec!["x".into()];
        let relevant: BTreeSet<String> = ["y".to_string()].into_iter().collect();
        let m = compute_metrics(&retrieved, &relevant).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_relevant_set_is_an_error() {
        assert!(compute_metrics(&[], &BTreeSet::new()).is_err());
    }

    #[test]
    fn f1_identity_on_fractional_cases() {
        let retrieved: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let relevant: BTreeSet<String> = ["a", "x"].iter().map(|s| s.to_string()).collect();
        let m = compute_metrics(&retrieved, &relevant).unwrap();
        let expect = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        assert!((m.f1 - expect).abs() < 1e-12);
        assert!(m.f1 >= m.precision.min(m.recall) && m.f1 <= m.precision.max(m.recall));
    }

    fn keyword_fixture() -> Pipeline {
        let mut pipeline = Pipeline::new(AppConfig::default()).unwrap();
        let docs = [
            ("web-alpha", "unique zebra workload"),
            ("web-beta", "plain workload"),
            ("web-gamma", "another plain workload"),
        ];
        let corpus: Vec<String> = docs
            .iter()
            .map(|(id, desc)| {
                format!(
                    r#"{{"id":"{id}","kind":"ComputeInstance","name":"{id}","description":"{desc}"}}"#
                )
            })
            .collect();
        pipeline.ingest_corpus_str(&corpus.join("\n"));
        pipeline
    }

    #[test]
    fn keyword_search_ranks_unique_name_first() {
        let pipeline = keyword_fixture();
        let matrix = crate::lsi::build_matrix(pipeline.graph());
        let hits = keyword_search(pipeline.graph(), &matrix, "web-alpha", 3);
        assert_eq!(hits[0].0, "web-alpha");
    }

    #[test]
    fn pure_stopword_query_retrieves_nothing() {
        let pipeline = keyword_fixture();
        let matrix = crate::lsi::build_matrix(pipeline.graph());
        assert!(keyword_search(pipeline.graph(), &matrix, "the of and", 5).is_empty());
    }

    #[test]
    fn literal_name_gold_set_gives_both_systems_full_marks() {
        let pipeline = keyword_fixture();
        // Names are ids in the fixture, so literal-name queries hit both paths.
        let gold: Vec<GoldQuery> = ["web-alpha", "web-beta", "web-gamma"]
            .iter()
            .map(|id| GoldQuery {
                query: (*id).to_owned(),
                relevant_ids: [id.to_string()].into_iter().collect(),
                archetype: "literal".into(),
            })
            .collect();
        let report = run_comparison(&pipeline, &gold, &FixedClock).unwrap();
        assert_eq!(report.ontology.precision, 1.0);
        assert_eq!(report.ontology.recall, 1.0);
        assert_eq!(report.keyword.precision, 1.0);
        assert_eq!(report.keyword.recall, 1.0);
    }

    #[test]
    fn gold_ids_must_exist_in_the_graph() {
        let pipeline = keyword_fixture();
        let gold = vec![GoldQuery {
            query: "web-alpha".into(),
            relevant_ids: ["ghost".to_string()].into_iter().collect(),
            archetype: "literal".into(),
        }];
        assert!(matches!(
            run_comparison(&pipeline, &gold, &FixedClock),
            Err(EvalError::UnknownGoldId { .. })
        ));
    }

    #[test]
    fn empty_gold_file_is_a_loader_error() {
        assert!(matches!(parse_gold(""), Err(EvalError::EmptyGoldFile)));
    }

    /// Bag-of-words has no notion of compliance edges: a "pci" query pulls
    /// in every document whose text mentions the token, decoys included.
    #[test]
    fn pci_keyword_query_retrieves_the_planted_decoys() {
        let (corpus, _) = crate::eval::generate::generate_corpus(&Default::default());
        let mut pipeline = Pipeline::new(AppConfig::default()).unwrap();
        pipeline.ingest_corpus_str(&corpus);
        let matrix = crate::lsi::build_matrix(pipeline.graph());

        let mentioning: BTreeSet<String> = pipeline
            .graph()
            .nodes()
            .filter(|n| crate::nlq::tokenize::content_terms(&n.indexing_text()).contains(&"pci".to_owned()))
            .map(|n| n.id.clone())
            .collect();
        assert!(mentioning.len() >= 4, "policy node plus three decoys at least");

        let hits = keyword_search(pipeline.graph(), &matrix, "pci", mentioning.len() + 5);
        let retrieved: BTreeSet<String> = hits.into_iter().map(|(id, _)| id).collect();
        assert_eq!(retrieved, mentioning, "every pci-mentioning node is retrieved");
        let decoys: Vec<&String> = retrieved.iter().filter(|id| id.contains("gate")).collect();
        assert!(decoys.len() >= 3, "decoys present: {decoys:?}");
    }
}
