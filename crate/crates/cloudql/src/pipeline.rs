//! End-to-end wiring: configuration, graph + lexicon + index lifecycle, and
//! the shared question-answering path used identically by the CLI, the
//! REPL, the HTTP endpoint, and the evaluation harness.

use crate::answer::{relaxed_answer, Answer, AnswerError, Index, ScoreWeights};
use crate::classify::{CategoryLexicon, CategoryLexiconError};
use crate::ingest::{self, apply_events, ChangeEvent, IngestError, IngestReport};
use crate::lsi::{build_matrix, truncated_svd, LsiError, LsiModel, TermDocMatrix};
use crate::model::{KnowledgeGraph, PropertyValue, Taxonomy};
use crate::nlq::{
    compile_intent, extract_intent, resolve_term, CompileError, CompiledQuery, ExtractError,
    Lexicon, LexiconError, QueryIntent, Resolution,
};
use crate::query::{
    execute, parse_ir_text, Binding, ExecError, GraphQueryIR, ParseError, ReturnItem,
};
use serde::Deserialize;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Output rendering selection for answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!(
                "unknown format {other:?} (expected table, json, or csv)"
            )),
        }
    }
}

/// Application configuration. Every field has a default; a JSON config file
/// and command-line flags override it.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub corpus: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub lsi_rank: usize,
    pub lsi_tol: f64,
    pub lsi_max_iter: usize,
    pub resolve_threshold: f64,
    pub graph_weight: f64,
    pub semantic_weight: f64,
    pub default_tenancy: Option<String>,
    /// Pinned clock for temporal phrases, seconds since the epoch. Temporal
    /// queries require it: the pipeline never reads the wall clock.
    pub now: Option<i64>,
    pub format: OutputFormat,
    /// Build the semantic index as part of loading (one-shot queries leave
    /// this off; the `index` command and the REPL's `:index` turn it on).
    pub use_index: bool,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            corpus: None,
            events: None,
            lexicon: None,
            categories: None,
            lsi_rank: 64,
            lsi_tol: 1e-9,
            lsi_max_iter: 500,
            resolve_threshold: crate::nlq::RESOLVE_THRESHOLD,
            graph_weight: 0.7,
            semantic_weight: 0.3,
            default_tenancy: Some("tn-main".to_owned()),
            now: None,
            format: OutputFormat::Table,
            use_index: false,
        }
    }
}

impl AppConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<AppConfig, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: AppConfig = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("bad config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.lsi_rank == 0 {
            return Err(PipelineError::Config("lsi_rank must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.resolve_threshold) {
            return Err(PipelineError::Config(
                "resolve_threshold must be in [0, 1]".into(),
            ));
        }
        if self.lsi_tol.is_nan() || self.lsi_tol <= 0.0 {
            return Err(PipelineError::Config("lsi_tol must be positive".into()));
        }
        for path in [&self.corpus, &self.events, &self.lexicon, &self.categories]
            .into_iter()
            .flatten()
        {
            if !path.exists() {
                return Err(PipelineError::MissingFile(path.display().to_string()));
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> ScoreWeights {
        ScoreWeights {
            graph: self.graph_weight,
            semantic: self.semantic_weight,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error("file not found: {0}")]
    MissingFile(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Categories(#[from] CategoryLexiconError),
    #[error(transparent)]
    Lsi(#[from] LsiError),
}

/// Errors from asking one question.
#[derive(Debug, Error)]
pub enum AskError {
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl From<AnswerError> for AskError {
    fn from(e: AnswerError) -> Self {
        match e {
            AnswerError::Exec(e) => AskError::Exec(e),
            AnswerError::Compile(e) => AskError::Compile(e),
        }
    }
}

/// A full response: the intent and compiled query (absent for direct IR
/// execution) plus the ranked answer.
#[derive(Debug)]
pub struct Asked {
    pub intent: Option<QueryIntent>,
    pub compiled: Option<CompiledQuery>,
    pub answer: Answer,
}

/// The assembled system: graph, lexicons, optional semantic index, and the
/// shared question-answering entry points. Reads are `&self`; a loaded
/// pipeline can serve concurrent queries.
#[derive(Clone)]
pub struct Pipeline {
    config: AppConfig,
    graph: KnowledgeGraph,
    lexicon: Lexicon,
    categories: CategoryLexicon,
    index: Option<(LsiModel, TermDocMatrix)>,
    folded_ids: HashMap<String, Vec<String>>,
    clock_now: i64,
    ingest_skips: usize,
}

impl Pipeline {
    /// Builds the pipeline from configuration: lexicons load and validate,
    /// then the corpus and event stream (when given) populate the graph,
    /// then the index is built if requested.
    pub fn new(config: AppConfig) -> Result<Pipeline, PipelineError> {
        config.validate()?;
        let taxonomy = Taxonomy::default();
        let lexicon = match &config.lexicon {
            Some(path) => Lexicon::from_file(path, &taxonomy, config.default_tenancy.as_deref())?,
            None => Lexicon::builtin(&taxonomy, config.default_tenancy.as_deref()),
        };
        let categories = match &config.categories {
            Some(path) => CategoryLexicon::from_file(path)?,
            None => CategoryLexicon::builtin(),
        };
        let mut pipeline = Pipeline {
            clock_now: config.now.unwrap_or(0),
            graph: KnowledgeGraph::new(taxonomy),
            lexicon,
            categories,
            index: None,
            folded_ids: HashMap::new(),
            config,
            ingest_skips: 0,
        };
        if let Some(corpus) = pipeline.config.corpus.clone() {
            pipeline.ingest_corpus_file(&corpus)?;
        }
        if let Some(events) = pipeline.config.events.clone() {
            let events = ingest::read_events(&events)?;
            pipeline.ingest_events(events)?;
        }
        if pipeline.config.use_index {
            pipeline.build_index()?;
        }
        Ok(pipeline)
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn categories(&self) -> &CategoryLexicon {
        &self.categories
    }

    pub fn config(&self) -> &AppConfig {
        &self.config
    }

    pub fn clock_now(&self) -> i64 {
        self.clock_now
    }

    pub fn set_clock_now(&mut self, now: i64) {
        self.clock_now = now;
    }

    pub fn index(&self) -> Option<Index<'_>> {
        self.index
            .as_ref()
            .map(|(model, matrix)| Index { model, matrix })
    }

    pub fn has_index(&self) -> bool {
        self.index.is_some()
    }

    /// Loads a corpus file into the graph (replacing nothing; documents
    /// upsert). Any previously built index is dropped as stale.
    pub fn ingest_corpus_file(
        &mut self,
        path: impl AsRef<Path>,
    ) -> Result<IngestReport, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(self.ingest_corpus_str(&text))
    }

    pub fn ingest_corpus_str(&mut self, text: &str) -> IngestReport {
        let report = ingest::load_corpus_into(&mut self.graph, text, Some(&self.categories));
        self.ingest_skips += report.skipped.len();
        self.after_mutation();
        report
    }

    pub fn ingest_events(
        &mut self,
        events: Vec<ChangeEvent>,
    ) -> Result<(u64, IngestReport), PipelineError> {
        let result = apply_events(&mut self.graph, events, Some(&self.categories))?;
        self.ingest_skips += result.1.skipped.len();
        self.after_mutation();
        Ok(result)
    }

    /// Lines skipped across every load so far.
    pub fn last_report_skips(&self) -> usize {
        self.ingest_skips
    }

    /// JSON dump of the fitted index (singular values, factors, vocabulary,
    /// document ids). For inspection; nothing reloads it.
    pub fn dump_index(&self) -> Result<String, PipelineError> {
        let Some((model, matrix)) = &self.index else {
            return Err(PipelineError::Config(
                "no index built; run `index` first".into(),
            ));
        };
        let dump = serde_json::json!({
            "rank": model.rank,
            "singular_values": model.singular_values,
            "vocabulary": matrix.vocabulary(),
            "doc_ids": matrix.doc_ids(),
            "term_factors": model.term_factors,
            "doc_factors": model.doc_factors,
        });
        Ok(serde_json::to_string_pretty(&dump).expect("model serializes"))
    }

    fn after_mutation(&mut self) {
        self.index = None;
        self.folded_ids.clear();
        for id in self.graph.node_ids() {
            self.folded_ids
                .entry(id.to_lowercase())
                .or_default()
                .push(id.to_owned());
        }
    }

    /// Builds (or rebuilds) the TF-IDF matrix and its truncated SVD. The
    /// configured rank is clamped to the matrix dimensions.
    pub fn build_index(&mut self) -> Result<(usize, usize, usize), PipelineError> {
        let matrix = build_matrix(&self.graph);
        let max_rank = matrix.n_terms().min(matrix.n_docs());
        if max_rank == 0 {
            self.index = None;
            return Ok((0, matrix.n_terms(), matrix.n_docs()));
        }
        let k = self.config.lsi_rank.min(max_rank);
        let model = truncated_svd(&matrix, k, self.config.lsi_tol, self.config.lsi_max_iter)?;
        let dims = (k, matrix.n_terms(), matrix.n_docs());
        self.index = Some((model, matrix));
        Ok(dims)
    }

    /// Step 1 plus enrichment: extract the intent, then resolve residual
    /// tokens — an exact (case-insensitive) node-id match becomes a
    /// direct-id condition; if no entity kind was recognized, the semantic
    /// index suggests one from the closest document.
    pub fn understand(&self, text: &str) -> Result<QueryIntent, AskError> {
        let mut intent = extract_intent(text, &self.lexicon, self.clock_now)?;

        let mut remaining = Vec::new();
        for term in std::mem::take(&mut intent.residual_terms) {
            let ids = self.folded_ids.get(&term).map(Vec::as_slice).unwrap_or(&[]);
            let unique = match ids {
                [one] => Some(one.clone()),
                many => many.iter().find(|id| id.as_str() == term).cloned(),
            };
            match unique.and_then(|id| self.graph.node(&id)) {
                Some(node) => {
                    intent.conditions.push(crate::nlq::IntentCondition {
                        kind: node.kind.clone(),
                        property: "id".into(),
                        value: PropertyValue::Text(node.id.clone()),
                        display: node.id.clone(),
                        confidence: 1.0,
                    });
                    if intent.entity_kinds.is_empty() {
                        intent.entity_kinds.push(node.kind.clone());
                    }
                    intent.note_consumed(&term);
                }
                None => remaining.push(term),
            }
        }

        if intent.entity_kinds.is_empty() {
            if let Some((model, matrix)) = &self.index {
                let mut resolved = None;
                for term in &remaining {
                    if let Resolution::Kind { kind, score } =
                        resolve_term(term, &self.lexicon, &self.graph, Some(model), Some(matrix))
                    {
                        if score >= self.config.resolve_threshold {
                            resolved = Some((term.clone(), kind, score));
                            break;
                        }
                    }
                }
                if let Some((term, kind, _)) = resolved {
                    intent.entity_kinds.push(kind);
                    remaining.retain(|t| t != &term);
                    intent.note_consumed(&term);
                }
            }
        }

        intent.residual_terms = remaining;
        Ok(intent)
    }

    /// The full Steps 1-5: understand, compile, execute strictly, relax if
    /// empty, rank, and render.
    pub fn ask(&self, text: &str) -> Result<Asked, AskError> {
        let intent = self.understand(text)?;
        let salient = |kind: &str| self.lexicon.salient_property(kind).to_owned();
        let compiled = compile_intent(&intent, self.graph.taxonomy(), salient)?;
        let answer = relaxed_answer(
            &self.graph,
            self.index(),
            self.config.weights(),
            &self.lexicon,
            self.graph.taxonomy(),
            &intent,
        )?;
        Ok(Asked {
            intent: Some(intent),
            compiled: Some(compiled),
            answer,
        })
    }

    /// Direct IR execution, bypassing natural-language processing.
    pub fn ask_ir(&self, ir_text: &str) -> Result<Asked, AskError> {
        let ir = parse_ir_text(ir_text)?;
        let bindings = execute(&self.graph, &ir)?;
        let answer = self.wrap_ir_results(&ir, bindings);
        Ok(Asked {
            intent: None,
            compiled: None,
            answer,
        })
    }

    fn wrap_ir_results(&self, ir: &GraphQueryIR, bindings: Vec<Binding>) -> Answer {
        let columns: Vec<String> = ir
            .returns
            .iter()
            .map(|item| match item {
                ReturnItem::Node(v) => v.clone(),
                ReturnItem::Property(v, p) => format!("{v}.{p}"),
            })
            .collect();
        let rows: Vec<Vec<String>> = bindings
            .iter()
            .map(|binding| {
                ir.returns
                    .iter()
                    .map(|item| match item {
                        ReturnItem::Node(v) => binding.get(v).unwrap_or("").to_owned(),
                        ReturnItem::Property(v, p) => binding
                            .get(v)
                            .and_then(|id| self.graph.node(id))
                            .and_then(|n| n.lookup(p))
                            .map(|value| value.render())
                            .unwrap_or_default(),
                    })
                    .collect()
            })
            .collect();
        let results = bindings
            .into_iter()
            .map(|binding| crate::answer::RankedResult {
                binding,
                projected: Vec::new(),
                score: self.config.graph_weight,
            })
            .collect();
        let total_count = rows.len();
        let summary = match total_count {
            1 => "1 binding matched.".to_owned(),
            n => format!("{n} bindings matched."),
        };
        Answer {
            table: crate::answer::ResultTable {
                columns,
                rows,
                total_count,
            },
            summary,
            results,
            approximate: false,
            graph_score: 1.0,
        }
    }

    /// Distinct anchor ids of an answer, in rank order — the retrieval
    /// output used by the evaluation harness.
    pub fn retrieve(&self, text: &str) -> Result<Vec<String>, AskError> {
        let asked = self.ask(text)?;
        let anchor = asked
            .compiled
            .as_ref()
            .map(|c| c.anchor_var.clone())
            .unwrap_or_else(|| "a".to_owned());
        let mut seen = Vec::new();
        for result in &asked.answer.results {
            if let Some(id) = result.binding.get(&anchor) {
                if !seen.iter().any(|s| s == id) {
                    seen.push(id.to_owned());
                }
            }
        }
        Ok(seen)
    }
}

impl QueryIntent {
    /// Marks every occurrence of a content term as consumed and refreshes
    /// the confidence ratio (used by pipeline enrichment).
    pub fn note_consumed(&mut self, term: &str) {
        let total = self.content_terms.len();
        if total == 0 {
            return;
        }
        let occurrences = self
            .content_terms
            .iter()
            .filter(|t| t.as_str() == term)
            .count();
        let consumed_before = (self.confidence * total as f64).round() as usize;
        let consumed = (consumed_before + occurrences).min(total);
        self.confidence = consumed as f64 / total as f64;
    }
}
