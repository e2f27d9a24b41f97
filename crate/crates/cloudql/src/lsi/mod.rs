//! Latent semantic index: TF-IDF term-document matrix over node text and a
//! from-scratch truncated SVD used for term resolution and relevance
//! scoring.
//!
//! One document per graph node: name, kind, description, and property values
//! concatenated, tokenized with the query tokenizer (stopwords dropped).
//! Weights are `tf * idf` with `tf = count / doc_length` and
//! `idf = ln(N / df)`.

mod svd;

pub use svd::{truncated_svd, LsiError};

use crate::model::{id_order, KnowledgeGraph};
use crate::nlq::tokenize::content_terms;
use std::collections::BTreeMap;

/// Sparse TF-IDF matrix, terms x documents, stored by document column.
#[derive(Debug, Clone)]
pub struct TermDocMatrix {
    vocabulary: Vec<String>,
    term_index: BTreeMap<String, u32>,
    doc_ids: Vec<String>,
    doc_frequencies: Vec<u32>,
    columns: Vec<Vec<(u32, f64)>>,
}

impl TermDocMatrix {
    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.term_index.get(term).copied()
    }

    pub fn doc_frequency(&self, term: &str) -> Option<u32> {
        self.term_id(term).map(|t| self.doc_frequencies[t as usize])
    }

    /// Inverse document frequency `ln(N / df)`.
    pub fn idf(&self, term_idx: u32) -> f64 {
        let n = self.n_docs() as f64;
        let df = self.doc_frequencies[term_idx as usize] as f64;
        (n / df).ln()
    }

    /// The TF-IDF weight at (term, doc); zero when the term is absent.
    pub fn weight(&self, term_idx: u32, doc_idx: usize) -> f64 {
        self.columns[doc_idx]
            .binary_search_by_key(&term_idx, |&(t, _)| t)
            .map(|pos| self.columns[doc_idx][pos].1)
            .unwrap_or(0.0)
    }

    pub fn column(&self, doc_idx: usize) -> &[(u32, f64)] {
        &self.columns[doc_idx]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.columns
            .iter()
            .flat_map(|col| col.iter().map(|&(_, w)| w * w))
            .sum::<f64>()
            .sqrt()
    }

    /// `y = W x`, mapping a document-space vector into term space.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for (d, col) in self.columns.iter().enumerate() {
            let xd = x[d];
            if xd == 0.0 {
                continue;
            }
            for &(t, w) in col {
                y[t as usize] += w * xd;
            }
        }
    }

    /// `y = W^T x`, mapping a term-space vector into document space.
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        for (d, col) in self.columns.iter().enumerate() {
            y[d] = col.iter().map(|&(t, w)| w * x[t as usize]).sum();
        }
    }

    /// Builds a matrix from dense rows (terms x docs) with synthetic names.
    /// Intended for tests and experiments; `build_matrix` is the production
    /// path.
    pub fn from_dense(rows: &[Vec<f64>]) -> TermDocMatrix {
        let n_terms = rows.len();
        let n_docs = rows.first().map_or(0, Vec::len);
        let vocabulary: Vec<String> = (0..n_terms).map(|t| format!("t{t:04}")).collect();
        let doc_ids: Vec<String> = (0..n_docs).map(|d| format!("d{d:04}")).collect();
        let term_index = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let mut columns = vec![Vec::new(); n_docs];
        let mut doc_frequencies = vec![0u32; n_terms];
        for (t, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_docs, "ragged dense matrix");
            for (d, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    columns[d].push((t as u32, w));
                    doc_frequencies[t] += 1;
                }
            }
        }
        TermDocMatrix {
            vocabulary,
            term_index,
            doc_ids,
            doc_frequencies,
            columns,
        }
    }

    /// TF-IDF vector of a bag of terms, for query folding. Unknown terms are
    /// dropped; tf normalizes by the full term-list length.
    pub fn vectorize(&self, terms: &[String]) -> Vec<(u32, f64)> {
        if terms.is_empty() {
            return Vec::new();
        }
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for term in terms {
            if let Some(t) = self.term_id(term) {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        let len = terms.len() as f64;
        counts
            .into_iter()
            .map(|(t, c)| (t, (c as f64 / len) * self.idf(t)))
            .collect()
    }
}

/// Builds the TF-IDF matrix over every node document in the graph.
pub fn build_matrix(graph: &KnowledgeGraph) -> TermDocMatrix {
    let docs: Vec<(String, Vec<String>)> = graph
        .nodes()
        .map(|n| (n.id.clone(), content_terms(&n.indexing_text())))
        .collect();

    let mut term_index: BTreeMap<String, u32> = BTreeMap::new();
    for (_, terms) in &docs {
        for term in terms {
            let next = term_index.len() as u32;
            term_index.entry(term.clone()).or_insert(next);
        }
    }
    // Re-number so vocabulary order is sorted (BTreeMap iteration order).
    let vocabulary: Vec<String> = term_index.keys().cloned().collect();
    for (i, term) in vocabulary.iter().enumerate() {
        *term_index.get_mut(term).unwrap() = i as u32;
    }

    let n_docs = docs.len();
    let mut doc_frequencies = vec![0u32; vocabulary.len()];
    let mut raw_columns: Vec<BTreeMap<u32, u32>> = Vec::with_capacity(n_docs);
    for (_, terms) in &docs {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for term in terms {
            *counts.entry(term_index[term]).or_insert(0) += 1;
        }
        for &t in counts.keys() {
            doc_frequencies[t as usize] += 1;
        }
        raw_columns.push(counts);
    }

    let columns: Vec<Vec<(u32, f64)>> = raw_columns
        .iter()
        .zip(&docs)
        .map(|(counts, (_, terms))| {
            let len = terms.len() as f64;
            counts
                .iter()
                .map(|(&t, &c)| {
                    let tf = c as f64 / len;
                    let idf = (n_docs as f64 / doc_frequencies[t as usize] as f64).ln();
                    (t, tf * idf)
                })
                .filter(|&(_, w)| w != 0.0)
                .collect()
        })
        .collect();

    TermDocMatrix {
        vocabulary,
        term_index,
        doc_ids: docs.into_iter().map(|(id, _)| id).collect(),
        doc_frequencies,
        columns,
    }
}

/// Rank-k factorization of a [`TermDocMatrix`]. Columns of `term_factors`
/// and `doc_factors` are orthonormal; singular values are non-increasing.
#[derive(Debug, Clone)]
pub struct LsiModel {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Left singular vectors; `term_factors[i]` has one entry per term.
    pub term_factors: Vec<Vec<f64>>,
    /// Right singular vectors; `doc_factors[i]` has one entry per document.
    pub doc_factors: Vec<Vec<f64>>,
    /// Per-document latent vectors, scaled by the singular values.
    pub doc_latent: Vec<Vec<f64>>,
}

impl LsiModel {
    pub fn doc_latent_vector(&self, doc_idx: usize) -> &[f64] {
        &self.doc_latent[doc_idx]
    }
}

/// Folds a bag of terms into the latent space: `q_latent = S^-1 U^T q`.
/// All-unknown (or empty) term lists map to the zero vector.
pub fn embed_query(model: &LsiModel, matrix: &TermDocMatrix, terms: &[String]) -> Vec<f64> {
    let q = matrix.vectorize(terms);
    let mut latent = vec![0.0; model.rank];
    if q.is_empty() {
        return latent;
    }
    let sigma_floor = model.singular_values.first().copied().unwrap_or(0.0) * 1e-12;
    for (i, u) in model.term_factors.iter().enumerate() {
        let dot: f64 = q.iter().map(|&(t, w)| u[t as usize] * w).sum();
        let sigma = model.singular_values[i];
        latent[i] = if sigma > sigma_floor && sigma > 0.0 {
            dot / sigma
        } else {
            0.0
        };
    }
    latent
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Top-k documents by cosine similarity against a latent query vector.
/// Zero-norm vectors score 0; ties break by document id.
pub fn top_k_similar(
    model: &LsiModel,
    matrix: &TermDocMatrix,
    query_latent: &[f64],
    k: usize,
) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = matrix
        .doc_ids()
        .iter()
        .enumerate()
        .map(|(d, id)| (id.clone(), cosine(query_latent, model.doc_latent_vector(d))))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| id_order(&a.0, &b.0))
    });
    scored.truncate(k);
    scored
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ResourceNode;

    fn graph_of(docs: &[(&str, &str)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::default();
        for (id, text) in docs {
            g.upsert_node(ResourceNode::new(*id, "Service", "").with_description(*text))
                .unwrap();
        }
        g
    }

    #[test]
    fn disjoint_vocab_gives_block_diagonal_weights() {
        let g = graph_of(&[("a", "alpha beta"), ("b", "gamma delta")]);
        let m = build_matrix(&g);
        // "service" (the kind) hits both docs and has idf 0; every other
        // term is nonzero in exactly one column.
        for (t, term) in m.vocabulary().iter().enumerate() {
            if term == "service" {
                continue;
            }
            let nonzero: Vec<usize> = (0..m.n_docs())
                .filter(|&d| m.weight(t as u32, d) != 0.0)
                .collect();
            assert_eq!(nonzero.len(), 1, "term {term} should hit exactly one doc");
        }
    }

    #[test]
    fn term_in_every_document_has_zero_idf_row() {
        let g = graph_of(&[
            ("a", "shared alpha"),
            ("b", "shared beta"),
            ("c", "shared gamma"),
        ]);
        let m = build_matrix(&g);
        let t = m.term_id("shared").unwrap();
        assert_eq!(m.doc_frequency("shared"), Some(3));
        assert_eq!(m.idf(t), 0.0);
        for d in 0..m.n_docs() {
            assert_eq!(m.weight(t, d), 0.0);
        }
    }

    /// Hand computation over three documents (the Service kind token adds
    /// one term per doc, so lengths are 4, 3, 4):
    ///   d1: "apple banana apple" + service -> apple 2/4, banana 1/4
    ///   d2: "banana cherry"      + service -> banana 1/3, cherry 1/3
    ///   d3: "cherry apple cherry"+ service -> cherry 2/4, apple 1/4
    /// df(apple) = df(banana) = df(cherry) = 2, so idf = ln(3/2).
    #[test]
    fn toy_corpus_matches_hand_computed_tfidf() {
        let g = graph_of(&[
            ("d1", "apple banana apple"),
            ("d2", "banana cherry"),
            ("d3", "cherry apple cherry"),
        ]);
        let m = build_matrix(&g);
        let idf = (3.0f64 / 2.0).ln();
        let apple = m.term_id("apple").unwrap();
        let banana = m.term_id("banana").unwrap();
        let cherry = m.term_id("cherry").unwrap();
        let eps = 1e-12;
        assert!((m.weight(apple, 0) - 2.0 / 4.0 * idf).abs() < eps);
        assert!((m.weight(banana, 0) - 1.0 / 4.0 * idf).abs() < eps);
        assert_eq!(m.weight(cherry, 0), 0.0);
        assert!((m.weight(banana, 1) - 1.0 / 3.0 * idf).abs() < eps);
        assert!((m.weight(cherry, 1) - 1.0 / 3.0 * idf).abs() < eps);
        assert!((m.weight(cherry, 2) - 2.0 / 4.0 * idf).abs() < eps);
        assert!((m.weight(apple, 2) - 1.0 / 4.0 * idf).abs() < eps);
    }

    #[test]
    fn idf_is_monotone_in_document_frequency() {
        let g_low = graph_of(&[("a", "rare alpha"), ("b", "beta"), ("c", "gamma")]);
        let g_high = graph_of(&[("a", "rare alpha"), ("b", "rare beta"), ("c", "gamma")]);
        let m_low = build_matrix(&g_low);
        let m_high = build_matrix(&g_high);
        let t_low = m_low.term_id("rare").unwrap();
        let t_high = m_high.term_id("rare").unwrap();
        assert!(m_high.idf(t_high) <= m_low.idf(t_low));
    }

    #[test]
    fn empty_text_node_contributes_nothing() {
        let mut g = graph_of(&[("a", "alpha beta")]);
        g.upsert_node(ResourceNode::new("empty", "Service", ""))
            .unwrap();
        let m = build_matrix(&g);
        let d = m.doc_ids().iter().position(|id| id == "empty").unwrap();
        let alpha = m.term_id("alpha").unwrap();
        assert_eq!(m.weight(alpha, d), 0.0);
    }

    fn toy_model() -> (TermDocMatrix, LsiModel, Vec<Vec<String>>) {
        let texts = [
            ("doc-a", "postgres database storing orders payments billing"),
            ("doc-b", "virtual machine serving the web tier traffic"),
            ("doc-c", "object storage bucket holding nightly backups"),
            ("doc-d", "load balancer spreading requests across machines"),
        ];
        let g = graph_of(&texts.map(|(id, t)| (id, t)));
        let m = build_matrix(&g);
        let model = truncated_svd(&m, 4, 1e-10, 500).unwrap();
        let term_lists = texts
            .iter()
            .map(|(_, t)| crate::nlq::tokenize::content_terms(t))
            .collect();
        (m, model, term_lists)
    }

    /// Exhaustive-cosine check: folding a document's own text into the
    /// latent space puts that document at least as close as every other.
    #[test]
    fn own_text_embedding_ranks_the_document_first() {
        let (m, model, term_lists) = toy_model();
        for (d, terms) in term_lists.iter().enumerate() {
            let q = embed_query(&model, &m, terms);
            let own = cosine(&q, model.doc_latent_vector(d));
            for other in 0..m.n_docs() {
                let score = cosine(&q, model.doc_latent_vector(other));
                assert!(
                    own + 1e-12 >= score,
                    "doc {d}: own cosine {own} beaten by doc {other} ({score})"
                );
            }
            assert_eq!(top_k_similar(&model, &m, &q, 1)[0].0, m.doc_ids()[d]);
        }
    }

    #[test]
    fn unknown_and_empty_terms_embed_to_zero() {
        let (m, model, _) = toy_model();
        let zz = embed_query(&model, &m, &["zzqx".into(), "qqzz".into()]);
        assert!(zz.iter().all(|&x| x == 0.0));
        let empty = embed_query(&model, &m, &[]);
        assert!(empty.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_query_scores_everything_zero_in_id_order() {
        let (m, model, _) = toy_model();
        let zero = vec![0.0; model.rank];
        let ranked = top_k_similar(&model, &m, &zero, 10);
        assert_eq!(ranked.len(), m.n_docs(), "k beyond corpus returns all docs");
        assert!(ranked.iter().all(|(_, score)| *score == 0.0));
        let ids: Vec<&str> = ranked.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, vec!["doc-a", "doc-b", "doc-c", "doc-d"]);
    }
}
