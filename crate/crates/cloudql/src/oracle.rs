//! Reference implementations and seeded generators backing the equivalence
//! test suites. Nothing here is part of the production query path: the dense
//! solver decomposes the full Gram matrix directly, and the generators
//! exist so the executor and SVD can be checked against independent
//! semantics on randomized inputs.
//!
//! Compiled only for tests (`test-oracles` feature or `cfg(test)`).

#![allow(clippy::needless_range_loop)]

use crate::lsi::{LsiModel, TermDocMatrix};
use crate::model::{KnowledgeGraph, PropertyValue, RelationshipEdge, ResourceNode};
use crate::query::{
    CompareOp, Direction, EdgePattern, GraphQueryIR, NodePattern, OrderBy, Predicate, ReturnItem,
    SortDirection,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Full SVD of a dense matrix, columns of `u`/`v` paired with `sigma`.
pub struct DenseSvd {
    pub sigma: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

/// Densifies a sparse term-document matrix into row-major `terms x docs`.
pub fn densify(matrix: &TermDocMatrix) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; matrix.n_docs()]; matrix.n_terms()];
    for d in 0..matrix.n_docs() {
        for &(t, w) in matrix.column(d) {
            rows[t as usize][d] = w;
        }
    }
    rows
}

pub fn frobenius(rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .flat_map(|r| r.iter().map(|x| x * x))
        .sum::<f64>()
        .sqrt()
}

/// Dense SVD via a cyclic Jacobi eigendecomposition of the full `W^T W`
/// matrix. Deliberately naive: no truncation, no sparsity, no subspace
/// tricks.
pub fn dense_svd(rows: &[Vec<f64>]) -> DenseSvd {
    let n_terms = rows.len();
    let n_docs = rows.first().map_or(0, Vec::len);

    // Gram matrix G = W^T W, docs x docs.
    let mut gram = vec![vec![0.0; n_docs]; n_docs];
    for (i, gi) in gram.iter_mut().enumerate() {
        for j in 0..n_docs {
            gi[j] = (0..n_terms).map(|t| rows[t][i] * rows[t][j]).sum();
        }
    }

    let (eigvals, eigvecs) = jacobi_full(&mut gram);

    let mut sigma = Vec::with_capacity(n_docs);
    let mut u = Vec::with_capacity(n_docs);
    let mut v = Vec::with_capacity(n_docs);
    for (r, &lambda) in eigvals.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        let v_col: Vec<f64> = (0..n_docs).map(|d| eigvecs[d][r]).collect();
        let mut u_col = vec![0.0; n_terms];
        for t in 0..n_terms {
            u_col[t] = (0..n_docs).map(|d| rows[t][d] * v_col[d]).sum();
        }
        if s > 0.0 {
            for x in u_col.iter_mut() {
                *x /= s;
            }
        }
        sigma.push(s);
        u.push(u_col);
        v.push(v_col);
    }
    DenseSvd { sigma, u, v }
}

/// Cyclic Jacobi on a dense symmetric matrix. Returns eigenvalues sorted
/// descending and eigenvectors as columns of the returned matrix
/// (`vecs[row][col]`).
fn jacobi_full(a: &mut [Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut vecs = vec![vec![0.0; n]; n];
    for (i, row) in vecs.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n == 0 {
        return (Vec::new(), vecs);
    }
    let frob = a
        .iter()
        .flat_map(|r| r.iter().map(|x| x * x))
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let (aip, aiq) = (a[i][p], a[i][q]);
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let (apj, aqj) = (a[p][j], a[q][j]);
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for row in vecs.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let eigvals: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let eigvecs: Vec<Vec<f64>> = vecs
        .iter()
        .map(|row| order.iter().map(|&i| row[i]).collect())
        .collect();
    (eigvals, eigvecs)
}

/// `||W - U S V^T||_F` for the first `k` factors of a fitted model.
pub fn reconstruction_error(rows: &[Vec<f64>], model: &LsiModel) -> f64 {
    let n_terms = rows.len();
    let n_docs = rows.first().map_or(0, Vec::len);
    let mut err = 0.0;
    for t in 0..n_terms {
        for d in 0..n_docs {
            let approx: f64 = (0..model.rank)
                .map(|i| {
                    model.singular_values[i] * model.term_factors[i][t] * model.doc_factors[i][d]
                })
                .sum();
            let diff = rows[t][d] - approx;
            err += diff * diff;
        }
    }
    err.sqrt()
}

const GEN_KINDS: &[&str] = &[
    "ComputeInstance",
    "Database",
    "Service",
    "Environment",
    "Vulnerability",
    "User",
];
const GEN_RELS: &[&str] = &[
    "DEPENDS_ON",
    "DEPLOYED_IN",
    "HAS_VULNERABILITY",
    "COMMUNICATES_WITH",
    "CREATED_BY",
];
const GEN_WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "prod", "staging", "edge"];

fn gen_cost(rng: &mut ChaCha8Rng) -> f64 {
    // Small discrete pool so equality predicates actually hit.
    rng.random_range(0..8) as f64 * 2.5
}

/// A random well-formed graph within the given size bounds.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, max_edges: usize) -> KnowledgeGraph {
    let mut graph = KnowledgeGraph::default();
    let n = rng.random_range(0..=max_nodes);
    let mut ids = Vec::with_capacity(n);
    for i in 0..n {
        let prefix = if rng.random_bool(0.25) { "N" } else { "n" };
        let id = format!("{prefix}{i:02}");
        let kind = GEN_KINDS[rng.random_range(0..GEN_KINDS.len())];
        let name = if rng.random_bool(0.5) {
            id.clone()
        } else {
            GEN_WORDS[rng.random_range(0..GEN_WORDS.len())].to_owned()
        };
        let mut node =
            ResourceNode::new(&id, kind, name).with_created_at(rng.random_range(1_000..2_000));
        if rng.random_bool(0.6) {
            node = node.with_property("cost", PropertyValue::Number(gen_cost(rng)));
        }
        if rng.random_bool(0.4) {
            let state = if rng.random_bool(0.5) {
                "running"
            } else {
                "stopped"
            };
            node = node.with_property("state", PropertyValue::Text(state.into()));
        }
        if rng.random_bool(0.3) {
            let words: Vec<&str> = (0..rng.random_range(1..3))
                .map(|_| GEN_WORDS[rng.random_range(0..GEN_WORDS.len())])
                .collect();
            node = node.with_description(words.join(" "));
        }
        graph.upsert_node(node).unwrap();
        ids.push(id);
    }
    if !ids.is_empty() {
        for _ in 0..rng.random_range(0..=max_edges) {
            let src = &ids[rng.random_range(0..ids.len())];
            let dst = &ids[rng.random_range(0..ids.len())];
            let rel = GEN_RELS[rng.random_range(0..GEN_RELS.len())];
            graph
                .add_edge(RelationshipEdge::new(src, rel, dst))
                .unwrap();
        }
    }
    graph
}

fn gen_value(rng: &mut ChaCha8Rng, property: &str) -> PropertyValue {
    match property {
        "cost" => PropertyValue::Number(gen_cost(rng)),
        "created_at" => {
            if rng.random_bool(0.5) {
                PropertyValue::Timestamp(rng.random_range(900..2_100))
            } else {
                PropertyValue::Number(rng.random_range(900..2_100) as f64)
            }
        }
        "state" => {
            let state = if rng.random_bool(0.5) {
                "running"
            } else {
                "stopped"
            };
            PropertyValue::Text(state.into())
        }
        _ => PropertyValue::Text(GEN_WORDS[rng.random_range(0..GEN_WORDS.len())].into()),
    }
}

/// A random valid query over the generator vocabulary: up to 3 variables,
/// 2 edge patterns, and 2 predicates, with optional ordering and limit.
pub fn random_ir(rng: &mut ChaCha8Rng) -> GraphQueryIR {
    let n_vars = rng.random_range(1..=3);
    let vars: Vec<String> = (0..n_vars).map(|i| format!("q{i}")).collect();

    let node_patterns: Vec<NodePattern> = vars
        .iter()
        .map(|var| {
            let mut p = NodePattern::new(var);
            if rng.random_bool(0.6) {
                p = p.with_label(GEN_KINDS[rng.random_range(0..GEN_KINDS.len())]);
            }
            if rng.random_bool(0.25) {
                let property = ["name", "state", "cost"][rng.random_range(0..3)];
                let value = gen_value(rng, property);
                p = p.with_prop(property, value);
            }
            p
        })
        .collect();

    let mut edge_patterns = Vec::new();
    if n_vars >= 1 {
        for _ in 0..rng.random_range(0..=2u32) {
            let src = rng.random_range(0..n_vars);
            let dst = if n_vars > 1 && rng.random_bool(0.9) {
                let mut d = rng.random_range(0..n_vars);
                while d == src && n_vars > 1 {
                    d = rng.random_range(0..n_vars);
                }
                d
            } else {
                src
            };
            let direction = match rng.random_range(0..3) {
                0 => Direction::Forward,
                1 => Direction::Backward,
                _ => Direction::Either,
            };
            edge_patterns.push(EdgePattern {
                src_var: vars[src].clone(),
                dst_var: vars[dst].clone(),
                rel_type: GEN_RELS[rng.random_range(0..GEN_RELS.len())].to_owned(),
                direction,
            });
        }
    }

    let ops = [
        CompareOp::Eq,
        CompareOp::Ne,
        CompareOp::Lt,
        CompareOp::Le,
        CompareOp::Gt,
        CompareOp::Ge,
    ];
    let mut predicates = Vec::new();
    for _ in 0..rng.random_range(0..=2u32) {
        let var = vars[rng.random_range(0..n_vars)].clone();
        let predicate = match rng.random_range(0..4) {
            0 | 1 => {
                let property = ["cost", "name", "created_at", "state"][rng.random_range(0..4)];
                Predicate::Compare {
                    var,
                    property: property.into(),
                    op: ops[rng.random_range(0..ops.len())],
                    value: gen_value(rng, property),
                }
            }
            2 => {
                let a = rng.random_range(900..2_000);
                let b = rng.random_range(a..2_100);
                Predicate::TimeWindow {
                    var,
                    property: "created_at".into(),
                    start: a,
                    end: b,
                }
            }
            _ => {
                let property = ["cost", "state", "zz_absent"][rng.random_range(0..3)];
                Predicate::Exists {
                    var,
                    property: property.into(),
                }
            }
        };
        predicates.push(predicate);
    }

    let mut returns = vec![ReturnItem::Node(vars[0].clone())];
    for var in vars.iter().skip(1) {
        if rng.random_bool(0.7) {
            if rng.random_bool(0.5) {
                returns.push(ReturnItem::Node(var.clone()));
            } else {
                returns.push(ReturnItem::Property(var.clone(), "name".into()));
            }
        }
    }

    let order_by = if rng.random_bool(0.3) {
        Some(OrderBy {
            var: vars[rng.random_range(0..n_vars)].clone(),
            property: ["cost", "name", "created_at"][rng.random_range(0..3)].into(),
            direction: if rng.random_bool(0.5) {
                SortDirection::Asc
            } else {
                SortDirection::Desc
            },
        })
    } else {
        None
    };
    let limit = if rng.random_bool(0.3) {
        Some(rng.random_range(1..=5))
    } else {
        None
    };

    let ir = GraphQueryIR {
        node_patterns,
        edge_patterns,
        predicates,
        returns,
        order_by,
        limit,
    };
    debug_assert!(ir.validate().is_ok());
    ir
}
