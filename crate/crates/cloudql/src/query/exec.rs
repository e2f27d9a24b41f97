//! Pattern-match execution over the knowledge graph, plus a brute-force
//! reference executor used as the semantic oracle in tests.
//!
//! The executor seeds candidate sets from the label index, filters them with
//! per-variable predicates, then expands along edge patterns via the
//! adjacency indexes with backtracking. The brute-force path enumerates the
//! full assignment space and applies every constraint directly; aside from
//! the shared value semantics it is an independent implementation.

use super::{Binding, CompareOp, Direction, EdgePattern, GraphQueryIR, IrError, Predicate};
use crate::model::{KnowledgeGraph, PropertyValue};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

/// Default ceiling on the brute-force assignment space `|nodes|^|vars|`.
pub const DEFAULT_ASSIGNMENT_CAP: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ExecError {
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("unknown relationship type {0:?}")]
    UnknownRelType(String),
    #[error("assignment space {assignments} exceeds brute-force cap {cap}")]
    SizeCapExceeded { assignments: u64, cap: u64 },
}

/// Evaluates one predicate against the node bound to its variable. Missing
/// properties and cross-type comparisons make the predicate false rather
/// than an error, keeping execution total.
fn predicate_holds(graph: &KnowledgeGraph, predicate: &Predicate, node_id: &str) -> bool {
    let Some(node) = graph.node(node_id) else {
        return false;
    };
    match predicate {
        Predicate::Compare {
            property,
            op,
            value,
            ..
        } => {
            let Some(actual) = node.lookup(property) else {
                return false;
            };
            let Some(ordering) = actual.compare(value) else {
                return false; // UnknownComparison
            };
            match op {
                CompareOp::Eq => ordering == Ordering::Equal,
                CompareOp::Ne => ordering != Ordering::Equal,
                CompareOp::Lt => ordering == Ordering::Less,
                CompareOp::Le => ordering != Ordering::Greater,
                CompareOp::Gt => ordering == Ordering::Greater,
                CompareOp::Ge => ordering != Ordering::Less,
            }
        }
        Predicate::TimeWindow {
            property,
            start,
            end,
            ..
        } => match node.lookup(property) {
            Some(PropertyValue::Timestamp(t)) => t >= *start && t <= *end,
            Some(PropertyValue::Number(n)) => n >= *start as f64 && n <= *end as f64,
            _ => false,
        },
        Predicate::Exists { property, .. } => node.lookup(property).is_some(),
    }
}

fn node_matches_pattern(
    graph: &KnowledgeGraph,
    pattern_idx: usize,
    ir: &GraphQueryIR,
    id: &str,
) -> bool {
    let pattern = &ir.node_patterns[pattern_idx];
    let Some(node) = graph.node(id) else {
        return false;
    };
    if let Some(label) = &pattern.label {
        if &node.kind != label {
            return false;
        }
    }
    pattern
        .prop_equals
        .iter()
        .all(|(k, want)| node.lookup(k).is_some_and(|have| have.matches(want)))
}

fn edge_holds(graph: &KnowledgeGraph, edge: &EdgePattern, src_id: &str, dst_id: &str) -> bool {
    match edge.direction {
        Direction::Forward => graph.has_edge(src_id, &edge.rel_type, dst_id),
        Direction::Backward => graph.has_edge(dst_id, &edge.rel_type, src_id),
        Direction::Either => {
            graph.has_edge(src_id, &edge.rel_type, dst_id)
                || graph.has_edge(dst_id, &edge.rel_type, src_id)
        }
    }
}

fn check_vocabulary(graph: &KnowledgeGraph, ir: &GraphQueryIR) -> Result<(), ExecError> {
    for pattern in &ir.node_patterns {
        if let Some(label) = &pattern.label {
            if !graph.taxonomy().has_kind(label) {
                return Err(ExecError::UnknownLabel(label.clone()));
            }
        }
    }
    for edge in &ir.edge_patterns {
        if !graph.taxonomy().has_rel_type(&edge.rel_type) {
            return Err(ExecError::UnknownRelType(edge.rel_type.clone()));
        }
    }
    Ok(())
}

/// Deterministic result order: ORDER BY key first when present (missing
/// values sort last; ties fall through), then the bound-id tuple in pattern
/// declaration order under case-folded id ordering. Sort keys are computed
/// once per binding, not per comparison.
fn sort_bindings(graph: &KnowledgeGraph, ir: &GraphQueryIR, bindings: &mut Vec<Binding>) {
    let var_order: Vec<&str> = ir.node_patterns.iter().map(|p| p.var.as_str()).collect();
    let mut decorated: Vec<(Option<PropertyValue>, Vec<String>, Binding)> =
        std::mem::take(bindings)
            .into_iter()
            .map(|binding| {
                let order_key = ir.order_by.as_ref().and_then(|order| {
                    binding
                        .get(&order.var)
                        .and_then(|id| graph.node(id))
                        .and_then(|n| n.lookup(&order.property))
                });
                let fold_tuple: Vec<String> = var_order
                    .iter()
                    .map(|v| binding.get(v).unwrap_or("").to_lowercase())
                    .collect();
                (order_key, fold_tuple, binding)
            })
            .collect();

    let descending = matches!(
        ir.order_by.as_ref().map(|o| o.direction),
        Some(super::SortDirection::Desc)
    );
    decorated.sort_by(|(ka, fa, a), (kb, fb, b)| {
        if ir.order_by.is_some() {
            let cmp = match (ka, kb) {
                (Some(va), Some(vb)) => {
                    if descending {
                        vb.total_order(va)
                    } else {
                        va.total_order(vb)
                    }
                }
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            };
            if cmp != Ordering::Equal {
                return cmp;
            }
        }
        for (i, (la, lb)) in fa.iter().zip(fb).enumerate() {
            let cmp = la.cmp(lb).then_with(|| {
                let var = var_order[i];
                a.get(var).unwrap_or("").cmp(b.get(var).unwrap_or(""))
            });
            if cmp != Ordering::Equal {
                return cmp;
            }
        }
        Ordering::Equal
    });
    *bindings = decorated.into_iter().map(|(_, _, b)| b).collect();
}

/// Executes the query and returns all satisfying bindings in deterministic
/// order, with LIMIT applied last.
pub fn execute(graph: &KnowledgeGraph, ir: &GraphQueryIR) -> Result<Vec<Binding>, ExecError> {
    ir.validate()?;
    check_vocabulary(graph, ir)?;

    let n_vars = ir.node_patterns.len();
    let var_of = |name: &str| -> usize {
        ir.node_patterns
            .iter()
            .position(|p| p.var == name)
            .expect("validated var")
    };

    // Per-variable predicate push-down.
    let mut var_predicates: Vec<Vec<&Predicate>> = vec![Vec::new(); n_vars];
    for predicate in &ir.predicates {
        var_predicates[var_of(predicate.var())].push(predicate);
    }

    // Base candidates: label index when labeled, full scan otherwise, both
    // narrowed by property constraints and pushed-down predicates.
    let mut base: Vec<Vec<&str>> = Vec::with_capacity(n_vars);
    for (idx, pattern) in ir.node_patterns.iter().enumerate() {
        let pool: Vec<&str> = match &pattern.label {
            Some(label) => graph.nodes_with_kind(label).collect(),
            None => graph.node_ids().collect(),
        };
        let filtered: Vec<&str> = pool
            .into_iter()
            .filter(|id| node_matches_pattern(graph, idx, ir, id))
            .filter(|id| {
                var_predicates[idx]
                    .iter()
                    .all(|p| predicate_holds(graph, p, id))
            })
            .collect();
        if filtered.is_empty() {
            return Ok(Vec::new());
        }
        base.push(filtered);
    }
    let base_sets: Vec<HashSet<&str>> = base.iter().map(|v| v.iter().copied().collect()).collect();

    // Self-loop edge patterns reduce to per-variable filters.
    let mut self_edges: Vec<Vec<&EdgePattern>> = vec![Vec::new(); n_vars];
    let mut join_edges: Vec<(&EdgePattern, usize, usize)> = Vec::new();
    for edge in &ir.edge_patterns {
        let (s, d) = (var_of(&edge.src_var), var_of(&edge.dst_var));
        if s == d {
            self_edges[s].push(edge);
        } else {
            join_edges.push((edge, s, d));
        }
    }
    for idx in 0..n_vars {
        if !self_edges[idx].is_empty() {
            base[idx].retain(|id| self_edges[idx].iter().all(|e| edge_holds(graph, e, id, id)));
            if base[idx].is_empty() {
                return Ok(Vec::new());
            }
        }
    }

    // Join order: repeatedly take the most selective variable adjacent to
    // the chosen set, falling back to the globally smallest when the pattern
    // graph is disconnected.
    let mut order: Vec<usize> = Vec::with_capacity(n_vars);
    let mut chosen = vec![false; n_vars];
    while order.len() < n_vars {
        let adjacent: Vec<usize> = (0..n_vars)
            .filter(|&i| !chosen[i])
            .filter(|&i| {
                join_edges
                    .iter()
                    .any(|&(_, s, d)| (s == i && chosen[d]) || (d == i && chosen[s]))
            })
            .collect();
        let pool = if adjacent.is_empty() {
            (0..n_vars).filter(|&i| !chosen[i]).collect::<Vec<_>>()
        } else {
            adjacent
        };
        let next = pool
            .into_iter()
            .min_by_key(|&i| (base[i].len(), i))
            .expect("candidates remain");
        chosen[next] = true;
        order.push(next);
    }

    let mut results = Vec::new();
    let mut assignment: Vec<Option<&str>> = vec![None; n_vars];
    search(
        graph,
        ir,
        &base,
        &base_sets,
        &join_edges,
        &order,
        0,
        &mut assignment,
        &mut results,
    );

    sort_bindings(graph, ir, &mut results);
    if let Some(limit) = ir.limit {
        results.truncate(limit);
    }
    Ok(results)
}

#[allow(clippy::too_many_arguments)]
fn search<'g>(
    graph: &'g KnowledgeGraph,
    ir: &GraphQueryIR,
    base: &[Vec<&'g str>],
    base_sets: &[HashSet<&'g str>],
    join_edges: &[(&EdgePattern, usize, usize)],
    order: &[usize],
    depth: usize,
    assignment: &mut Vec<Option<&'g str>>,
    results: &mut Vec<Binding>,
) {
    if depth == order.len() {
        let map: BTreeMap<String, String> = ir
            .node_patterns
            .iter()
            .enumerate()
            .map(|(i, p)| (p.var.clone(), assignment[i].expect("total").to_owned()))
            .collect();
        results.push(Binding(map));
        return;
    }
    let var = order[depth];

    // Edges connecting this variable to already-bound ones. The first such
    // edge drives candidate enumeration through the adjacency index; the
    // rest act as filters.
    let bound_edges: Vec<&(&EdgePattern, usize, usize)> = join_edges
        .iter()
        .filter(|&&(_, s, d)| {
            (s == var && assignment[d].is_some()) || (d == var && assignment[s].is_some())
        })
        .collect();

    let candidates: Vec<&str> = match bound_edges.first() {
        None => base[var].clone(),
        Some(&&(edge, s, d)) => {
            let var_is_src = s == var;
            let anchor = assignment[if var_is_src { d } else { s }].expect("bound");
            let mut pool = Vec::new();
            match edge.direction {
                // Stored edge runs src -> dst: when var is the src we walk
                // the anchor's in-adjacency, otherwise its out-adjacency.
                Direction::Forward => {
                    collect_neighbors(graph, anchor, &edge.rel_type, !var_is_src, &mut pool)
                }
                // Stored edge runs dst -> src: the mirror image.
                Direction::Backward => {
                    collect_neighbors(graph, anchor, &edge.rel_type, var_is_src, &mut pool)
                }
                Direction::Either => {
                    collect_neighbors(graph, anchor, &edge.rel_type, true, &mut pool);
                    collect_neighbors(graph, anchor, &edge.rel_type, false, &mut pool);
                }
            }
            pool.sort();
            pool.dedup();
            pool.retain(|id| base_sets[var].contains(id));
            pool
        }
    };

    for id in candidates {
        let all_hold = bound_edges.iter().all(|&&(edge, s, d)| {
            let (src_id, dst_id) = if s == var {
                (id, assignment[d].expect("bound"))
            } else {
                (assignment[s].expect("bound"), id)
            };
            edge_holds(graph, edge, src_id, dst_id)
        });
        if !all_hold {
            continue;
        }
        assignment[var] = Some(id);
        search(
            graph,
            ir,
            base,
            base_sets,
            join_edges,
            order,
            depth + 1,
            assignment,
            results,
        );
        assignment[var] = None;
    }
}

fn collect_neighbors<'g>(
    graph: &'g KnowledgeGraph,
    anchor: &str,
    rel_type: &str,
    outgoing: bool,
    into: &mut Vec<&'g str>,
) {
    let list = if outgoing {
        graph.out_neighbors(anchor)
    } else {
        graph.in_neighbors(anchor)
    };
    into.extend(
        list.iter()
            .filter(|(rel, _)| rel == rel_type)
            .map(|(_, other)| other.as_str()),
    );
}

/// Brute-force reference executor with the default assignment-space cap.
pub fn brute_force_execute(
    graph: &KnowledgeGraph,
    ir: &GraphQueryIR,
) -> Result<Vec<Binding>, ExecError> {
    brute_force_execute_with_cap(graph, ir, DEFAULT_ASSIGNMENT_CAP)
}

/// Enumerates all `|nodes|^|vars|` assignments and filters by every pattern
/// and predicate. Semantically authoritative and deliberately naive.
pub fn brute_force_execute_with_cap(
    graph: &KnowledgeGraph,
    ir: &GraphQueryIR,
    cap: u64,
) -> Result<Vec<Binding>, ExecError> {
    ir.validate()?;
    check_vocabulary(graph, ir)?;

    let ids: Vec<&str> = graph.node_ids().collect();
    let n_vars = ir.node_patterns.len();
    let assignments = (ids.len() as u64)
        .checked_pow(n_vars as u32)
        .unwrap_or(u64::MAX);
    if assignments > cap {
        return Err(ExecError::SizeCapExceeded { assignments, cap });
    }
    if ids.is_empty() {
        return Ok(Vec::new());
    }

    let var_of = |name: &str| -> usize {
        ir.node_patterns
            .iter()
            .position(|p| p.var == name)
            .expect("validated var")
    };

    let mut results = Vec::new();
    let mut odometer = vec![0usize; n_vars];
    'outer: loop {
        let assigned: Vec<&str> = odometer.iter().map(|&i| ids[i]).collect();

        let ok = ir
            .node_patterns
            .iter()
            .enumerate()
            .all(|(i, _)| node_matches_pattern(graph, i, ir, assigned[i]))
            && ir.edge_patterns.iter().all(|edge| {
                edge_holds(
                    graph,
                    edge,
                    assigned[var_of(&edge.src_var)],
                    assigned[var_of(&edge.dst_var)],
                )
            })
            && ir
                .predicates
                .iter()
                .all(|p| predicate_holds(graph, p, assigned[var_of(p.var())]));
        if ok {
            let map: BTreeMap<String, String> = ir
                .node_patterns
                .iter()
                .enumerate()
                .map(|(i, p)| (p.var.clone(), assigned[i].to_owned()))
                .collect();
            results.push(Binding(map));
        }

        for slot in (0..n_vars).rev() {
            odometer[slot] += 1;
            if odometer[slot] < ids.len() {
                continue 'outer;
            }
            odometer[slot] = 0;
        }
        break;
    }

    sort_bindings(graph, ir, &mut results);
    if let Some(limit) = ir.limit {
        results.truncate(limit);
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RelationshipEdge, ResourceNode};
    use crate::query::parse_ir_text;

    fn golden_like_graph() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::default();
        let nodes = [
            (
                "ins-cloud-host-1427",
                "ComputeInstance",
                "ins-cloud-host-1427",
            ),
            (
                "Ins-cloud-host-2109",
                "ComputeInstance",
                "Ins-cloud-host-2109",
            ),
            ("ins-dev-3000", "ComputeInstance", "ins-dev-3000"),
            ("env-production", "Environment", "Production"),
            ("env-staging", "Environment", "Staging"),
            ("vuln-ssh", "Vulnerability", "Open SSH Port"),
            ("vuln-patch", "Vulnerability", "Unpatched software"),
        ];
        for (id, kind, name) in nodes {
            let mut n = ResourceNode::new(id, kind, name);
            if kind == "Vulnerability" {
                n = n.with_description(name);
            }
            g.upsert_node(n).unwrap();
        }
        for (s, r, d) in [
            ("ins-cloud-host-1427", "DEPLOYED_IN", "env-production"),
            ("Ins-cloud-host-2109", "DEPLOYED_IN", "env-production"),
            ("ins-dev-3000", "DEPLOYED_IN", "env-staging"),
            ("ins-cloud-host-1427", "HAS_VULNERABILITY", "vuln-ssh"),
            ("Ins-cloud-host-2109", "HAS_VULNERABILITY", "vuln-patch"),
        ] {
            g.add_edge(RelationshipEdge::new(s, r, d)).unwrap();
        }
        g
    }

    const WORKED_EXAMPLE: &str = r#"
        MATCH (ci:ComputeInstance)-[:DEPLOYED_IN]->(:Environment {name:"Production"})
        MATCH (ci)-[:HAS_VULNERABILITY]->(v:Vulnerability)
        RETURN ci.name, v.description
    "#;

    #[test]
    fn worked_example_finds_both_instances_in_order() {
        let g = golden_like_graph();
        let ir = parse_ir_text(WORKED_EXAMPLE).unwrap();
        let rows = execute(&g, &ir).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].get("ci"), Some("ins-cloud-host-1427"));
        assert_eq!(rows[0].get("v"), Some("vuln-ssh"));
        assert_eq!(rows[1].get("ci"), Some("Ins-cloud-host-2109"));
        assert_eq!(rows[1].get("v"), Some("vuln-patch"));
    }

    #[test]
    fn brute_force_agrees_on_worked_example() {
        let g = golden_like_graph();
        let ir = parse_ir_text(WORKED_EXAMPLE).unwrap();
        assert_eq!(
            execute(&g, &ir).unwrap(),
            brute_force_execute(&g, &ir).unwrap()
        );
    }

    #[test]
    fn empty_graph_yields_nothing() {
        let g = KnowledgeGraph::default();
        let ir = parse_ir_text("MATCH (n) RETURN n").unwrap();
        assert!(execute(&g, &ir).unwrap().is_empty());
        assert!(brute_force_execute(&g, &ir).unwrap().is_empty());
    }

    #[test]
    fn single_var_label_filter() {
        let g = golden_like_graph();
        let ir = parse_ir_text("MATCH (e:Environment) RETURN e").unwrap();
        let rows = brute_force_execute(&g, &ir).unwrap();
        let ids: Vec<&str> = rows.iter().filter_map(|b| b.get("e")).collect();
        assert_eq!(ids, vec!["env-production", "env-staging"]);
    }

    #[test]
    fn unknown_label_is_an_error() {
        let g = golden_like_graph();
        let ir = parse_ir_text("MATCH (n:Flooble) RETURN n").unwrap();
        assert_eq!(
            execute(&g, &ir).unwrap_err(),
            ExecError::UnknownLabel("Flooble".into())
        );
    }

    #[test]
    fn unknown_rel_type_is_an_error() {
        let g = golden_like_graph();
        let ir = parse_ir_text("MATCH (a)-[:FLORPS]->(b) RETURN a").unwrap();
        assert_eq!(
            execute(&g, &ir).unwrap_err(),
            ExecError::UnknownRelType("FLORPS".into())
        );
    }

    #[test]
    fn backward_direction_matches_stored_forward_edge() {
        let g = golden_like_graph();
        let ir = parse_ir_text(
            r#"MATCH (e:Environment {name:"Production"})<-[:DEPLOYED_IN]-(i:ComputeInstance) RETURN i"#,
        )
        .unwrap();
        let rows = execute(&g, &ir).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows, brute_force_execute(&g, &ir).unwrap());
    }

    #[test]
    fn either_direction_matches_both_ways() {
        let g = golden_like_graph();
        for text in [
            "MATCH (i:ComputeInstance)-[:HAS_VULNERABILITY]-(v:Vulnerability) RETURN i, v",
            "MATCH (v:Vulnerability)-[:HAS_VULNERABILITY]-(i:ComputeInstance) RETURN i, v",
        ] {
            let ir = parse_ir_text(text).unwrap();
            let rows = execute(&g, &ir).unwrap();
            assert_eq!(rows.len(), 2, "query {text}");
            assert_eq!(rows, brute_force_execute(&g, &ir).unwrap());
        }
    }

    #[test]
    fn limit_is_a_prefix_of_the_ordered_output() {
        let g = golden_like_graph();
        let full = execute(&g, &parse_ir_text("MATCH (n) RETURN n").unwrap()).unwrap();
        let limited = execute(&g, &parse_ir_text("MATCH (n) RETURN n LIMIT 3").unwrap()).unwrap();
        assert_eq!(limited.as_slice(), &full[..3]);
    }

    #[test]
    fn order_by_desc_with_missing_values_last() {
        let mut g = golden_like_graph();
        for (id, cost) in [("ins-cloud-host-1427", 10.0), ("Ins-cloud-host-2109", 30.0)] {
            let mut n = g.node(id).unwrap().clone();
            n.properties
                .insert("cost".into(), PropertyValue::Number(cost));
            g.upsert_node(n).unwrap();
        }
        let ir =
            parse_ir_text("MATCH (i:ComputeInstance) RETURN i.name ORDER BY i.cost DESC").unwrap();
        let rows = execute(&g, &ir).unwrap();
        let ids: Vec<&str> = rows.iter().filter_map(|b| b.get("i")).collect();
        assert_eq!(
            ids,
            vec!["Ins-cloud-host-2109", "ins-cloud-host-1427", "ins-dev-3000"]
        );
    }

    #[test]
    fn size_cap_is_enforced() {
        let g = golden_like_graph(); // 7 nodes, 3 vars = 343 assignments
        let ir = parse_ir_text("MATCH (a), (b), (c) RETURN a").unwrap();
        let err = brute_force_execute_with_cap(&g, &ir, 100).unwrap_err();
        assert!(matches!(
            err,
            ExecError::SizeCapExceeded {
                assignments: 343,
                cap: 100
            }
        ));
    }

    #[test]
    fn cross_type_comparison_is_false_not_an_error() {
        let g = golden_like_graph();
        let ir = parse_ir_text(r#"MATCH (n:Environment) WHERE n.name > 5 RETURN n"#).unwrap();
        assert!(execute(&g, &ir).unwrap().is_empty());
    }
}
