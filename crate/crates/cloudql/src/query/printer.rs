//! Canonical textual form of a query IR. `parse_ir_text(print_ir(ir))`
//! reproduces `ir` structurally.

use super::{Direction, GraphQueryIR, Predicate, ReturnItem, SortDirection};
use crate::model::PropertyValue;
use std::fmt::Write;

/// Renders the IR in canonical form: one MATCH clause declaring every node
/// pattern, one MATCH clause carrying the edges, then WHERE / RETURN /
/// ORDER BY / LIMIT as applicable.
pub fn print_ir(ir: &GraphQueryIR) -> String {
    let mut out = String::new();

    let patterns: Vec<String> = ir
        .node_patterns
        .iter()
        .map(|p| {
            let mut s = format!("({}", p.var);
            if let Some(label) = &p.label {
                let _ = write!(s, ":{label}");
            }
            if !p.prop_equals.is_empty() {
                let body: Vec<String> = p
                    .prop_equals
                    .iter()
                    .map(|(k, v)| format!("{}: {}", print_key(k), print_literal(v)))
                    .collect();
                let _ = write!(s, " {{{}}}", body.join(", "));
            }
            s.push(')');
            s
        })
        .collect();
    let _ = write!(out, "MATCH {}", patterns.join(", "));

    if !ir.edge_patterns.is_empty() {
        let edges: Vec<String> = ir
            .edge_patterns
            .iter()
            .map(|e| match e.direction {
                Direction::Forward => {
                    format!("({})-[:{}]->({})", e.src_var, e.rel_type, e.dst_var)
                }
                Direction::Backward => {
                    format!("({})<-[:{}]-({})", e.src_var, e.rel_type, e.dst_var)
                }
                Direction::Either => {
                    format!("({})-[:{}]-({})", e.src_var, e.rel_type, e.dst_var)
                }
            })
            .collect();
        let _ = write!(out, "\nMATCH {}", edges.join(", "));
    }

    if !ir.predicates.is_empty() {
        let preds: Vec<String> = ir
            .predicates
            .iter()
            .map(|p| match p {
                Predicate::Compare {
                    var,
                    property,
                    op,
                    value,
                } => {
                    format!("{var}.{property} {} {}", op.symbol(), print_literal(value))
                }
                Predicate::TimeWindow {
                    var,
                    property,
                    start,
                    end,
                } => {
                    format!("{var}.{property} BETWEEN {start} AND {end}")
                }
                Predicate::Exists { var, property } => format!("EXISTS({var}.{property})"),
            })
            .collect();
        let _ = write!(out, "\nWHERE {}", preds.join(" AND "));
    }

    let returns: Vec<String> = ir
        .returns
        .iter()
        .map(|item| match item {
            ReturnItem::Node(v) => v.clone(),
            ReturnItem::Property(v, p) => format!("{v}.{p}"),
        })
        .collect();
    let _ = write!(out, "\nRETURN {}", returns.join(", "));

    if let Some(order) = &ir.order_by {
        let dir = match order.direction {
            SortDirection::Asc => "ASC",
            SortDirection::Desc => "DESC",
        };
        let _ = write!(out, "\nORDER BY {}.{} {dir}", order.var, order.property);
    }
    if let Some(limit) = ir.limit {
        let _ = write!(out, "\nLIMIT {limit}");
    }
    out
}

fn is_plain_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|seg| {
            let mut chars = seg.chars();
            match chars.next() {
                Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
                _ => return false,
            }
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        })
}

fn print_key(key: &str) -> String {
    if is_plain_key(key) {
        key.to_owned()
    } else {
        print_literal(&PropertyValue::Text(key.to_owned()))
    }
}

fn print_literal(value: &PropertyValue) -> String {
    match value {
        PropertyValue::Text(s) => {
            let mut quoted = String::with_capacity(s.len() + 2);
            quoted.push('"');
            for c in s.chars() {
                match c {
                    '"' => quoted.push_str("\\\""),
                    '\\' => quoted.push_str("\\\\"),
                    '\n' => quoted.push_str("\\n"),
                    '\t' => quoted.push_str("\\t"),
                    '\r' => quoted.push_str("\\r"),
                    c => quoted.push(c),
                }
            }
            quoted.push('"');
            quoted
        }
        PropertyValue::Number(n) => format!("{n}"),
        PropertyValue::Bool(b) => b.to_string(),
        PropertyValue::Timestamp(t) => format!("timestamp({t})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_ir_text;

    #[test]
    fn worked_example_round_trips() {
        let ir = parse_ir_text(
            r#"MATCH (ci:ComputeInstance)-[:DEPLOYED_IN]->(:Environment {name:"Production"})
               MATCH (ci)-[:HAS_VULNERABILITY]->(v:Vulnerability)
               RETURN ci.name, v.description"#,
        )
        .unwrap();
        let printed = print_ir(&ir);
        let reparsed = parse_ir_text(&printed).unwrap();
        assert_eq!(ir, reparsed);
        assert!(ir.structurally_eq(&reparsed));
    }

    #[test]
    fn no_predicates_means_no_where() {
        let ir = parse_ir_text("MATCH (n:NLB) RETURN n").unwrap();
        let printed = print_ir(&ir);
        assert!(!printed.contains("WHERE"));
        assert_eq!(parse_ir_text(&printed).unwrap(), ir);
    }

    #[test]
    fn exotic_values_round_trip() {
        let ir = parse_ir_text(
            r#"MATCH (a {note:"line\nbreak \"q\"", "dotted.key": 0.5, flag: false, at: timestamp(7)})
               WHERE a.cost >= -2.25
               RETURN a
               ORDER BY a.cost ASC
               LIMIT 3"#,
        )
        .unwrap();
        let printed = print_ir(&ir);
        assert_eq!(parse_ir_text(&printed).unwrap(), ir);
    }
}
