//! Graph-pattern query IR, its Cypher-flavored textual grammar, the pattern
//! executor, and a brute-force oracle for equivalence testing.
//!
//! A query is a set of node patterns (variables with optional label and
//! property constraints), edge patterns connecting them, a conjunction of
//! predicates, a projection list, and optional ordering/limit. The textual
//! form looks like:
//!
//! ```text
//! MATCH (ci:ComputeInstance)-[:DEPLOYED_IN]->(e:Environment {name:"Production"})
//! MATCH (ci)-[:HAS_VULNERABILITY]->(v:Vulnerability)
//! WHERE v.severity >= 7
//! RETURN ci.name, v.description
//! ORDER BY ci.name ASC
//! LIMIT 10
//! ```

mod exec;
mod parser;
mod printer;

pub use exec::{
    brute_force_execute, brute_force_execute_with_cap, execute, ExecError, DEFAULT_ASSIGNMENT_CAP,
};
pub use parser::{parse_ir_text, ParseError};
pub use printer::print_ir;

use crate::model::PropertyValue;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// One pattern variable: optional label plus property-equality constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePattern {
    pub var: String,
    pub label: Option<String>,
    pub prop_equals: BTreeMap<String, PropertyValue>,
}

impl NodePattern {
    pub fn new(var: impl Into<String>) -> Self {
        NodePattern {
            var: var.into(),
            label: None,
            prop_equals: BTreeMap::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_prop(mut self, key: impl Into<String>, value: PropertyValue) -> Self {
        self.prop_equals.insert(key.into(), value);
        self
    }
}

/// Traversal direction of an edge pattern relative to how it was written.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `(src)-[:REL]->(dst)`
    Forward,
    /// `(src)<-[:REL]-(dst)`: the stored edge runs dst to src.
    Backward,
    /// `(src)-[:REL]-(dst)`: either stored direction matches.
    Either,
}

/// A typed edge constraint between two declared variables.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePattern {
    pub src_var: String,
    pub dst_var: String,
    pub rel_type: String,
    pub direction: Direction,
}

/// Comparison operator for value predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "<>",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

/// A single conjunct of the WHERE clause. All predicates constrain one
/// variable; the executor treats cross-type comparisons as false.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Compare {
        var: String,
        property: String,
        op: CompareOp,
        value: PropertyValue,
    },
    /// Inclusive timestamp window, written `v.prop BETWEEN start AND end`.
    TimeWindow {
        var: String,
        property: String,
        start: i64,
        end: i64,
    },
    Exists {
        var: String,
        property: String,
    },
}

impl Predicate {
    pub fn var(&self) -> &str {
        match self {
            Predicate::Compare { var, .. }
            | Predicate::TimeWindow { var, .. }
            | Predicate::Exists { var, .. } => var,
        }
    }
}

/// A projection item: a whole node or one of its properties.
#[derive(Debug, Clone, PartialEq)]
pub enum ReturnItem {
    Node(String),
    Property(String, String),
}

impl ReturnItem {
    pub fn var(&self) -> &str {
        match self {
            ReturnItem::Node(v) => v,
            ReturnItem::Property(v, _) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortDirection {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderBy {
    pub var: String,
    pub property: String,
    pub direction: SortDirection,
}

/// The complete pattern query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphQueryIR {
    pub node_patterns: Vec<NodePattern>,
    pub edge_patterns: Vec<EdgePattern>,
    pub predicates: Vec<Predicate>,
    pub returns: Vec<ReturnItem>,
    pub order_by: Option<OrderBy>,
    pub limit: Option<usize>,
}

/// Structural defects in an IR (unbound variables, empty projection, …).
#[derive(Debug, Error, PartialEq)]
pub enum IrError {
    #[error("variable {0:?} is declared more than once")]
    DuplicateVar(String),
    #[error("variable {0:?} is referenced but never declared")]
    UndeclaredVar(String),
    #[error("the RETURN list is empty")]
    EmptyReturns,
    #[error("time window has start {start} after end {end}")]
    WindowOrder { start: i64, end: i64 },
    #[error("limit must be positive")]
    ZeroLimit,
}

impl GraphQueryIR {
    /// Checks the IR invariants: unique declarations, every referenced
    /// variable declared, a non-empty projection, ordered time windows, and
    /// a positive limit.
    pub fn validate(&self) -> Result<(), IrError> {
        let mut declared = std::collections::BTreeSet::new();
        for pattern in &self.node_patterns {
            if !declared.insert(pattern.var.as_str()) {
                return Err(IrError::DuplicateVar(pattern.var.clone()));
            }
        }
        let check = |var: &str| -> Result<(), IrError> {
            if declared.contains(var) {
                Ok(())
            } else {
                Err(IrError::UndeclaredVar(var.to_owned()))
            }
        };
        for edge in &self.edge_patterns {
            check(&edge.src_var)?;
            check(&edge.dst_var)?;
        }
        for predicate in &self.predicates {
            check(predicate.var())?;
            if let Predicate::TimeWindow { start, end, .. } = predicate {
                if start > end {
                    return Err(IrError::WindowOrder {
                        start: *start,
                        end: *end,
                    });
                }
            }
        }
        if self.returns.is_empty() {
            return Err(IrError::EmptyReturns);
        }
        for item in &self.returns {
            check(item.var())?;
        }
        if let Some(order) = &self.order_by {
            check(&order.var)?;
        }
        if self.limit == Some(0) {
            return Err(IrError::ZeroLimit);
        }
        Ok(())
    }

    /// Structural equality modulo variable names: variables are renamed by
    /// declaration order, edge directions are normalized to forward, and
    /// edge/predicate order is ignored. Node-pattern and RETURN order still
    /// matter (they define the projection).
    pub fn structurally_eq(&self, other: &GraphQueryIR) -> bool {
        self.canonical() == other.canonical()
    }

    fn canonical(&self) -> GraphQueryIR {
        let rename: BTreeMap<&str, String> = self
            .node_patterns
            .iter()
            .enumerate()
            .map(|(i, p)| (p.var.as_str(), format!("${i}")))
            .collect();
        let r = |v: &str| rename.get(v).cloned().unwrap_or_else(|| v.to_owned());

        let node_patterns = self
            .node_patterns
            .iter()
            .map(|p| NodePattern {
                var: r(&p.var),
                label: p.label.clone(),
                prop_equals: p.prop_equals.clone(),
            })
            .collect();

        let mut edge_patterns: Vec<EdgePattern> = self
            .edge_patterns
            .iter()
            .map(|e| match e.direction {
                Direction::Backward => EdgePattern {
                    src_var: r(&e.dst_var),
                    dst_var: r(&e.src_var),
                    rel_type: e.rel_type.clone(),
                    direction: Direction::Forward,
                },
                d => EdgePattern {
                    src_var: r(&e.src_var),
                    dst_var: r(&e.dst_var),
                    rel_type: e.rel_type.clone(),
                    direction: d,
                },
            })
            .collect();
        edge_patterns.sort_by(|a, b| {
            (&a.src_var, &a.rel_type, &a.dst_var).cmp(&(&b.src_var, &b.rel_type, &b.dst_var))
        });

        let mut predicates: Vec<Predicate> = self
            .predicates
            .iter()
            .map(|p| match p {
                Predicate::Compare {
                    var,
                    property,
                    op,
                    value,
                } => Predicate::Compare {
                    var: r(var),
                    property: property.clone(),
                    op: *op,
                    value: value.clone(),
                },
                Predicate::TimeWindow {
                    var,
                    property,
                    start,
                    end,
                } => Predicate::TimeWindow {
                    var: r(var),
                    property: property.clone(),
                    start: *start,
                    end: *end,
                },
                Predicate::Exists { var, property } => Predicate::Exists {
                    var: r(var),
                    property: property.clone(),
                },
            })
            .collect();
        predicates.sort_by_key(|p| format!("{p:?}"));

        GraphQueryIR {
            node_patterns,
            edge_patterns,
            predicates,
            returns: self
                .returns
                .iter()
                .map(|item| match item {
                    ReturnItem::Node(v) => ReturnItem::Node(r(v)),
                    ReturnItem::Property(v, p) => ReturnItem::Property(r(v), p.clone()),
                })
                .collect(),
            order_by: self.order_by.as_ref().map(|o| OrderBy {
                var: r(&o.var),
                property: o.property.clone(),
                direction: o.direction,
            }),
            limit: self.limit,
        }
    }
}

/// One row of match results: a total assignment of pattern variables to
/// node ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Binding(pub BTreeMap<String, String>);

impl Binding {
    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    /// Bound ids in the order the given variables were declared.
    pub fn id_tuple<'a>(&'a self, var_order: &[&str]) -> Vec<&'a str> {
        var_order.iter().filter_map(|v| self.get(v)).collect()
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, id)| format!("{v}={id}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
