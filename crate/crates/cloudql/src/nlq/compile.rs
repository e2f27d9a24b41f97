//! Translation of a [`QueryIntent`] into the graph query IR.
//!
//! The primary entity becomes the anchor pattern. Conditions constrain the
//! anchor directly when their kind matches it, merge into a filter variable
//! of the same kind when one exists, and otherwise become their own node
//! pattern reached over the taxonomy's canonical relationship. Filters and
//! attribution always add an edge to a fresh variable. Time windows become
//! predicates on the anchor; aggregation becomes ORDER BY + LIMIT.

use super::lexicon::ANCHOR_KIND;
use super::{AnchorSide, QueryIntent};
use crate::model::{Taxonomy, ANY_RESOURCE};
use crate::query::{
    Direction, EdgePattern, GraphQueryIR, NodePattern, OrderBy, Predicate, ReturnItem,
    SortDirection,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CompileError {
    #[error("no entity kind recognized; unresolved terms: {0:?}")]
    UncompilableIntent(Vec<String>),
    #[error("no canonical relationship reaches kind {0:?} from the anchor")]
    NoPathToKind(String),
}

/// Lexicon-independent view of what the result should display; carried next
/// to the IR so the answer layer can label columns and build summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledQuery {
    pub ir: GraphQueryIR,
    /// Kind (if any) behind each RETURN item, for header display.
    pub return_kinds: Vec<Option<String>>,
    /// The anchor variable name.
    pub anchor_var: String,
}

fn edge_for(anchor_var: &str, var: &str, rel_type: &str, side: AnchorSide) -> EdgePattern {
    match side {
        AnchorSide::Src => EdgePattern {
            src_var: anchor_var.to_owned(),
            dst_var: var.to_owned(),
            rel_type: rel_type.to_owned(),
            direction: Direction::Forward,
        },
        AnchorSide::Dst => EdgePattern {
            src_var: var.to_owned(),
            dst_var: anchor_var.to_owned(),
            rel_type: rel_type.to_owned(),
            direction: Direction::Forward,
        },
        AnchorSide::Either => EdgePattern {
            src_var: anchor_var.to_owned(),
            dst_var: var.to_owned(),
            rel_type: rel_type.to_owned(),
            direction: Direction::Either,
        },
    }
}

/// Compiles the intent against the taxonomy, with salient return properties
/// chosen by `salient_of` (kind -> property).
pub fn compile_intent(
    intent: &QueryIntent,
    taxonomy: &Taxonomy,
    salient_of: impl Fn(&str) -> String,
) -> Result<CompiledQuery, CompileError> {
    let Some(primary) = intent.entity_kinds.first() else {
        return Err(CompileError::UncompilableIntent(
            intent.residual_terms.clone(),
        ));
    };

    let anchor_var = "a".to_owned();
    let mut anchor = NodePattern::new(&anchor_var);
    let anchor_kind: Option<String> = (primary != ANY_RESOURCE).then(|| primary.clone());
    if let Some(kind) = &anchor_kind {
        anchor = anchor.with_label(kind.clone());
    }

    // Conditions that will ride on a filter variable of matching kind.
    let mut filter_props: Vec<Vec<(String, crate::model::PropertyValue)>> =
        vec![Vec::new(); intent.filters.len()];
    let mut condition_patterns: Vec<(NodePattern, EdgePattern)> = Vec::new();
    let mut next_condition = 0usize;

    for condition in &intent.conditions {
        let applies_to_anchor = condition.kind == ANCHOR_KIND
            || anchor_kind.as_deref() == Some(condition.kind.as_str());
        if applies_to_anchor {
            anchor = anchor.with_prop(condition.property.clone(), condition.value.clone());
            continue;
        }
        if let Some(slot) = intent
            .filters
            .iter()
            .position(|f| f.target_kind == condition.kind)
        {
            filter_props[slot].push((condition.property.clone(), condition.value.clone()));
            continue;
        }
        let Some((rel_type, anchor_is_src)) = taxonomy.condition_edge(&condition.kind) else {
            return Err(CompileError::NoPathToKind(condition.kind.clone()));
        };
        let var = format!("c{next_condition}");
        next_condition += 1;
        let pattern = NodePattern::new(&var)
            .with_label(condition.kind.clone())
            .with_prop(condition.property.clone(), condition.value.clone());
        let side = if anchor_is_src {
            AnchorSide::Src
        } else {
            AnchorSide::Dst
        };
        condition_patterns.push((pattern, edge_for(&anchor_var, &var, rel_type, side)));
    }

    let mut ir = GraphQueryIR::default();
    let mut return_kinds: Vec<Option<String>> = Vec::new();

    // Attribution compiles like a condition on a User node.
    if let Some(user) = &intent.attribution {
        let var = format!("c{next_condition}");
        let pattern = NodePattern::new(&var)
            .with_label("User")
            .with_prop("name", crate::model::PropertyValue::Text(user.clone()));
        condition_patterns.push((
            pattern,
            edge_for(&anchor_var, &var, "CREATED_BY", AnchorSide::Src),
        ));
    }

    ir.node_patterns.push(anchor);
    for (pattern, edge) in condition_patterns {
        ir.node_patterns.push(pattern);
        ir.edge_patterns.push(edge);
    }

    let mut filter_vars = Vec::new();
    for (i, filter) in intent.filters.iter().enumerate() {
        let var = format!("f{i}");
        let mut pattern = NodePattern::new(&var).with_label(filter.target_kind.clone());
        for (property, value) in filter_props[i].drain(..) {
            pattern = pattern.with_prop(property, value);
        }
        ir.node_patterns.push(pattern);
        ir.edge_patterns.push(edge_for(
            &anchor_var,
            &var,
            &filter.rel_type,
            filter.anchor_side,
        ));
        filter_vars.push((var, filter.target_kind.clone()));
    }

    if let Some(window) = &intent.time_window {
        ir.predicates.push(Predicate::TimeWindow {
            var: anchor_var.clone(),
            property: window.property.clone(),
            start: window.start,
            end: window.end,
        });
    }

    if let Some(agg) = &intent.aggregation {
        ir.order_by = Some(OrderBy {
            var: anchor_var.clone(),
            property: agg.property.clone(),
            direction: if agg.descending {
                SortDirection::Desc
            } else {
                SortDirection::Asc
            },
        });
        ir.limit = Some(agg.limit);
    }

    ir.returns
        .push(ReturnItem::Property(anchor_var.clone(), "name".into()));
    return_kinds.push(
        anchor_kind
            .clone()
            .or_else(|| Some(ANY_RESOURCE.to_owned())),
    );
    for (var, kind) in &filter_vars {
        ir.returns
            .push(ReturnItem::Property(var.clone(), salient_of(kind)));
        return_kinds.push(Some(kind.clone()));
    }

    debug_assert!(ir.validate().is_ok(), "compiled IR must be valid");
    Ok(CompiledQuery {
        ir,
        return_kinds,
        anchor_var,
    })
}
