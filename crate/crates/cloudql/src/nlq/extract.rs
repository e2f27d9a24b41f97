//! Longest-match phrase scanning over the token stream.
//!
//! Cue tables run in fixed precedence — temporal, attribution, aggregation,
//! relation, value, entity — so "last two weeks" can never be half-eaten by
//! an entity phrase. Within a table the longest match at each position
//! wins. Temporal phrases resolve against an injected clock, never the wall
//! clock.

use super::lexicon::{Lexicon, Slot};
use super::tokenize::{tokenize, Token};
use super::{Aggregation, IntentCondition, IntentFilter, QueryIntent, TimeWindowSpec};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("the query contains no tokens")]
    EmptyQuery,
}

/// Built-in attribution patterns ("by user X"). These are structural rather
/// than vocabulary, so they live in code instead of the lexicon file.
fn attribution_patterns() -> Vec<Vec<Slot>> {
    let w = |s: &str| Slot::Word(s.to_owned());
    vec![
        vec![w("created"), w("by"), w("user"), Slot::AnyToken],
        vec![w("by"), w("user"), Slot::AnyToken],
        vec![w("created"), w("by"), Slot::AnyToken],
        vec![w("owned"), w("by"), Slot::AnyToken],
    ]
}

fn parse_number(token: &str) -> Option<i64> {
    if let Ok(n) = token.parse::<i64>() {
        return (n >= 0).then_some(n.min(1_000_000_000));
    }
    let n = match token {
        "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        "twenty" => 20,
        "thirty" => 30,
        _ => return None,
    };
    Some(n)
}

fn parse_unit_seconds(token: &str) -> Option<i64> {
    match token {
        "hour" | "hours" => Some(3_600),
        "day" | "days" => Some(86_400),
        "week" | "weeks" => Some(604_800),
        "month" | "months" => Some(2_592_000),
        _ => None,
    }
}

struct SlotMatch {
    len: usize,
    number: Option<i64>,
    unit_seconds: Option<i64>,
    captured: Option<String>,
}

fn match_slots(
    tokens: &[Token],
    consumed: &[bool],
    start: usize,
    slots: &[Slot],
) -> Option<SlotMatch> {
    if start + slots.len() > tokens.len() {
        return None;
    }
    let mut m = SlotMatch {
        len: slots.len(),
        number: None,
        unit_seconds: None,
        captured: None,
    };
    for (offset, slot) in slots.iter().enumerate() {
        let idx = start + offset;
        if consumed[idx] {
            return None;
        }
        let text = tokens[idx].text.as_str();
        match slot {
            Slot::Word(w) => {
                if text != w {
                    return None;
                }
            }
            Slot::Number => m.number = Some(parse_number(text)?),
            Slot::Unit => m.unit_seconds = Some(parse_unit_seconds(text)?),
            Slot::AnyToken => m.captured = Some(text.to_owned()),
        }
    }
    Some(m)
}

/// Scans one cue table left to right, longest match first, consuming spans.
/// `apply` receives the position and the match for every hit.
fn scan_table<E>(
    tokens: &[Token],
    consumed: &mut [bool],
    entries: &[E],
    slots_of: impl Fn(&E) -> &[Slot],
    mut apply: impl FnMut(usize, &E, SlotMatch),
) {
    let mut i = 0;
    while i < tokens.len() {
        if consumed[i] {
            i += 1;
            continue;
        }
        let mut best: Option<(usize, SlotMatch)> = None;
        for (entry_idx, entry) in entries.iter().enumerate() {
            if let Some(m) = match_slots(tokens, consumed, i, slots_of(entry)) {
                let better = match &best {
                    None => true,
                    Some((prev_idx, prev)) => {
                        m.len > prev.len || (m.len == prev.len && entry_idx < *prev_idx)
                    }
                };
                if better {
                    best = Some((entry_idx, m));
                }
            }
        }
        if let Some((entry_idx, m)) = best {
            for c in consumed.iter_mut().skip(i).take(m.len) {
                *c = true;
            }
            let len = m.len;
            apply(i, &entries[entry_idx], m);
            i += len;
        } else {
            i += 1;
        }
    }
}

/// Extracts a [`QueryIntent`] from free text. Deterministic for a fixed
/// (text, lexicon, clock) triple.
pub fn extract_intent(
    text: &str,
    lexicon: &Lexicon,
    clock_now: i64,
) -> Result<QueryIntent, ExtractError> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(ExtractError::EmptyQuery);
    }
    let mut consumed = vec![false; tokens.len()];
    let mut intent = QueryIntent::default();
    let mut entity_hits: Vec<(usize, String)> = Vec::new();
    let mut condition_hits: Vec<(usize, IntentCondition)> = Vec::new();
    let mut filter_hits: Vec<(usize, IntentFilter)> = Vec::new();

    // 1. Temporal.
    scan_table(
        &tokens,
        &mut consumed,
        &lexicon.temporal_cues,
        |cue| &cue.slots,
        |_, cue, m| {
            if intent.time_window.is_none() {
                let span = m.number.unwrap_or(0) * m.unit_seconds.unwrap_or(0);
                intent.time_window = Some(TimeWindowSpec {
                    property: cue.property.clone(),
                    start: (clock_now - span).max(0),
                    end: clock_now,
                });
            }
        },
    );

    // 2. Attribution.
    let attribution = attribution_patterns();
    scan_table(
        &tokens,
        &mut consumed,
        &attribution,
        |slots| slots.as_slice(),
        |_, _, m| {
            if intent.attribution.is_none() {
                intent.attribution = m.captured;
            }
        },
    );

    // 3. Aggregation.
    scan_table(
        &tokens,
        &mut consumed,
        &lexicon.aggregation_cues,
        |cue| &cue.slots,
        |_, cue, m| {
            if intent.aggregation.is_none() {
                intent.aggregation = Some(Aggregation {
                    property: cue.property.clone(),
                    descending: cue.descending,
                    limit: m.number.unwrap_or(1).max(1) as usize,
                });
            }
        },
    );

    // 4. Relations.
    scan_table(
        &tokens,
        &mut consumed,
        &lexicon.relation_cues,
        |cue| &cue.slots,
        |pos, cue, _| {
            filter_hits.push((
                pos,
                IntentFilter {
                    rel_type: cue.rel_type.clone(),
                    target_kind: cue.target_kind.clone(),
                    anchor_side: cue.anchor_side,
                    display: cue.display.clone(),
                    confidence: 1.0,
                },
            ));
        },
    );

    // 5. Values.
    scan_table(
        &tokens,
        &mut consumed,
        &lexicon.value_cues,
        |cue| &cue.slots,
        |pos, cue, _| {
            for condition in &cue.conditions {
                condition_hits.push((
                    pos,
                    IntentCondition {
                        kind: condition.kind.clone(),
                        property: condition.property.clone(),
                        value: condition.value.clone(),
                        display: cue.display.clone(),
                        confidence: 1.0,
                    },
                ));
            }
        },
    );

    // 6. Entities.
    scan_table(
        &tokens,
        &mut consumed,
        &lexicon.entity_synonyms,
        |cue| &cue.slots,
        |pos, cue, _| entity_hits.push((pos, cue.kind.clone())),
    );

    entity_hits.sort_by_key(|(pos, _)| *pos);
    for (_, kind) in entity_hits {
        if !intent.entity_kinds.contains(&kind) {
            intent.entity_kinds.push(kind);
        }
    }
    condition_hits.sort_by_key(|(pos, _)| *pos);
    intent.conditions = condition_hits.into_iter().map(|(_, c)| c).collect();
    filter_hits.sort_by_key(|(pos, _)| *pos);
    intent.filters = filter_hits.into_iter().map(|(_, f)| f).collect();

    let mut total_content = 0usize;
    let mut consumed_content = 0usize;
    for (token, eaten) in tokens.iter().zip(&consumed) {
        intent
            .content_terms
            .extend((!token.stopword).then(|| token.text.clone()));
        if !token.stopword {
            total_content += 1;
            if *eaten {
                consumed_content += 1;
            } else if !intent.residual_terms.contains(&token.text) {
                intent.residual_terms.push(token.text.clone());
            }
        }
    }
    intent.confidence = if total_content == 0 {
        0.0
    } else {
        consumed_content as f64 / total_content as f64
    };

    Ok(intent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PropertyValue, Taxonomy};
    use crate::nlq::AnchorSide;

    fn lexicon() -> Lexicon {
        Lexicon::builtin(&Taxonomy::default(), Some("tn-main"))
    }

    const NOW: i64 = 1_750_000_000;

    #[test]
    fn worked_example_intent() {
        let intent = extract_intent(
            "List all compute instances in the production environment that have security vulnerabilities.",
            &lexicon(),
            NOW,
        )
        .unwrap();
        assert_eq!(intent.entity_kinds, vec!["ComputeInstance"]);
        assert_eq!(intent.conditions.len(), 1);
        assert_eq!(intent.conditions[0].kind, "Environment");
        assert_eq!(intent.conditions[0].property, "name");
        assert_eq!(
            intent.conditions[0].value,
            PropertyValue::Text("Production".into())
        );
        assert_eq!(intent.filters.len(), 1);
        assert_eq!(intent.filters[0].rel_type, "HAS_VULNERABILITY");
        assert_eq!(intent.filters[0].target_kind, "Vulnerability");
        assert!(intent.residual_terms.is_empty());
        assert_eq!(intent.confidence, 1.0);
    }

    #[test]
    fn temporal_window_and_attribution() {
        let intent = extract_intent(
            "List all compute instances created in the last two weeks by user X",
            &lexicon(),
            NOW,
        )
        .unwrap();
        let window = intent.time_window.expect("time window");
        assert_eq!(window.property, "created_at");
        assert_eq!(window.end, NOW);
        assert_eq!(window.start, NOW - 14 * 86_400);
        assert_eq!(intent.attribution.as_deref(), Some("x"));
        assert_eq!(intent.confidence, 1.0);
    }

    #[test]
    fn aggregation_with_scope_noop() {
        let intent = extract_intent(
            "What are the top 10 expensive resources in my cloud environment?",
            &lexicon(),
            NOW,
        )
        .unwrap();
        assert_eq!(intent.entity_kinds, vec!["AnyResource"]);
        let agg = intent.aggregation.expect("aggregation");
        assert_eq!(agg.property, "cost");
        assert!(agg.descending);
        assert_eq!(agg.limit, 10);
        assert!(intent.conditions.is_empty());
        assert_eq!(intent.confidence, 1.0);
    }

    #[test]
    fn nlb_fronting_query() {
        let intent = extract_intent(
            "list the NLB that fronts the CRM service in my production tenancy",
            &lexicon(),
            NOW,
        )
        .unwrap();
        assert_eq!(intent.entity_kinds, vec!["NLB"]);
        assert_eq!(intent.filters.len(), 1);
        assert_eq!(intent.filters[0].rel_type, "FRONTED_BY");
        assert_eq!(intent.filters[0].anchor_side, AnchorSide::Dst);
        let kinds: Vec<&str> = intent.conditions.iter().map(|c| c.kind.as_str()).collect();
        assert_eq!(kinds, vec!["Service", "Environment", "Tenancy"]);
        assert_eq!(
            intent.conditions[2].value,
            PropertyValue::Text("tn-main".into())
        );
        assert_eq!(intent.confidence, 1.0);
    }

    #[test]
    fn pci_financial_query() {
        let intent = extract_intent(
            "Which services handle financial transactions and are PCI compliant?",
            &lexicon(),
            NOW,
        )
        .unwrap();
        assert_eq!(intent.entity_kinds, vec!["Service"]);
        let kinds: Vec<&str> = intent.conditions.iter().map(|c| c.kind.as_str()).collect();
        assert_eq!(kinds, vec!["Service", "CompliancePolicy"]);
        assert_eq!(intent.confidence, 1.0);
    }

    #[test]
    fn bare_vulnerabilities_is_an_entity_not_a_filter() {
        let intent = extract_intent("list all vulnerabilities", &lexicon(), NOW).unwrap();
        assert_eq!(intent.entity_kinds, vec!["Vulnerability"]);
        assert!(intent.filters.is_empty());
    }

    #[test]
    fn gibberish_has_zero_confidence_and_full_residual() {
        let intent = extract_intent("frobnicate the wibbles", &lexicon(), NOW).unwrap();
        assert!(intent.entity_kinds.is_empty());
        assert_eq!(intent.residual_terms, vec!["frobnicate", "wibbles"]);
        assert_eq!(intent.confidence, 0.0);
    }

    #[test]
    fn empty_query_is_an_error() {
        assert_eq!(
            extract_intent("  ", &lexicon(), NOW).unwrap_err(),
            ExtractError::EmptyQuery
        );
    }

    #[test]
    fn longest_match_beats_sub_phrases() {
        // "production environment" must win over bare "production" so the
        // environment token is not left to the entity table.
        let intent = extract_intent("vms in the production environment", &lexicon(), NOW).unwrap();
        assert_eq!(intent.entity_kinds, vec!["ComputeInstance"]);
        assert_eq!(intent.conditions.len(), 1);
        assert_eq!(intent.confidence, 1.0);
    }

    #[test]
    fn paraphrases_share_the_intent_structure() {
        let lex = lexicon();
        let a = extract_intent(
            "List all compute instances in the production environment that have security vulnerabilities.",
            &lex,
            NOW,
        )
        .unwrap();
        let b = extract_intent("vms in production with vulnerabilities", &lex, NOW).unwrap();
        assert_eq!(a.entity_kinds, b.entity_kinds);
        assert_eq!(a.filters[0].rel_type, b.filters[0].rel_type);
        assert_eq!(a.conditions[0].kind, b.conditions[0].kind);
        assert_eq!(a.conditions[0].value, b.conditions[0].value);
    }

    #[test]
    fn clock_is_clamped_at_epoch_zero() {
        let intent =
            extract_intent("instances created in the last two weeks", &lexicon(), 100).unwrap();
        assert_eq!(intent.time_window.unwrap().start, 0);
    }
}
