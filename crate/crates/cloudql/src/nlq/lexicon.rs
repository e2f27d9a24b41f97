//! The intent lexicon: data-driven cue tables mapping surface phrases to
//! entity kinds, relationship filters, value conditions, aggregations, and
//! time windows, plus display names and salient properties used when
//! rendering answers.
//!
//! Loaded from JSON and validated against the taxonomy up front so a typo in
//! the file fails at startup, not mid-query. The `$default_tenancy` sentinel
//! in condition values is substituted from configuration at load time;
//! entries that need it are dropped when no default tenancy is configured.

use crate::model::{PropertyValue, Taxonomy, ANY_RESOURCE};
use crate::nlq::tokenize::tokenize;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Sentinel kind in value cues meaning "apply to the query anchor".
pub const ANCHOR_KIND: &str = "$anchor";

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad lexicon: {0}")]
    Parse(String),
    #[error("{table} entry {entry:?}: {reason}")]
    BadEntry {
        table: &'static str,
        entry: String,
        reason: String,
    },
}

/// One slot of a compiled cue pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    Word(String),
    Number,
    Unit,
    AnyToken,
}

pub fn compile_pattern(table: &'static str, pattern: &str) -> Result<Vec<Slot>, LexiconError> {
    let mut slots = Vec::new();
    for word in pattern.split_whitespace() {
        let slot = match word {
            "<n>" => Slot::Number,
            "<unit>" => Slot::Unit,
            "<t>" => Slot::AnyToken,
            plain => {
                let toks = tokenize(plain);
                if toks.len() != 1 {
                    return Err(LexiconError::BadEntry {
                        table,
                        entry: pattern.to_owned(),
                        reason: format!("{plain:?} is not a single token"),
                    });
                }
                Slot::Word(toks[0].text.clone())
            }
        };
        slots.push(slot);
    }
    if slots.is_empty() {
        return Err(LexiconError::BadEntry {
            table,
            entry: pattern.to_owned(),
            reason: "pattern has no tokens".into(),
        });
    }
    Ok(slots)
}

#[derive(Debug, Clone)]
pub struct EntityCue {
    pub slots: Vec<Slot>,
    pub kind: String,
}

/// Which side of the stored edge the query anchor takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorSide {
    Src,
    Dst,
    Either,
}

#[derive(Debug, Clone)]
pub struct RelationCue {
    pub slots: Vec<Slot>,
    pub rel_type: String,
    pub target_kind: String,
    pub anchor_side: AnchorSide,
    pub display: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueCondition {
    pub kind: String,
    pub property: String,
    pub value: PropertyValue,
}

#[derive(Debug, Clone)]
pub struct ValueCue {
    pub slots: Vec<Slot>,
    pub display: String,
    pub conditions: Vec<ValueCondition>,
}

#[derive(Debug, Clone)]
pub struct AggregationCue {
    pub slots: Vec<Slot>,
    pub property: String,
    pub descending: bool,
}

#[derive(Debug, Clone)]
pub struct TemporalCue {
    pub slots: Vec<Slot>,
    pub property: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DisplayName {
    pub header: String,
    pub singular: String,
    pub plural: String,
}

/// The loaded, validated lexicon.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub entity_synonyms: Vec<EntityCue>,
    pub relation_cues: Vec<RelationCue>,
    pub value_cues: Vec<ValueCue>,
    pub aggregation_cues: Vec<AggregationCue>,
    pub temporal_cues: Vec<TemporalCue>,
    display_names: BTreeMap<String, DisplayName>,
    salient_properties: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct RawLexicon {
    entity_synonyms: Vec<RawEntity>,
    relation_cues: Vec<RawRelation>,
    value_cues: Vec<RawValue>,
    aggregation_cues: Vec<RawAggregation>,
    temporal_cues: Vec<RawTemporal>,
    display_names: BTreeMap<String, DisplayName>,
    salient_properties: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct RawEntity {
    phrase: String,
    kind: String,
}

#[derive(Debug, Deserialize)]
struct RawRelation {
    phrase: String,
    rel_type: String,
    target_kind: String,
    anchor_side: AnchorSide,
    display: String,
}

#[derive(Debug, Deserialize)]
struct RawValue {
    phrase: String,
    display: String,
    conditions: Vec<RawCondition>,
}

#[derive(Debug, Deserialize)]
struct RawCondition {
    kind: String,
    property: String,
    value: serde_json::Value,
}

#[derive(Debug, Deserialize)]
struct RawAggregation {
    pattern: String,
    property: String,
    direction: String,
}

#[derive(Debug, Deserialize)]
struct RawTemporal {
    pattern: String,
    property: String,
}

impl Lexicon {
    pub fn from_file(
        path: impl AsRef<Path>,
        taxonomy: &Taxonomy,
        default_tenancy: Option<&str>,
    ) -> Result<Lexicon, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, taxonomy, default_tenancy)
    }

    /// The lexicon bundled with the crate.
    pub fn builtin(taxonomy: &Taxonomy, default_tenancy: Option<&str>) -> Lexicon {
        Self::from_json(
            include_str!("../../assets/lexicon.json"),
            taxonomy,
            default_tenancy,
        )
        .expect("bundled lexicon is valid")
    }

    pub fn from_json(
        text: &str,
        taxonomy: &Taxonomy,
        default_tenancy: Option<&str>,
    ) -> Result<Lexicon, LexiconError> {
        let raw: RawLexicon =
            serde_json::from_str(text).map_err(|e| LexiconError::Parse(e.to_string()))?;

        let check_kind = |table: &'static str, entry: &str, kind: &str| {
            if kind == ANY_RESOURCE || kind == ANCHOR_KIND || taxonomy.has_kind(kind) {
                Ok(())
            } else {
                Err(LexiconError::BadEntry {
                    table,
                    entry: entry.to_owned(),
                    reason: format!("kind {kind:?} is not in the taxonomy"),
                })
            }
        };

        let mut entity_synonyms = Vec::new();
        for e in raw.entity_synonyms {
            check_kind("entity_synonyms", &e.phrase, &e.kind)?;
            entity_synonyms.push(EntityCue {
                slots: compile_pattern("entity_synonyms", &e.phrase)?,
                kind: e.kind,
            });
        }

        let mut relation_cues = Vec::new();
        for r in raw.relation_cues {
            if !taxonomy.has_rel_type(&r.rel_type) {
                return Err(LexiconError::BadEntry {
                    table: "relation_cues",
                    entry: r.phrase,
                    reason: format!("relationship {:?} is not in the taxonomy", r.rel_type),
                });
            }
            check_kind("relation_cues", &r.phrase, &r.target_kind)?;
            relation_cues.push(RelationCue {
                slots: compile_pattern("relation_cues", &r.phrase)?,
                rel_type: r.rel_type,
                target_kind: r.target_kind,
                anchor_side: r.anchor_side,
                display: r.display,
            });
        }

        let mut value_cues = Vec::new();
        for v in raw.value_cues {
            let mut conditions = Vec::new();
            let mut droppable = false;
            for c in &v.conditions {
                check_kind("value_cues", &v.phrase, &c.kind)?;
                let value = match &c.value {
                    serde_json::Value::String(s) if s == "$default_tenancy" => {
                        match default_tenancy {
                            Some(t) => PropertyValue::Text(t.to_owned()),
                            None => {
                                droppable = true;
                                break;
                            }
                        }
                    }
                    serde_json::Value::String(s) => PropertyValue::Text(s.clone()),
                    serde_json::Value::Number(n) => {
                        PropertyValue::Number(n.as_f64().unwrap_or(0.0))
                    }
                    serde_json::Value::Bool(b) => PropertyValue::Bool(*b),
                    other => {
                        return Err(LexiconError::BadEntry {
                            table: "value_cues",
                            entry: v.phrase.clone(),
                            reason: format!("unsupported condition value {other}"),
                        })
                    }
                };
                conditions.push(ValueCondition {
                    kind: c.kind.clone(),
                    property: c.property.clone(),
                    value,
                });
            }
            if droppable {
                continue; // needs $default_tenancy and none is configured
            }
            value_cues.push(ValueCue {
                slots: compile_pattern("value_cues", &v.phrase)?,
                display: v.display,
                conditions,
            });
        }

        let mut aggregation_cues = Vec::new();
        for a in raw.aggregation_cues {
            let descending = match a.direction.as_str() {
                "desc" => true,
                "asc" => false,
                other => {
                    return Err(LexiconError::BadEntry {
                        table: "aggregation_cues",
                        entry: a.pattern,
                        reason: format!("direction must be asc or desc, not {other:?}"),
                    })
                }
            };
            aggregation_cues.push(AggregationCue {
                slots: compile_pattern("aggregation_cues", &a.pattern)?,
                property: a.property,
                descending,
            });
        }

        let mut temporal_cues = Vec::new();
        for t in raw.temporal_cues {
            temporal_cues.push(TemporalCue {
                slots: compile_pattern("temporal_cues", &t.pattern)?,
                property: t.property,
            });
        }

        for kind in raw.display_names.keys() {
            check_kind("display_names", kind, kind)?;
        }

        Ok(Lexicon {
            entity_synonyms,
            relation_cues,
            value_cues,
            aggregation_cues,
            temporal_cues,
            display_names: raw.display_names,
            salient_properties: raw.salient_properties,
        })
    }

    /// Header text for a kind (used as a result-table column name).
    pub fn header(&self, kind: Option<&str>) -> String {
        match kind.and_then(|k| self.display_names.get(k)) {
            Some(d) => d.header.clone(),
            None => "Resource".to_owned(),
        }
    }

    /// Lowercase noun for a kind, singular or plural.
    pub fn noun(&self, kind: &str, plural: bool) -> String {
        match self.display_names.get(kind) {
            Some(d) => {
                if plural {
                    d.plural.clone()
                } else {
                    d.singular.clone()
                }
            }
            None if plural => format!("{} resources", kind.to_lowercase()),
            None => format!("{} resource", kind.to_lowercase()),
        }
    }

    /// The property shown for a kind in result items (for example, a
    /// vulnerability shows its description).
    pub fn salient_property(&self, kind: &str) -> &str {
        self.salient_properties
            .get(kind)
            .or_else(|| self.salient_properties.get("default"))
            .map(String::as_str)
            .unwrap_or("name")
    }

    /// Exact entity-synonym lookup for a single term.
    pub fn entity_kind_of(&self, term: &str) -> Option<&str> {
        self.entity_synonyms
            .iter()
            .find(|e| e.slots.len() == 1 && e.slots[0] == Slot::Word(term.to_owned()))
            .map(|e| e.kind.as_str())
    }

    /// Exact relation-cue lookup for a single term.
    pub fn rel_type_of(&self, term: &str) -> Option<&str> {
        self.relation_cues
            .iter()
            .find(|r| r.slots.len() == 1 && r.slots[0] == Slot::Word(term.to_owned()))
            .map(|r| r.rel_type.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_lexicon_loads_and_validates() {
        let taxonomy = Taxonomy::default();
        let lexicon = Lexicon::builtin(&taxonomy, Some("tn-main"));
        assert!(!lexicon.entity_synonyms.is_empty());
        assert_eq!(lexicon.entity_kind_of("vms"), Some("ComputeInstance"));
        assert_eq!(lexicon.header(Some("ComputeInstance")), "Compute Instance");
        assert_eq!(lexicon.noun("ComputeInstance", true), "compute instances");
        assert_eq!(lexicon.salient_property("Vulnerability"), "description");
        assert_eq!(lexicon.salient_property("Database"), "name");
    }

    #[test]
    fn tenancy_cues_are_dropped_without_a_default() {
        let taxonomy = Taxonomy::default();
        let with = Lexicon::builtin(&taxonomy, Some("tn-main"));
        let without = Lexicon::builtin(&taxonomy, None);
        assert!(with.value_cues.len() > without.value_cues.len());
    }

    #[test]
    fn unknown_kind_is_rejected_with_context() {
        let taxonomy = Taxonomy::default();
        let json = r#"{
            "entity_synonyms": [{"phrase": "widgets", "kind": "Widget"}],
            "relation_cues": [], "value_cues": [], "aggregation_cues": [],
            "temporal_cues": [], "display_names": {}, "salient_properties": {}
        }"#;
        let err = Lexicon::from_json(json, &taxonomy, None).unwrap_err();
        let text = err.to_string();
        assert!(
            text.contains("widgets") && text.contains("Widget"),
            "{text}"
        );
    }

    #[test]
    fn substituted_tenancy_value_appears_in_conditions() {
        let taxonomy = Taxonomy::default();
        let lexicon = Lexicon::builtin(&taxonomy, Some("tn-main"));
        let cue = lexicon
            .value_cues
            .iter()
            .find(|v| v.slots.first() == Some(&Slot::Word("my".into())) && v.slots.len() == 2)
            .expect("my tenancy cue");
        assert_eq!(
            cue.conditions[0].value,
            PropertyValue::Text("tn-main".into())
        );
    }
}
