//! Rule-based SaaS service classification from API-surface features.
//!
//! Categories are scored by weighted keyword-set overlap against lexicons
//! shipped as data: `score = matched_weight / total_category_weight`. The
//! winning label applies when its score reaches the threshold; otherwise
//! the service stays `unknown`. Ties break by the fixed category order
//! (ecommerce, sales, identity, storage, analytics, then anything custom).

use crate::ingest::ResourceDocument;
use crate::nlq::tokenize::tokenize;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Minimum winning score for a definite label.
pub const CLASSIFY_THRESHOLD: f64 = 0.3;

/// Tie-break precedence for the built-in categories.
const CATEGORY_ORDER: &[&str] = &["ecommerce", "sales", "identity", "storage", "analytics"];

#[derive(Debug, Clone, Deserialize)]
struct RawFeature {
    term: String,
    weight: f64,
}

/// One scoring lexicon per category. Terms may be multi-word phrases; a
/// phrase matches when its tokens appear adjacently inside a single
/// endpoint string or the description.
#[derive(Debug, Clone)]
pub struct CategoryLexicon {
    categories: Vec<Category>,
}

#[derive(Debug, Clone)]
struct Category {
    label: String,
    features: Vec<(String, Vec<String>, f64)>, // (term, phrase tokens, weight)
    total_weight: f64,
}

#[derive(Debug, Error)]
pub enum CategoryLexiconError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad category lexicon: {0}")]
    Parse(String),
    #[error("category {category:?} term {term:?} is invalid: {reason}")]
    BadTerm {
        category: String,
        term: String,
        reason: String,
    },
}

impl CategoryLexicon {
    pub fn from_json(text: &str) -> Result<CategoryLexicon, CategoryLexiconError> {
        let raw: BTreeMap<String, Vec<RawFeature>> =
            serde_json::from_str(text).map_err(|e| CategoryLexiconError::Parse(e.to_string()))?;

        let mut categories = Vec::new();
        for (label, features) in raw {
            let mut parsed = Vec::new();
            let mut total = 0.0;
            for f in features {
                if f.weight.is_nan() || f.weight <= 0.0 {
                    return Err(CategoryLexiconError::BadTerm {
                        category: label.clone(),
                        term: f.term,
                        reason: "weight must be positive".into(),
                    });
                }
                let toks: Vec<String> = tokenize(&f.term).into_iter().map(|t| t.text).collect();
                if toks.is_empty() {
                    return Err(CategoryLexiconError::BadTerm {
                        category: label.clone(),
                        term: f.term,
                        reason: "term has no tokens".into(),
                    });
                }
                total += f.weight;
                parsed.push((f.term, toks, f.weight));
            }
            if parsed.is_empty() {
                return Err(CategoryLexiconError::Parse(format!(
                    "category {label:?} has no features"
                )));
            }
            categories.push(Category {
                label,
                features: parsed,
                total_weight: total,
            });
        }

        // Fixed precedence: the built-in order first, customs after it.
        categories.sort_by_key(|c| {
            let builtin = CATEGORY_ORDER.iter().position(|&b| b == c.label);
            (builtin.unwrap_or(CATEGORY_ORDER.len()), c.label.clone())
        });
        Ok(CategoryLexicon { categories })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<CategoryLexicon, CategoryLexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CategoryLexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// The built-in lexicon shipped with the crate.
    pub fn builtin() -> CategoryLexicon {
        Self::from_json(include_str!("../assets/categories.json"))
            .expect("bundled category lexicon is valid")
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.label.as_str())
    }
}

/// Classification outcome: best label (or `unknown`), its score, and the
/// features that matched.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceCategory {
    pub label: String,
    pub score: f64,
    pub matched_features: Vec<String>,
}

/// Scores the document against every category. Matching treats each API
/// endpoint string (and the description) as its own token sequence, so the
/// result is invariant under endpoint reordering.
pub fn classify_service(doc: &ResourceDocument, lexicon: &CategoryLexicon) -> ServiceCategory {
    let units: Vec<Vec<String>> = doc
        .api_endpoints
        .iter()
        .map(String::as_str)
        .chain(std::iter::once(doc.description.as_str()))
        .map(|text| tokenize(text).into_iter().map(|t| t.text).collect())
        .collect();

    let mut best: Option<(&Category, f64, Vec<String>)> = None;
    for category in &lexicon.categories {
        let mut matched = Vec::new();
        let mut matched_weight = 0.0;
        for (term, phrase, weight) in &category.features {
            if units.iter().any(|unit| contains_phrase(unit, phrase)) {
                matched.push(term.clone());
                matched_weight += weight;
            }
        }
        let score = matched_weight / category.total_weight;
        // Strictly-greater keeps the earlier category on ties.
        if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
            best = Some((category, score, matched));
        }
    }

    match best {
        Some((category, score, matched)) if score >= CLASSIFY_THRESHOLD => ServiceCategory {
            label: category.label.clone(),
            score,
            matched_features: matched,
        },
        Some((_, score, matched)) => ServiceCategory {
            label: "unknown".into(),
            score,
            matched_features: matched,
        },
        None => ServiceCategory {
            label: "unknown".into(),
            score: 0.0,
            matched_features: Vec::new(),
        },
    }
}

fn contains_phrase(unit: &[String], phrase: &[String]) -> bool {
    if phrase.is_empty() || unit.len() < phrase.len() {
        return false;
    }
    unit.windows(phrase.len()).any(|w| w == phrase)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(endpoints: &[&str]) -> ResourceDocument {
        serde_json::from_str(&format!(
            r#"{{"id":"svc","kind":"Service","api_endpoints":{}}}"#,
            serde_json::to_string(endpoints).unwrap()
        ))
        .unwrap()
    }

    #[test]
    fn ordering_catalog_checkout_payment_is_ecommerce() {
        let lexicon = CategoryLexicon::builtin();
        let d = doc(&[
            "/shop/ordering list orders",
            "/shop/catalog browse catalog",
            "/shop/checkout check out",
            "/shop/payment process payment",
        ]);
        let category = classify_service(&d, &lexicon);
        assert_eq!(category.label, "ecommerce");
        assert!(category.score >= CLASSIFY_THRESHOLD);
        assert!(category.matched_features.iter().any(|t| t == "check out"));
    }

    #[test]
    fn promotions_leads_scoring_demo_is_sales() {
        let lexicon = CategoryLexicon::builtin();
        let d = doc(&[
            "/crm/promotions list promotions",
            "/crm/leads list leads",
            "/crm/prospects list prospectus customers",
            "/crm/opportunities list opportunities",
            "/crm/deals list deals",
            "/crm/scoring lead scoring",
            "/crm/demo schedule demo",
        ]);
        let category = classify_service(&d, &lexicon);
        assert_eq!(category.label, "sales");
    }

    #[test]
    fn empty_document_is_unknown_with_zero_score() {
        let lexicon = CategoryLexicon::builtin();
        let category = classify_service(&doc(&[]), &lexicon);
        assert_eq!(category.label, "unknown");
        assert_eq!(category.score, 0.0);
        assert!(category.matched_features.is_empty());
    }

    #[test]
    fn endpoint_order_does_not_change_the_outcome() {
        let lexicon = CategoryLexicon::builtin();
        let a = classify_service(&doc(&["/x catalog", "/y payment", "/z checkout"]), &lexicon);
        let b = classify_service(&doc(&["/z checkout", "/x catalog", "/y payment"]), &lexicon);
        assert_eq!(a, b);
    }

    #[test]
    fn phrases_do_not_match_across_endpoint_boundaries() {
        let lexicon = CategoryLexicon::builtin();
        // "check" and "out" in separate endpoints must not form "check out".
        let split = classify_service(&doc(&["/a check", "/b out"]), &lexicon);
        assert!(!split.matched_features.iter().any(|t| t == "check out"));
    }

    #[test]
    fn extra_unrelated_endpoint_never_shrinks_matches() {
        let lexicon = CategoryLexicon::builtin();
        let base = classify_service(&doc(&["/x catalog", "/y payment"]), &lexicon);
        let more = classify_service(
            &doc(&["/x catalog", "/y payment", "/zz frobnicate"]),
            &lexicon,
        );
        for feature in &base.matched_features {
            assert!(more.matched_features.contains(feature));
        }
    }
}
