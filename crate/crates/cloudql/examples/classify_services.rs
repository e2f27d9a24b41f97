//! Classify SaaS services from their API surfaces using the shipped
//! category lexicons.
//!
//! ```text
//! cargo run -p cloudql --example classify_services
//! ```

use cloudql::classify::{classify_service, CategoryLexicon};
use cloudql::ingest::ResourceDocument;

fn main() -> anyhow::Result<()> {
    let lexicon = CategoryLexicon::builtin();
    println!("categories: {:?}\n", lexicon.labels().collect::<Vec<_>>());

    let services = [
        serde_json::json!({
            "id": "svc-shop", "kind": "Service", "name": "shop",
            "api_endpoints": [
                "/shop/ordering list orders",
                "/shop/catalog browse catalog",
                "/shop/checkout check out",
                "/shop/payment process payment"
            ]
        }),
        serde_json::json!({
            "id": "svc-crm", "kind": "Service", "name": "crm",
            "api_endpoints": [
                "/crm/promotions list promotions",
                "/crm/leads list leads",
                "/crm/scoring lead scoring",
                "/crm/demo schedule demo"
            ]
        }),
        serde_json::json!({
            "id": "svc-mystery", "kind": "Service", "name": "mystery",
            "api_endpoints": ["/api/frobnicate", "/api/wibble"]
        }),
    ];

    for value in services {
        let doc: ResourceDocument = serde_json::from_value(value)?;
        let category = classify_service(&doc, &lexicon);
        println!(
            "{:<12} -> {:<10} score {:.2}  matched: {}",
            doc.id,
            category.label,
            category.score,
            category.matched_features.join(", ")
        );
    }
    Ok(())
}
