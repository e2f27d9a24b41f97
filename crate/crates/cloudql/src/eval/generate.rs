//! Seeded synthetic cloud-inventory generator.
//!
//! Produces a corpus file and a matching gold file with planted answers for
//! each query archetype. The signals the planted answers depend on are
//! structural (compliance edges, environment membership, creation edges,
//! cost ordering) and deliberately absent from the free text, while a few
//! decoy descriptions carry misleading keywords — that asymmetry is what
//! the keyword-baseline comparison measures. Identical seed and parameters
//! give byte-identical output.

use super::GoldQuery;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// Size knobs for the generated inventory.
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub seed: u64,
    pub instances: usize,
    pub databases: usize,
    pub buckets: usize,
    /// Services beyond the planted PCI/decoy/CRM set.
    pub extra_services: usize,
    pub nlbs: usize,
    pub users: usize,
    /// Reference "now" for created_at values; eval runs pin --now to this.
    pub reference_now: i64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 42,
            instances: 40,
            databases: 8,
            buckets: 6,
            extra_services: 4,
            nlbs: 4,
            users: 4,
            reference_now: DEFAULT_REFERENCE_NOW,
        }
    }
}

/// The canonical clock for generated corpora (2025-08-09T?? UTC). Gold
/// queries with temporal phrases only reproduce when evaluation pins
/// `--now` to this value.
pub const DEFAULT_REFERENCE_NOW: i64 = 1_754_700_000;

/// Exactly this many services carry both financial-transaction endpoints
/// and a SUBJECT_TO edge to the PCI policy.
pub const PCI_PLANTED: usize = 9;
/// Services whose text mentions PCI without the compliance edge.
pub const PCI_DECOYS: usize = 3;

const DAY: i64 = 86_400;

struct DocBuilder {
    lines: Vec<String>,
}

impl DocBuilder {
    fn push(&mut self, value: serde_json::Value) {
        self.lines
            .push(serde_json::to_string(&value).expect("document serializes"));
    }
}

/// Generates `(corpus_jsonl, gold_jsonl)` for the given parameters.
pub fn generate_corpus(params: &GeneratorParams) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let now = params.reference_now;
    let mut docs = DocBuilder { lines: Vec::new() };

    // Pre-assigned costs for every cost-bearing resource (instances,
    // databases, buckets, NLBs, in creation order): unique 0.25 steps below
    // 5000, except ten slots promoted into a distinct 9000+ band.
    let pool_size = params.instances + params.databases + params.buckets + params.nlbs;
    let costs: Vec<f64> = {
        let mut base: Vec<f64> = (0..pool_size).map(|i| 100.0 + i as f64 * 0.25).collect();
        base.shuffle(&mut rng);
        let mut order: Vec<usize> = (0..pool_size).collect();
        order.shuffle(&mut rng);
        let mut costs = base;
        for (slot, &pool_idx) in order.iter().enumerate().take(10) {
            costs[pool_idx] = 9_000.0 + slot as f64 * 100.0;
        }
        costs
    };
    let mut cost_cursor = 0usize;
    let mut gold_top10: BTreeSet<String> = BTreeSet::new();
    let mut next_cost = |id: &str, gold_top10: &mut BTreeSet<String>| -> f64 {
        let cost = costs[cost_cursor];
        cost_cursor += 1;
        if cost >= 9_000.0 {
            gold_top10.insert(id.to_owned());
        }
        cost
    };

    // Scaffolding: tenancy, environments, network fabric, users, policies.
    docs.push(json!({
        "id": "tn-main", "kind": "Tenancy", "name": "tn-main",
        "description": "primary tenancy", "created_at": now - 900 * DAY,
        "properties": {}, "relationships": []
    }));
    let environments = [
        ("env-production", "Production"),
        ("env-staging", "Staging"),
        ("env-development", "Development"),
    ];
    for (id, name) in environments {
        docs.push(json!({
            "id": id, "kind": "Environment", "name": name,
            "created_at": now - 800 * DAY,
            "relationships": [{"rel": "DEPLOYED_IN", "dst": "tn-main"}]
        }));
    }
    for v in 0..2 {
        docs.push(json!({
            "id": format!("vcn-{v}"), "kind": "VCN", "name": format!("vcn-{v}"),
            "created_at": now - 700 * DAY,
            "relationships": [{"rel": "DEPLOYED_IN", "dst": "tn-main"}]
        }));
        for s in 0..2 {
            docs.push(json!({
                "id": format!("sub-{v}-{s}"), "kind": "Subnet", "name": format!("sub-{v}-{s}"),
                "properties": {"cidr": format!("10.{v}.{s}.0/24")},
                "created_at": now - 700 * DAY,
                "relationships": [{"rel": "IN_VCN", "dst": format!("vcn-{v}")}]
            }));
        }
    }
    let user_names: Vec<String> = (0..params.users)
        .map(|u| match u {
            0 => "alice".to_owned(),
            1 => "bob".to_owned(),
            2 => "carol".to_owned(),
            n => format!("user{n}"),
        })
        .collect();
    for name in &user_names {
        docs.push(json!({
            "id": format!("usr-{name}"), "kind": "User", "name": name,
            "created_at": now - 600 * DAY, "relationships": []
        }));
    }
    for (id, name) in [("pol-pci", "PCI"), ("pol-hipaa", "HIPAA")] {
        docs.push(json!({
            "id": id, "kind": "CompliancePolicy", "name": name,
            "description": format!("{name} controls catalogue"),
            "created_at": now - 500 * DAY, "relationships": []
        }));
    }
    docs.push(json!({
        "id": "fw-edge", "kind": "Firewall", "name": "fw-edge",
        "created_at": now - 500 * DAY,
        "relationships": [{"rel": "DEPLOYED_IN", "dst": "env-production"}]
    }));

    // Compute instances. Who gets vulnerabilities and who belongs to alice's
    // recent batch is decided structurally, not textually.
    let env_of = |i: usize| -> &'static str {
        match i % 4 {
            0 | 1 => "env-production",
            2 => "env-staging",
            _ => "env-development",
        }
    };
    let mut vuln_counter = 0usize;
    let mut vuln_docs: Vec<serde_json::Value> = Vec::new();
    let vuln_texts = [
        "Open SSH Port",
        "Unpatched software",
        "Weak TLS configuration",
        "World-readable bucket policy",
        "Stale admin credentials",
    ];
    // Gold id sets.
    let mut gold_prod_vulnerable: BTreeSet<String> = BTreeSet::new();
    let mut gold_prod_vulnerable_instances: BTreeSet<String> = BTreeSet::new();
    let mut gold_recent_by_alice: BTreeSet<String> = BTreeSet::new();

    let mut instance_ids = Vec::with_capacity(params.instances);
    for i in 0..params.instances {
        let id = format!("ins-{i:05}");
        let env = env_of(i);
        let creator = &user_names[i % user_names.len()];
        // Instances 0,4,8,... belong to alice (index 0). The first six of
        // those are fresh (inside the two-week window); the rest are old.
        let alice_slot = i % user_names.len() == 0;
        let fresh = alice_slot && i < 6 * user_names.len();
        let created_at = if fresh {
            now - (2 + (i as i64 % 10)) * DAY
        } else {
            now - (30 + (i as i64 % 300)) * DAY
        };
        if alice_slot && fresh {
            gold_recent_by_alice.insert(id.clone());
        }

        let mut relationships = vec![
            json!({"rel": "DEPLOYED_IN", "dst": env}),
            json!({"rel": "DEPLOYED_IN", "dst": "tn-main"}),
            json!({"rel": "IN_SUBNET", "dst": format!("sub-{}-{}", i % 2, (i / 2) % 2)}),
            json!({"rel": "CREATED_BY", "dst": format!("usr-{creator}")}),
        ];
        // Vulnerabilities: every fifth instance, structural only.
        if i % 5 == 0 {
            let vuln_id = format!("vuln-{vuln_counter:04}");
            vuln_counter += 1;
            let text = vuln_texts[vuln_counter % vuln_texts.len()];
            vuln_docs.push(json!({
                "id": vuln_id, "kind": "Vulnerability", "name": text,
                "description": text, "created_at": now - 10 * DAY,
                "relationships": []
            }));
            relationships.push(json!({"rel": "HAS_VULNERABILITY", "dst": vuln_id}));
            if env == "env-production" {
                gold_prod_vulnerable.insert(id.clone());
                gold_prod_vulnerable_instances.insert(id.clone());
            }
        }
        // A couple of staging decoys whose text name-drops production.
        let description = if env == "env-staging" && i % 8 == 2 {
            "mirrors the production workload for rehearsals".to_owned()
        } else {
            String::new()
        };

        docs.push(json!({
            "id": id, "kind": "ComputeInstance", "name": id,
            "description": description,
            "properties": {"cost": next_cost(&id, &mut gold_top10), "state": if i % 7 == 3 { "stopped" } else { "running" }},
            "created_at": created_at,
            "relationships": relationships
        }));
        instance_ids.push(id);
    }

    for d in 0..params.databases {
        let id = format!("db-{d:03}");
        let env = env_of(d);
        let mut relationships = vec![
            json!({"rel": "DEPLOYED_IN", "dst": env}),
            json!({"rel": "DEPLOYED_IN", "dst": "tn-main"}),
            json!({"rel": "SECURED_BY", "dst": "fw-edge"}),
        ];
        if d % 4 == 1 {
            let vuln_id = format!("vuln-{vuln_counter:04}");
            vuln_counter += 1;
            let text = vuln_texts[vuln_counter % vuln_texts.len()];
            vuln_docs.push(json!({
                "id": vuln_id, "kind": "Vulnerability", "name": text,
                "description": text, "created_at": now - 10 * DAY, "relationships": []
            }));
            relationships.push(json!({"rel": "HAS_VULNERABILITY", "dst": vuln_id}));
            if env == "env-production" {
                gold_prod_vulnerable.insert(id.clone());
            }
        }
        docs.push(json!({
            "id": id, "kind": "Database", "name": id,
            "properties": {"cost": next_cost(&id, &mut gold_top10), "engine": if d % 2 == 0 { "postgres" } else { "mysql" }},
            "created_at": now - (60 + d as i64) * DAY,
            "relationships": relationships
        }));
    }

    for b in 0..params.buckets {
        let id = format!("bkt-{b:03}");
        docs.push(json!({
            "id": id, "kind": "StorageBucket", "name": id,
            "properties": {"cost": next_cost(&id, &mut gold_top10)},
            "created_at": now - (90 + b as i64) * DAY,
            "relationships": [
                {"rel": "DEPLOYED_IN", "dst": "env-production"},
                {"rel": "DEPLOYED_IN", "dst": "tn-main"}
            ]
        }));
    }

    let mut nlb_ids = Vec::new();
    for n in 0..params.nlbs {
        let id = format!("nlb-{n:02}");
        docs.push(json!({
            "id": id, "kind": "NLB", "name": id,
            "properties": {"cost": next_cost(&id, &mut gold_top10)},
            "created_at": now - (120 + n as i64) * DAY,
            "relationships": [
                {"rel": "DEPLOYED_IN", "dst": if n == 0 { "env-production" } else { env_of(n) }},
                {"rel": "DEPLOYED_IN", "dst": "tn-main"}
            ]
        }));
        nlb_ids.push(id);
    }

    // Services. Endpoint vocabularies deliberately echo the category
    // lexicons so ingestion's classifier recovers the category.
    let ecommerce_endpoints = |rng: &mut ChaCha8Rng| -> Vec<String> {
        let pool = [
            "/v1/checkout submit checkout",
            "/v1/payment capture payment",
            "/v1/transactions list transactions",
            "/v1/ordering place ordering request",
            "/v1/catalog browse catalog",
            "/v1/cart manage cart",
            "/v1/billing issue billing statement",
        ];
        let n = rng.random_range(4..=5);
        let mut picks: Vec<&str> = pool.to_vec();
        picks.shuffle(rng);
        picks.truncate(n);
        picks.iter().map(|s| s.to_string()).collect()
    };

    struct ServiceSpec<'a> {
        name: String,
        endpoints: Vec<String>,
        description: &'a str,
        pci_edge: bool,
        host: &'a str,
        nlb: Option<&'a str>,
    }

    let mut gold_pci: BTreeSet<String> = BTreeSet::new();
    let mut service_slot = 0usize;
    let mut service = |docs: &mut DocBuilder, spec: ServiceSpec| -> String {
        let id = format!("svc-{service_slot:03}-{}", spec.name);
        service_slot += 1;
        let mut relationships = vec![
            json!({"rel": "HOSTED_ON", "dst": spec.host}),
            json!({"rel": "DEPLOYED_IN", "dst": "env-production"}),
            json!({"rel": "DEPLOYED_IN", "dst": "tn-main"}),
        ];
        if let Some(nlb) = spec.nlb {
            relationships.push(json!({"rel": "FRONTED_BY", "dst": nlb}));
        }
        if spec.pci_edge {
            relationships.push(json!({"rel": "SUBJECT_TO", "dst": "pol-pci"}));
        }
        docs.push(json!({
            "id": id, "kind": "Service", "name": spec.name,
            "description": spec.description,
            "api_endpoints": spec.endpoints,
            "properties": {"cost": 0.0},
            "created_at": now - 200 * DAY,
            "relationships": relationships
        }));
        id
    };

    // 9 planted PCI services: financial endpoints + SUBJECT_TO edge. Only
    // some descriptions mention money words; none mention "PCI".
    for p in 0..PCI_PLANTED {
        let description = if p % 2 == 0 {
            "handles financial transactions for checkout flows"
        } else {
            "order capture backend"
        };
        let endpoints = ecommerce_endpoints(&mut rng);
        let id = service(
            &mut docs,
            ServiceSpec {
                name: format!("pay{p}"),
                endpoints,
                description,
                pci_edge: true,
                host: &instance_ids[p % instance_ids.len()],
                nlb: Some(&nlb_ids[1 % nlb_ids.len()]),
            },
        );
        gold_pci.insert(id);
    }
    // Decoys: the text screams PCI, the graph says otherwise.
    for d in 0..PCI_DECOYS {
        let endpoints = vec![
            "/v1/login issue login token".to_owned(),
            "/v1/roles list roles".to_owned(),
            "/v1/permissions grant permissions".to_owned(),
            "/v1/sso initiate sso".to_owned(),
        ];
        service(
            &mut docs,
            ServiceSpec {
                name: format!("gate{d}"),
                endpoints,
                description:
                    "wiki notes describe PCI compliant financial handling guidelines PCI DSS",
                pci_edge: false,
                host: &instance_ids[(d + 3) % instance_ids.len()],
                nlb: None,
            },
        );
    }
    // The single sales-category CRM service, fronted by nlb-00 in production.
    let crm_endpoints = vec![
        "/crm/leads list leads".to_owned(),
        "/crm/deals list deals".to_owned(),
        "/crm/scoring lead scoring".to_owned(),
        "/crm/demo schedule demo".to_owned(),
        "/crm/opportunities list opportunities".to_owned(),
    ];
    service(
        &mut docs,
        ServiceSpec {
            name: "crm".to_owned(),
            endpoints: crm_endpoints,
            description: "customer relationship management",
            pci_edge: false,
            host: &instance_ids[7 % instance_ids.len()],
            nlb: Some(&nlb_ids[0]),
        },
    );
    let gold_nlb: BTreeSet<String> = [nlb_ids[0].clone()].into_iter().collect();

    // Extra services: ecommerce text without the PCI edge, plus analytics
    // and storage noise.
    for x in 0..params.extra_services {
        let (name, endpoints, description) = match x % 3 {
            0 => (
                format!("shopx{x}"),
                ecommerce_endpoints(&mut rng),
                "storefront payments experiments",
            ),
            1 => (
                format!("stats{x}"),
                vec![
                    "/v1/dashboard render dashboard".to_owned(),
                    "/v1/metrics scrape metrics".to_owned(),
                    "/v1/report export report".to_owned(),
                ],
                "",
            ),
            _ => (
                format!("vault{x}"),
                vec![
                    "/v1/upload upload object".to_owned(),
                    "/v1/download download blob".to_owned(),
                    "/v1/archive archive volume".to_owned(),
                ],
                "",
            ),
        };
        service(
            &mut docs,
            ServiceSpec {
                name,
                endpoints,
                description,
                pci_edge: false,
                host: &instance_ids[(x + 11) % instance_ids.len()],
                nlb: None,
            },
        );
    }

    docs.lines
        .extend(vuln_docs.iter().map(|v| serde_json::to_string(v).unwrap()));

    let corpus = docs.lines.join("\n") + "\n";

    let gold_entries = vec![
        GoldQuery {
            query: "What are the top 10 expensive resources in my cloud environment?".into(),
            relevant_ids: gold_top10.clone(),
            archetype: "top_expensive".into(),
        },
        GoldQuery {
            query: "top 10 most expensive resources".into(),
            relevant_ids: gold_top10,
            archetype: "top_expensive".into(),
        },
        GoldQuery {
            query: "Which services handle financial transactions and are PCI compliant?".into(),
            relevant_ids: gold_pci.clone(),
            archetype: "pci_financial".into(),
        },
        GoldQuery {
            query: "services handling financial transactions that are pci compliant".into(),
            relevant_ids: gold_pci,
            archetype: "pci_financial".into(),
        },
        GoldQuery {
            query: "List all compute instances created in the last two weeks by user alice".into(),
            relevant_ids: gold_recent_by_alice.clone(),
            archetype: "created_window_by_user".into(),
        },
        GoldQuery {
            query: "vms created in the last 14 days by user alice".into(),
            relevant_ids: gold_recent_by_alice,
            archetype: "created_window_by_user".into(),
        },
        GoldQuery {
            query: "Find all resources in production that have security vulnerabilities".into(),
            relevant_ids: gold_prod_vulnerable,
            archetype: "production_vulnerabilities".into(),
        },
        GoldQuery {
            query: "List all compute instances in the production environment that have security vulnerabilities.".into(),
            relevant_ids: gold_prod_vulnerable_instances,
            archetype: "instances_production_vulnerabilities".into(),
        },
        GoldQuery {
            query: "list the NLB that fronts the CRM service in my production tenancy".into(),
            relevant_ids: gold_nlb.clone(),
            archetype: "nlb_fronting".into(),
        },
        GoldQuery {
            query: "nlbs fronting the crm service in production".into(),
            relevant_ids: gold_nlb,
            archetype: "nlb_fronting".into(),
        },
    ];

    let mut gold = String::new();
    for entry in &gold_entries {
        let _ = writeln!(
            gold,
            "{}",
            serde_json::to_string(entry).expect("gold serializes")
        );
    }
    (corpus, gold)
}
