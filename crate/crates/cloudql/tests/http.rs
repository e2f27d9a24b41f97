//! HTTP endpoint tests: the server answers queries with exactly the JSON
//! the CLI prints, rejects uncompilable queries with 400 and the residual
//! terms, and swaps in ingested documents atomically for later queries.

use cloudql::http::ServeState;
use cloudql::pipeline::{AppConfig, Pipeline};
use std::path::PathBuf;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};

fn fixture() -> PathBuf {
    PathBuf::from(format!(
        "{}/fixtures/golden.jsonl",
        env!("CARGO_MANIFEST_DIR")
    ))
}

async fn start_server() -> std::net::SocketAddr {
    let config = AppConfig {
        corpus: Some(fixture()),
        now: Some(1_754_700_000),
        ..AppConfig::default()
    };
    let pipeline = Pipeline::new(config).expect("pipeline builds");
    let state = ServeState::new(pipeline);
    let listener = TcpListener::bind("127.0.0.1:0").await.expect("bind");
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, cloudql::http::router(state))
            .await
            .unwrap();
    });
    addr
}

async fn request(
    addr: std::net::SocketAddr,
    method: &str,
    path: &str,
    body: Option<&str>,
) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).await.expect("connect");
    let body = body.unwrap_or("");
    let request = format!(
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(request.as_bytes()).await.unwrap();
    let mut response = Vec::new();
    stream.read_to_end(&mut response).await.unwrap();
    let text = String::from_utf8_lossy(&response).into_owned();
    let status: u16 = text
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .expect("status line");
    let payload = text.split("\r\n\r\n").nth(1).unwrap_or("").to_owned();
    (status, payload)
}

const GOLDEN_QUERY: &str =
    "List all compute instances in the production environment that have security vulnerabilities.";

#[tokio::test]
async fn healthz_reports_graph_counters() {
    let addr = start_server().await;
    let (status, body) = request(addr, "GET", "/healthz", None).await;
    assert_eq!(status, 200);
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(value["status"], "ok");
    assert_eq!(value["nodes"], 14);
    assert_eq!(value["edges"], 16);
}

#[tokio::test]
async fn query_returns_the_exact_cli_json() {
    let addr = start_server().await;
    let payload = serde_json::json!({ "text": GOLDEN_QUERY }).to_string();
    let (status, body) = request(addr, "POST", "/query", Some(&payload)).await;
    assert_eq!(status, 200);

    let cli = std::process::Command::new(env!("CARGO_BIN_EXE_cloudql"))
        .args([
            "query",
            "--corpus",
            fixture().to_str().unwrap(),
            "--now",
            "1754700000",
            "--format",
            "json",
            GOLDEN_QUERY,
        ])
        .output()
        .unwrap();
    assert!(cli.status.success());
    let cli_json = String::from_utf8(cli.stdout).unwrap();
    assert_eq!(
        body.trim(),
        cli_json.trim(),
        "HTTP and CLI JSON must be identical"
    );
}

#[tokio::test]
async fn uncompilable_query_is_a_400_with_residual_terms() {
    let addr = start_server().await;
    let payload = serde_json::json!({ "text": "frobnicate the wibbles" }).to_string();
    let (status, body) = request(addr, "POST", "/query", Some(&payload)).await;
    assert_eq!(status, 400);
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    let residual: Vec<&str> = value["residual_terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(residual, vec!["frobnicate", "wibbles"]);
}

#[tokio::test]
async fn direct_ir_queries_are_supported() {
    let addr = start_server().await;
    let payload = serde_json::json!({ "ir": "MATCH (n:NLB) RETURN n.name" }).to_string();
    let (status, body) = request(addr, "POST", "/query", Some(&payload)).await;
    assert_eq!(status, 200);
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(value["rows"][0][0], "nlb-edge");
}

#[tokio::test]
async fn ingest_swaps_a_new_snapshot_for_subsequent_queries() {
    let addr = start_server().await;
    let doc = concat!(
        r#"{"id":"ins-burst-7","kind":"ComputeInstance","name":"ins-burst-7","#,
        r#""relationships":[{"rel":"DEPLOYED_IN","dst":"env-production"},{"rel":"HAS_VULNERABILITY","dst":"vuln-ssh"}]}"#,
    );
    let (status, body) = request(addr, "POST", "/ingest", Some(doc)).await;
    assert_eq!(status, 200, "{body}");
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(value["nodes_loaded"], 1);
    assert_eq!(value["total_nodes"], 15);

    let payload = serde_json::json!({ "text": GOLDEN_QUERY }).to_string();
    let (_, body) = request(addr, "POST", "/query", Some(&payload)).await;
    let value: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(value["total_count"], 3, "the new instance joins the answer");
}

#[tokio::test]
async fn concurrent_queries_share_one_snapshot() {
    let addr = start_server().await;
    let payload = serde_json::json!({ "text": GOLDEN_QUERY }).to_string();
    let mut handles = Vec::new();
    for _ in 0..8 {
        let payload = payload.clone();
        handles.push(tokio::spawn(async move {
            request(addr, "POST", "/query", Some(&payload)).await
        }));
    }
    let mut bodies = Vec::new();
    for handle in handles {
        let (status, body) = handle.await.unwrap();
        assert_eq!(status, 200);
        bodies.push(body);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}
