//! End-to-end tests of the command-line surface: exit codes, REPL flow,
//! and snapshot round trips, all against the shipped fixture corpus.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cloudql")
}

fn fixture() -> String {
    format!("{}/fixtures/golden.jsonl", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn missing_corpus_exits_2_and_names_the_path() {
    let out = Command::new(bin())
        .args(["ingest", "--corpus", "/definitely/missing.jsonl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/definitely/missing.jsonl"), "{stderr}");
}

#[test]
fn out_of_order_events_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.jsonl");
    std::fs::write(
        &events,
        concat!(
            r#"{"seq":1,"op":"remove_node","id":"a"}"#,
            "\n",
            r#"{"seq":3,"op":"remove_node","id":"b"}"#,
            "\n",
            r#"{"seq":2,"op":"remove_node","id":"c"}"#,
            "\n"
        ),
    )
    .unwrap();
    let out = Command::new(bin())
        .args([
            "ingest",
            "--corpus",
            &fixture(),
            "--events",
            events.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains('3') && stderr.contains('2'), "{stderr}");
}

#[test]
fn uncompilable_query_exits_4_with_residual_terms() {
    let out = Command::new(bin())
        .args(["query", "--corpus", &fixture(), "frobnicate the wibbles"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("frobnicate") && stderr.contains("wibbles"),
        "{stderr}"
    );
}

#[test]
fn empty_results_still_exit_0() {
    let out = Command::new(bin())
        .args([
            "query",
            "--corpus",
            &fixture(),
            "list all internet gateways",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("No internet gateways matched the query."),
        "{stdout}"
    );
}

#[test]
fn fixture_ingest_prints_the_expected_counts() {
    let out = Command::new(bin())
        .args(["ingest", "--corpus", &fixture()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "14 nodes, 16 edges, 0 skipped"
    );
}

#[test]
fn snapshot_reloads_with_identical_counts() {
    let dir = tempfile::tempdir().unwrap();
    let snap: PathBuf = dir.path().join("snap.jsonl");
    let out = Command::new(bin())
        .args([
            "ingest",
            "--corpus",
            &fixture(),
            "--snapshot",
            snap.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());

    let reloaded = Command::new(bin())
        .args(["ingest", "--corpus", snap.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(reloaded.status.success());
    assert_eq!(
        String::from_utf8_lossy(&reloaded.stdout).trim(),
        "14 nodes, 16 edges, 0 skipped"
    );
}

#[test]
fn repl_answers_queries_and_survives_bad_input() {
    let mut child = Command::new(bin())
        .args(["repl", "--corpus", &fixture(), "--now", "1754700000"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(
            concat!(
                "vms in production with vulnerabilities\n",
                ":ir MATCH (broken RETURN x\n",
                ":format csv\n",
                "list all nlbs\n",
                ":quit\n"
            )
            .as_bytes(),
        )
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stdout.contains("ins-cloud-host-1427"), "{stdout}");
    // The malformed IR reported a parse error without killing the loop.
    assert!(stderr.contains("parse error"), "{stderr}");
    assert!(
        stdout.contains("nlb-edge"),
        "loop must continue after an error: {stdout}"
    );
}

#[test]
fn explain_prints_intent_and_compiled_query() {
    let out = Command::new(bin())
        .args([
            "query",
            "--corpus",
            &fixture(),
            "--explain",
            "list the NLB that fronts the CRM service in my production tenancy",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("entities:    [\"NLB\"]"), "{stdout}");
    assert!(stdout.contains("MATCH"), "{stdout}");
    assert!(stdout.contains("nlb-edge"), "{stdout}");
}
