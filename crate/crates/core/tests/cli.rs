use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use countbf::workloads::{read_dataset, WorkloadKind};

fn countbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_countbf"))
        .args(args)
        .env_remove("COUNTBF_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sizeof_reports_worked_example() {
    let o = countbf(&["sizeof", "--n", "10000000", "--epsilon", "0.001"]);
    assert!(o.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(row["m_bits"], 143_775_876u64);
    assert_eq!(row["x"], 1087);
    assert_eq!(row["y"], 1039);
    assert_eq!(row["k_countbf"], 5);
    assert_eq!(row["k_sbf"], 10);
}

#[test]
fn sizeof_sweeps_every_pair() {
    let o = countbf(&["sizeof", "--n", "100000,1000000", "--epsilon", "0.01,0.001"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["sizeof", "--n", "0"][..],
        &["sizeof", "--n", "10", "--epsilon", "1.5"],
        &["bench", "--n", "100", "--alpha", "65"],
        &["bench", "--n", "100", "--beta", "48"],
        &["bench", "--n", "100", "--kinds", "bogus"],
        &["frobnicate"],
    ] {
        assert_eq!(countbf(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn default_grid_has_32_rows() {
    let o = countbf(&["bench", "--n", "2000", "--parallel"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), countbf::metrics::CSV_HEADER);
    assert_eq!(lines.count(), 32);
}

#[test]
fn bench_json_is_valid() {
    let o = countbf(&["bench", "--n", "1000", "--alpha", "4", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["n"], 1000);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    for r in rows {
        assert_eq!(r["fn"], 0);
        assert!(r["lookup_ns"].is_u64());
    }
}

fn without_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplitn(3, ',').nth(2).unwrap_or(l).to_string())
        .collect()
}

#[test]
fn bench_csv_is_deterministic() {
    let args = ["bench", "--n", "3000", "--seed", "7"];
    let (a, b) = (stdout(&countbf(&args)), stdout(&countbf(&args)));
    assert_eq!(without_timing(&a), without_timing(&b));

    let parallel = ["bench", "--n", "3000", "--seed", "7", "--parallel"];
    assert_eq!(stdout(&countbf(&parallel)), stdout(&countbf(&parallel)));
}

#[test]
fn seed_from_environment_matches_flag() {
    let flag = stdout(&countbf(&["bench", "--n", "500", "--seed", "99", "--parallel"]));
    let env = Command::new(env!("CARGO_BIN_EXE_countbf"))
        .args(["bench", "--n", "500", "--parallel"])
        .env("COUNTBF_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(flag, stdout(&env));
    assert_ne!(flag, stdout(&countbf(&["bench", "--n", "500", "--parallel"])));
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn gen_writes_readable_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = countbf(&["gen", "--n", "2000", "--n-query", "3000", "--seed", "5", "--out", out]);
    assert!(o.status.success());
    for kind in WorkloadKind::ALL {
        let w = read_dataset(&dir.path().join(kind.as_str())).unwrap();
        assert_eq!(w.kind, kind);
        assert_eq!(w.inserted.len(), 2000);
    }

    let disjoint = dir.path().join("disjoint");
    let inserted: HashSet<String> = lines(&disjoint.join("inserts.txt")).into_iter().collect();
    let queries = lines(&disjoint.join("queries.txt"));
    assert_eq!(queries.len(), 3000);
    assert!(queries.iter().all(|q| !inserted.contains(q)));
    assert!(lines(&disjoint.join("truth.txt")).iter().all(|t| t == "0"));

    let again = tempfile::tempdir().unwrap();
    countbf(&["gen", "--n", "2000", "--n-query", "3000", "--seed", "5", "--out", again.path().to_str().unwrap()]);
    assert_eq!(lines(&disjoint.join("queries.txt")), lines(&again.path().join("disjoint/queries.txt")));
}

#[test]
fn freq_reports_exact_counts() {
    let o = countbf(&["freq", "--n", "2000", "--alpha", "8"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &doc["rows"][0];
    assert_eq!(row["underestimates"], 0);
    assert!(row["exact_rate"].as_f64().unwrap() >= 0.99);
}

#[test]
fn golden_matches_frozen_file() {
    let o = countbf(&["golden"]);
    assert!(o.status.success());
    let frozen = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/hash64_golden.tsv")).unwrap();
    assert_eq!(stdout(&o), frozen);
}

#[test]
fn sizeof_handles_a_single_item() {
    let o = countbf(&["sizeof", "--n", "1"]);
    assert!(o.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(row["m_bits"], 15);
    assert_ne!(row["x"], row["y"]);
    assert!(row["memory_bytes"].as_u64().unwrap() > 0);
}
