//! End-to-end tests of the `polarnet` binary: exit codes, JSON shapes,
//! seed handling, and the no-partial-output guarantee.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn polarnet<I, S>(args: I) -> Command
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polarnet"));
    // Keep the ambient environment from leaking a seed into the tests.
    cmd.env_remove("POLARNET_SEED");
    cmd.args(args);
    cmd
}

fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    polarnet(args).output().expect("binary should launch")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout should be JSON")
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

const PATH3: &str = "0 1\n1 2\n";
const ATTRS3: &str = "0 1.0 1\n1 1.0 0\n2 1.0 1\n";

/// A 10-vertex cycle with a few chords; connected and non-trivial.
const RING10: &str = "0 1\n1 2\n2 3\n3 4\n4 5\n5 6\n6 7\n7 8\n8 9\n0 9\n0 5\n2 7\n4 9\n";

#[test]
fn analyze_path_reports_the_balanced_half() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("path.tsv");
    write(&edges, PATH3);
    let out = run([
        "analyze",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        "fd",
        "--s0",
        "0",
        "--s1",
        "2",
        "--rho",
        "0.5",
    ]);
    let json = stdout_json(&out);
    assert!((json["disagreement"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((json["polarization"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((json["index"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(json["model"], "fd");
}

#[test]
fn equal_leaders_exit_with_usage_error() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("path.tsv");
    write(&edges, PATH3);
    let out = run([
        "analyze",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        "fd",
        "--s0",
        "1",
        "--s1",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("leaders must differ"), "stderr: {stderr}");
}

#[test]
fn mixed_model_flags_are_rejected() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("path.tsv");
    let attrs = dir.path().join("attrs.tsv");
    write(&edges, PATH3);
    write(&attrs, ATTRS3);
    // fd does not take --attrs.
    let out = run([
        "analyze",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        "fd",
        "--s0",
        "0",
        "--s1",
        "2",
        "--attrs",
        attrs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    // fj does not take --s0.
    let out = run([
        "analyze",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        "fj",
        "--attrs",
        attrs.to_str().unwrap(),
        "--s0",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // Unknown flags are a usage error, not a crash.
    let out = run(["analyze", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_budget_flip_returns_an_empty_plan() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("path.tsv");
    let attrs = dir.path().join("attrs.tsv");
    write(&edges, PATH3);
    write(&attrs, ATTRS3);
    let out = run([
        "flip-prefs",
        "--edges",
        edges.to_str().unwrap(),
        "--attrs",
        attrs.to_str().unwrap(),
        "--k",
        "0",
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["flipped"].as_array().unwrap().len(), 0);
    assert_eq!(json["k"], 0);
    assert_eq!(
        json["objective_before"].as_f64().unwrap(),
        json["objective_after"].as_f64().unwrap()
    );
}

#[test]
fn lambda_and_k_are_mutually_exclusive() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("path.tsv");
    let attrs = dir.path().join("attrs.tsv");
    write(&edges, PATH3);
    write(&attrs, ATTRS3);
    let base = [
        "flip-prefs",
        "--edges",
        edges.to_str().unwrap(),
        "--attrs",
        attrs.to_str().unwrap(),
    ];
    let both: Vec<&str> = base
        .iter()
        .copied()
        .chain(["--lambda", "0.5", "--k", "1"])
        .collect();
    assert_eq!(run(both).status.code(), Some(1));
    let neither: Vec<&str> = base.to_vec();
    assert_eq!(run(neither).status.code(), Some(1));
}

#[test]
fn distances_match_the_series_resistance() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("path.tsv");
    write(&edges, PATH3);
    let out = run([
        "distances",
        "--edges",
        edges.to_str().unwrap(),
        "--u",
        "0",
        "--v",
        "2",
    ]);
    let json = stdout_json(&out);
    assert!((json["resistance"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(json["biharmonic"].as_f64().unwrap() > 0.0);
    // All-pairs form lists n(n-1)/2 rows.
    let out = run(["distances", "--edges", edges.to_str().unwrap()]);
    let json = stdout_json(&out);
    assert_eq!(json["pairs"].as_array().unwrap().len(), 3);
}

#[test]
fn select_leader_reports_a_valid_choice() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("ring.tsv");
    write(&edges, RING10);
    let out = run([
        "select-leader",
        "--edges",
        edges.to_str().unwrap(),
        "--s0",
        "0",
    ]);
    let json = stdout_json(&out);
    let s1 = json["choice"]["s1"].as_u64().unwrap();
    assert!(s1 < 10 && s1 != 0);
    assert!(json["choice"]["index"].as_f64().unwrap() > 0.0);
}

#[test]
fn reports_are_byte_identical_for_identical_configs() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("ring.tsv");
    write(&edges, RING10);
    let args = [
        "experiment",
        "--edges",
        edges.to_str().unwrap(),
        "--lambda-points",
        "3",
        "--trials",
        "5",
        "--seed",
        "11",
    ];
    let a = run(args);
    let b = run(args);
    assert!(a.status.success() && b.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);

    // The sparse designer is seeded the same way.
    let args = [
        "design-sparse",
        "--n",
        "12",
        "--k",
        "66",
        "--max-weight",
        "70",
        "--epsilon",
        "0.6",
    ];
    let a = run(args);
    let b = run(args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn environment_seed_overrides_the_default_but_not_the_flag() {
    let args = [
        "design-sparse",
        "--n",
        "10",
        "--k",
        "45",
        "--max-weight",
        "50",
        "--epsilon",
        "0.6",
    ];
    // Default seed is 42.
    let json: Value = serde_json::from_slice(&run(args).stdout).unwrap();
    assert_eq!(json["seed"], 42);
    // Environment overrides the default.
    let out = polarnet(args).env("POLARNET_SEED", "7").output().unwrap();
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["seed"], 7);
    // An explicit flag beats the environment.
    let with_flag: Vec<&str> = args.iter().copied().chain(["--seed", "9"]).collect();
    let out = polarnet(with_flag)
        .env("POLARNET_SEED", "7")
        .output()
        .unwrap();
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["seed"], 9);
    // A malformed environment seed is a usage error.
    let out = polarnet(args).env("POLARNET_SEED", "pi").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("POLARNET_SEED"));
}

#[test]
fn failed_runs_leave_no_partial_files() {
    let dir = TempDir::new().unwrap();
    let output = dir.path().join("report.json");
    let graph_out = dir.path().join("designed.tsv");
    // An unattainable tolerance under a tight edge cap fails numerically.
    let out = run([
        "design-sparse",
        "--n",
        "30",
        "--k",
        "29",
        "--max-weight",
        "100",
        "--epsilon",
        "0.05",
        "--output",
        output.to_str().unwrap(),
        "--graph-out",
        graph_out.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "solver failures exit with 2");
    assert!(!output.exists(), "no partial JSON report");
    assert!(!graph_out.exists(), "no partial graph export");

    // A malformed input line is a usage error and writes nothing either.
    let edges = dir.path().join("bad.tsv");
    write(&edges, "0 1\n1 two\n");
    let out = run([
        "analyze",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        "fd",
        "--s0",
        "0",
        "--s1",
        "1",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr names the line: {stderr}");
    assert!(!output.exists());
}

#[test]
fn duplicate_edges_follow_the_dedupe_policy() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("dup.tsv");
    write(&edges, "0 1\n1 2\n1 0\n");
    let base = [
        "distances",
        "--edges",
        edges.to_str().unwrap(),
        "--u",
        "0",
        "--v",
        "2",
    ];
    // Strict by default.
    assert_eq!(run(base).status.code(), Some(1));
    // Opt-in collapse keeps the first copy.
    let relaxed: Vec<&str> = base
        .iter()
        .copied()
        .chain(["--dedupe", "keep-first"])
        .collect();
    let json = stdout_json(&run(relaxed));
    assert!((json["resistance"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn analyze_writes_a_trajectory_csv_on_request() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("path.tsv");
    let csv = dir.path().join("traj.csv");
    write(&edges, PATH3);
    let out = run([
        "analyze",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        "fd",
        "--s0",
        "0",
        "--s1",
        "2",
        "--simulate-horizon",
        "50",
        "--trajectory-out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x_0,x_1,x_2");
    assert!(lines.count() > 1);
    // The middle node ends halfway between the leaders.
    let last = text.lines().last().unwrap();
    let mid: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((mid - 0.5).abs() < 1e-6);
}

#[test]
fn experiment_writes_a_csv_mirror() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("ring.tsv");
    let csv = dir.path().join("sweep.csv");
    let json_path = dir.path().join("report.json");
    write(&edges, RING10);
    let out = run([
        "experiment",
        "--edges",
        edges.to_str().unwrap(),
        "--lambda-points",
        "4",
        "--trials",
        "3",
        "--csv",
        csv.to_str().unwrap(),
        "--output",
        json_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "lambda,k,objective_l1,objective_topk,objective_random_mean,objective_random_std"
    );
    assert_eq!(text.lines().count(), 5);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);
    assert_eq!(report["n"], 10);
    // Rows arrive sorted by the penalty strength.
    let lambdas: Vec<f64> = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["lambda"].as_f64().unwrap())
        .collect();
    assert!(lambdas.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn design_weights_exports_the_reweighted_graph() {
    let dir = TempDir::new().unwrap();
    let edges = dir.path().join("ring.tsv");
    let attrs = dir.path().join("attrs.tsv");
    let graph_out = dir.path().join("tuned.tsv");
    write(&edges, RING10);
    let attr_lines: String = (0..10)
        .map(|v| format!("{v} 1.0 {}\n", if v % 3 == 0 { 0 } else { 1 }))
        .collect();
    write(&attrs, &attr_lines);
    let out = run([
        "design-weights",
        "--edges",
        edges.to_str().unwrap(),
        "--attrs",
        attrs.to_str().unwrap(),
        "--lower",
        "0.1",
        "--upper",
        "2.0",
        "--budget",
        "10",
        "--graph-out",
        graph_out.to_str().unwrap(),
    ]);
    let json = stdout_json(&out);
    assert!(
        json["objective"].as_f64().unwrap() <= json["objective_start"].as_f64().unwrap() + 1e-12
    );
    let text = std::fs::read_to_string(&graph_out).unwrap();
    // 13 edges plus the header comment.
    assert_eq!(text.lines().count(), 14);
    let total: f64 = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(2).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!(total <= 10.0 + 1e-9);
}
