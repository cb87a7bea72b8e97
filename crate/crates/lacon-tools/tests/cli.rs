use std::path::PathBuf;
use std::process::{Command, Output};

use lacon_tools::formats::{parse_graph, parse_parity};

const SMALL_CAPS: &str = "graph-size=3,orders=1,random-lacons=5,pipeline-cases=3,colfacts=50";

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn lacon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lacon")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn decode_golden_lacon_prints_the_graph() {
    let o = lacon(&["decode", "--kind", "lacon", "--in", &data("golden.lacon")]);
    assert_eq!(o.status.code(), Some(0));
    let want = parse_graph(&std::fs::read_to_string(data("golden.graph")).unwrap()).unwrap();
    let got = parse_graph(&stdout(&o)).unwrap();
    assert!(got.same_structure(&want));
    assert_eq!(got.edge_count(), 6);
}

#[test]
fn verify_golden_parity_passes() {
    let o = lacon(&["verify", "--kind", "parity", "--in", &data("golden.parity"), "--graph", &data("golden.graph")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn verify_mutated_lacon_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("golden.lacon")).unwrap().replace("hidden h2 0", "hidden h2 1");
    let path = dir.path().join("mutated.lacon");
    std::fs::write(&path, text).unwrap();
    let o = lacon(&["verify", "--kind", "lacon", "--in", path.to_str().unwrap(), "--graph", &data("golden.graph"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let failed: Vec<serde_json::Value> =
        stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).filter(|v: &serde_json::Value| v["status"] == "fail").collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["name"], "edges");
    assert!(failed[0]["witness"].as_str().unwrap().starts_with('{'));
}

#[test]
fn malformed_lacon_exits_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("malformed.lacon");
    std::fs::write(&path, "lacon\ntarget a\nhidden h 2\n").unwrap();
    let o = lacon(&["decode", "--kind", "lacon", "--in", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lacon(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lacon(&["run-corpus", "--caps", "speed=3"]).status.code(), Some(2));
    assert_eq!(lacon(&["tw", "--graph", "/nonexistent/graph"]).status.code(), Some(2));
}

#[test]
fn scalar_commands() {
    let g = data("golden.graph");
    assert_eq!(stdout(&lacon(&["tw", "--graph", &g])).trim(), "2");
    assert_eq!(stdout(&lacon(&["td", "--graph", &g])).trim(), "4");
    let o = lacon(&["eval", "--graph", &g, "--formula", "(edge x y)", "--assign", "x=a,y=d"]);
    assert_eq!(stdout(&o).trim(), "false");
    let o = lacon(&["colnum", "--graph", &g, "--order", &data("golden.order"), "--radius", "inf", "--mode", "strong", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v["value"].as_u64().unwrap() >= 3);
}

#[test]
fn pipeline_emits_a_parity_decomposition_of_the_complement() {
    let o = lacon(&[
        "pipeline",
        "--transduction",
        &data("complement.transduction"),
        "--graph",
        &data("golden.graph"),
        "--order",
        &data("golden.order"),
        "--emit",
        "parity",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let decoded = parse_parity(&stdout(&o)).unwrap().decode().unwrap();
    let edges: Vec<(String, String)> = decoded.named_edges().into_iter().collect();
    let want: Vec<(String, String)> = [("a@1", "d@1"), ("a@1", "e@1"), ("b@1", "c@1"), ("b@1", "e@1")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(edges, want);
}

#[test]
fn run_corpus_is_deterministic_and_respects_type_rank_cap() {
    let caps = format!("{SMALL_CAPS},type-rank=0");
    let a = lacon(&["run-corpus", "--caps", &caps, "--format", "json"]);
    let b = lacon(&["run-corpus", "--caps", &caps, "--format", "json"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let lines: Vec<serde_json::Value> = stdout(&a).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.iter().filter(|v| v.get("name").is_some()).count(), 11);
    let det = lines.iter().find(|v| v["name"] == "c10-determination").unwrap();
    assert_eq!(det["metrics"]["joint_rank"], 0);
    assert_eq!(det["status"], "pass");
}
