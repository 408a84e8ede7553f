//! End-to-end tests of the binary: exit codes, file outputs and the JSON
//! surfaces of every subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ordinal-consensus")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin()).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write test file");
    path
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

const K3: &str = r#"{"n": 3, "edges": [[0,1],[0,2],[1,2]]}"#;
const ONE_EDGE: &str = r#"{"n": 2, "edges": [[0,1]]}"#;

#[test]
fn check_reports_consistency_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", ONE_EDGE);
    let gen = run_in(dir.path(), &["generate", "smis-lines", "--source", "g.json", "--out", "i.json"]);
    assert!(gen.status.success());

    let strong = run_in(dir.path(), &["check", "--instance", "i.json", "--notion", "strong", "--witness"]);
    assert_eq!(strong.status.code(), Some(1));
    let json = stdout_json(&strong);
    assert_eq!(json["consistent"], serde_json::json!(false));
    assert_eq!(json["conflictQuartet"]["labels"][0], "v1");

    // Two metrics: plurality follows the first, so weak consistency holds.
    let weak = run_in(dir.path(), &["check", "--instance", "i.json", "--notion", "weak"]);
    assert_eq!(weak.status.code(), Some(0));
    assert_eq!(stdout_json(&weak)["consistent"], serde_json::json!(true));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "broken.json", "{ not json");
    let output = run_in(dir.path(), &["check", "--instance", "broken.json", "--notion", "strong"]);
    assert_eq!(output.status.code(), Some(2));

    let missing = run_in(dir.path(), &["check", "--instance", "nope.json", "--notion", "strong"]);
    assert_eq!(missing.status.code(), Some(2));

    let usage = run_in(dir.path(), &["check", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn solve_guard_exceeded_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run_in(
        dir.path(),
        &["generate", "random", "--n", "18", "--k", "2", "--model", "uniform", "--seed", "1", "--out", "i.json"],
    );
    assert!(gen.status.success());
    let solve = run_in(
        dir.path(),
        &["solve", "--instance", "i.json", "--notion", "strong", "--algo", "exact"],
    );
    assert_eq!(solve.status.code(), Some(3));
}

#[test]
fn solve_both_reports_ratio_and_feasibility() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", K3);
    run_in(dir.path(), &["generate", "smis-arb", "--source", "g.json", "--out", "i.json"]);
    let solve = run_in(
        dir.path(),
        &[
            "solve",
            "--instance",
            "i.json",
            "--notion",
            "strong",
            "--algo",
            "both",
            "--assert-feasible",
            "--out",
            "result.json",
        ],
    );
    assert_eq!(solve.status.code(), Some(0));
    let json = stdout_json(&solve);
    assert_eq!(json["exact"]["outliers"].as_array().unwrap().len(), 2);
    let ratio = json["ratioVsExact"].as_f64().unwrap();
    assert!((1.0..=4.0).contains(&ratio));
    assert!(dir.path().join("result.json").exists());
}

#[test]
fn roundtrip_families_pass_on_small_sources() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", K3);
    write(dir.path(), "f.json", r#"{"nVars": 1, "clauses": [[1], [-1]]}"#);
    write(dir.path(), "dm.json", r#"{"n": 2, "triples": [[0,0,0],[0,1,1]]}"#);
    for (family, source) in [
        ("smis-lines", "g.json"),
        ("smis-arb", "g.json"),
        ("smis-ultra", "f.json"),
        ("wmis-lines", "g.json"),
        ("wmis-arb", "g.json"),
        ("wmis-ultra", "dm.json"),
    ] {
        let output = run_in(dir.path(), &["roundtrip", "--family", family, "--source", source]);
        assert_eq!(output.status.code(), Some(0), "family {family}");
        assert_eq!(stdout_json(&output)["pass"], serde_json::json!(true), "family {family}");
    }
    // Shared-x matching instance: max matching 1, consensus 4*2 + 1 = 9 of 10.
    let output = run_in(dir.path(), &["roundtrip", "--family", "wmis-ultra", "--source", "dm.json"]);
    let json = stdout_json(&output);
    assert_eq!(json["sourceOptimum"], serde_json::json!(1));
    assert_eq!(json["expectedValue"], serde_json::json!(9));
    assert_eq!(json["points"], serde_json::json!(10));
}

#[test]
fn relations_emits_a_generating_metric() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        &["generate", "random", "--n", "5", "--k", "1", "--model", "line", "--seed", "3", "--out", "i.json"],
    );
    let output = run_in(
        dir.path(),
        &["relations", "--instance", "i.json", "--emit-generating-metric", "gen.json"],
    );
    assert_eq!(output.status.code(), Some(0));
    let json = stdout_json(&output);
    assert_eq!(json["valid"], serde_json::json!(true));
    assert_eq!(json["pairNodes"], serde_json::json!(10));
    assert_eq!(json["relationCount"], serde_json::json!(45));
    // The emitted single-metric instance is trivially consistent.
    let check = run_in(dir.path(), &["check", "--instance", "gen.json", "--notion", "strong"]);
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn relations_on_cyclic_plurality_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", ONE_EDGE);
    run_in(dir.path(), &["generate", "wmis-arb", "--source", "g.json", "--out", "i.json"]);
    let output = run_in(
        dir.path(),
        &["relations", "--instance", "i.json", "--emit-generating-metric", "gen.json"],
    );
    assert_eq!(output.status.code(), Some(1));
    assert!(!dir.path().join("gen.json").exists());
}

#[test]
fn verify_gadget_passes_and_detects_source_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "dm.json", r#"{"n": 2, "triples": [[0,0,0],[1,0,0],[1,1,1]]}"#);
    write(dir.path(), "other.json", r#"{"n": 2, "triples": [[0,0,0],[1,1,1]]}"#);
    run_in(dir.path(), &["generate", "wmis-ultra", "--source", "dm.json", "--out", "i.json"]);
    // Accepted under both names.
    for name in ["gadget", "lemma5"] {
        let output =
            run_in(dir.path(), &["verify", name, "--instance", "i.json", "--source", "dm.json"]);
        assert_eq!(output.status.code(), Some(0), "verify {name}");
        assert_eq!(stdout_json(&output)["passed"], serde_json::json!(true));
    }
    let mismatch =
        run_in(dir.path(), &["verify", "gadget", "--instance", "i.json", "--source", "other.json"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn tree_conversions_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "tree.json",
        r#"{"height": "2/1", "children": [{"leaf": 0}, {"height": "1/1", "children": [{"leaf": 1}, {"leaf": 2}]}]}"#,
    );
    let to = run_in(dir.path(), &["tree-to-matrix", "--tree", "tree.json", "--out", "um.json"]);
    assert_eq!(to.status.code(), Some(0));
    let back = run_in(dir.path(), &["matrix-to-tree", "--instance", "um.json", "--out", "tree2.json"]);
    assert_eq!(back.status.code(), Some(0));
    let again = run_in(dir.path(), &["tree-to-matrix", "--tree", "tree2.json", "--out", "um2.json"]);
    assert_eq!(again.status.code(), Some(0));
    let a = std::fs::read_to_string(dir.path().join("um.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("um2.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn matrix_to_tree_rejects_non_ultrametrics() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        &["generate", "random", "--n", "4", "--k", "1", "--model", "line", "--seed", "8", "--out", "i.json"],
    );
    let output = run_in(dir.path(), &["matrix-to-tree", "--instance", "i.json", "--out", "t.json"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn bench_emits_config_ordered_csv() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bench.json",
        r#"{"version": 1, "runs": [
            {"id": "one", "notion": "strong", "algo": "both", "model": "uniform", "n": 6, "k": 2, "seed": 1},
            {"id": "two", "notion": "weak", "algo": "approx", "model": "ultrametric", "n": 6, "k": 3, "seed": 2}
        ]}"#,
    );
    let output = run_in(dir.path(), &["bench", "--config", "bench.json", "--out", "bench.csv"]);
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "schema_version,instance_id,family,n,k,algo,outlier_count,exact_count,ratio,wall_time_micros,comparisons,seed"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("1,one,random-uniform,6,2,both,"));
    assert!(rows[1].starts_with("1,two,random-ultrametric,6,3,approx,"));
    assert_eq!(std::fs::read_to_string(dir.path().join("bench.csv")).unwrap(), text);
}

#[test]
fn oracle_rejects_unknown_problems() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.json", K3);
    let output = run_in(dir.path(), &["oracle", "clique", "--source", "g.json"]);
    assert_eq!(output.status.code(), Some(2));
}
