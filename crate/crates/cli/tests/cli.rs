use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn modsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_partition_example() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "p.json",
        r#"{"sizes":[2,3],"counts":[2,2],"targets":[5,5]}"#,
    );
    let out = modsched(&["solve", "partition", &file]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["feasible"], Value::Bool(true));
    assert_eq!(doc["assignment"], serde_json::json!([[1, 1], [1, 1]]));
}

#[test]
fn solve_makespan_example() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "s.json",
        r#"{"sizes":[4,2],"counts":[1,1],"speeds":[2,1]}"#,
    );
    let out = modsched(&["solve", "makespan", &file]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["optimal"], "2/1");
}

#[test]
fn infeasible_partition_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "p.json",
        r#"{"sizes":[3],"counts":[2],"targets":[2,4]}"#,
    );
    let out = modsched(&["solve", "partition", &file]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["feasible"], Value::Bool(false));
}

#[test]
fn unbalanced_targets_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "p.json",
        r#"{"sizes":[2,3],"counts":[2,2],"targets":[5,6]}"#,
    );
    let out = modsched(&["solve", "partition", &file]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("balance violated") && stderr.contains("targets"),
        "{stderr}"
    );
}

#[test]
fn malformed_json_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "bad.json", "{");
    assert_eq!(modsched(&["solve", "ilp", &file]).status.code(), Some(2));
    assert_eq!(
        modsched(&["solve", "ilp", "/nonexistent/file.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn trace_lists_greedy_phases() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "p.json",
        r#"{"sizes":[1,2],"counts":[4,30],"targets":[30,34]}"#,
    );
    let out = modsched(&["solve", "partition", &file, "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let trace = json(&out)["trace"].as_array().unwrap().clone();
    assert!(!trace.is_empty());
    assert!(trace
        .iter()
        .all(|r| r["phase"].is_string() && r["jobs"].is_u64()));
}

#[test]
fn forced_pivot() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "p.json",
        r#"{"sizes":[2,3],"counts":[2,2],"targets":[5,5]}"#,
    );
    let out = modsched(&["solve", "partition", &file, "--pivot", "3"]);
    assert_eq!(json(&out)["pivot"], 3);
    assert_eq!(
        modsched(&["solve", "partition", &file, "--pivot", "4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            r#"{"sizes":[2,3],"counts":[2,2],"targets":[5,5],"assignment":[[1,1],[1,1]]}"#,
            0,
            "[5,5]",
        ),
        (
            r#"{"sizes":[2,3],"counts":[2,2],"targets":[5,5],"assignment":[[2,0],[0,2]]}"#,
            1,
            "[4,6]",
        ),
        (
            r#"{"sizes":[1,4],"counts":[3,2],"targets":[11],"assignment":[[3,2]]}"#,
            0,
            "[11]",
        ),
    ];
    for (text, code, loads) in cases {
        let file = write(dir.path(), "v.json", text);
        let out = modsched(&["verify", &file]);
        assert_eq!(out.status.code(), Some(code), "{text}");
        assert_eq!(json(&out)["loads"].to_string(), loads);
    }
    let file = write(
        dir.path(),
        "v.json",
        r#"{"sizes":[2,3],"counts":[2,2],"targets":[5,5],"assignment":[[1,1]]}"#,
    );
    assert_eq!(modsched(&["verify", &file]).status.code(), Some(2));
}

#[test]
fn ilp_and_oracle_agree() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "i.json",
        r#"{"kind":"mcilp","matrix":[[1,-1]],"rhs":[0],"objective":[2,1],"sets":[[0,1]],"cardinalities":[2]}"#,
    );
    let solved = json(&modsched(&["solve", "ilp", &file]));
    let oracle = json(&modsched(&["oracle", &file]));
    assert_eq!(solved["x"], serde_json::json!([1, 1]));
    assert_eq!(solved["objective"], 3);
    assert_eq!(solved["x"], oracle["x"]);
    assert_eq!(solved["objective"], oracle["objective"]);
}

#[test]
fn oracle_budget_exhaustion_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "p.json",
        r#"{"sizes":[1,2,3],"counts":[4,4,4],"targets":[8,8,8]}"#,
    );
    let out = modsched(&["oracle", &file, "--budget", "5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn gen_is_balanced_and_deterministic() {
    let args = [
        "gen",
        "feasible-partition",
        "--seed",
        "1",
        "--d",
        "2",
        "--pmax",
        "5",
        "--m",
        "2",
        "--n",
        "6",
    ];
    let (a, b) = (modsched(&args), modsched(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    let sizes: Vec<u64> = serde_json::from_value(doc["sizes"].clone()).unwrap();
    let counts: Vec<u64> = serde_json::from_value(doc["counts"].clone()).unwrap();
    let targets: Vec<u64> = serde_json::from_value(doc["targets"].clone()).unwrap();
    let total: u64 = sizes.iter().zip(&counts).map(|(p, n)| p * n).sum();
    assert_eq!(targets.iter().sum::<u64>(), total);
    assert_eq!(counts.iter().sum::<u64>(), 6);
}

#[test]
fn gen_rejects_fewer_jobs_than_machines() {
    let out = modsched(&["gen", "feasible-partition", "--m", "4", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_documents_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = modsched(&[
        "gen",
        "uniform-random",
        "--seed",
        "3",
        "--d",
        "3",
        "--pmax",
        "6",
        "--m",
        "3",
        "--n",
        "9",
    ]);
    let file = write(dir.path(), "s.json", &String::from_utf8_lossy(&out.stdout));
    let solved = modsched(&["solve", "makespan", &file]);
    let oracle = modsched(&["oracle", &file]);
    assert_eq!(json(&solved)["optimal"], json(&oracle)["optimal"]);
}

#[test]
fn bench_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = modsched(&["bench", &dir.path().to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn bench_ten_generated_instances() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..10 {
        let kind = if seed % 2 == 0 {
            "feasible-partition"
        } else {
            "uniform-random"
        };
        let seed = seed.to_string();
        let out = modsched(&[
            "gen", kind, "--seed", &seed, "--d", "2", "--pmax", "4", "--m", "2", "--n", "7",
        ]);
        write(
            dir.path(),
            &format!("inst{seed}.json"),
            &String::from_utf8_lossy(&out.stdout),
        );
    }
    let corpus = dir.path().to_string_lossy().into_owned();
    let out = modsched(&["bench", &corpus, "--repetitions", "3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r["verified"] == Value::Bool(true)));
    let csv = modsched(&["bench", &corpus]);
    assert_eq!(String::from_utf8_lossy(&csv.stdout).lines().count(), 11);
}
