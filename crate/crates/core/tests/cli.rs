use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn scauction(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scauction"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn gen_to(dir: &Path, file: &str, args: &[&str]) -> String {
    let path = dir.join(file).to_str().unwrap().to_owned();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    let out = scauction(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_nosketch_writes_explicit_valuations() {
    let out = scauction(&["gen", "nosketch", "--m", "16"]);
    let v = json(&out);
    let dom = &v["players"][0]["domain"];
    assert_eq!(dom["kind"], "explicit");
    assert_eq!(dom["valuations"].as_array().unwrap().len(), 4);
}

#[test]
fn gen_is_deterministic() {
    let a = scauction(&["gen", "random_sc", "--seed", "7", "--size", "4", "--m", "8"]);
    let b = scauction(&["gen", "random_sc", "--seed", "7", "--size", "4", "--m", "8"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = scauction(&["gen", "random_sc", "--seed", "8", "--size", "4", "--m", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(scauction(&["gen", "sat2p", "--vars", "5"]).status.code(), Some(3));
    assert_eq!(scauction(&["gen", "nosuch"]).status.code(), Some(2));
    assert_eq!(scauction(&["gen", "random_sc", "--size", "0"]).status.code(), Some(2));
    assert_eq!(scauction(&["solve", "/nonexistent.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = gen_to(dir.path(), "i.json", &["random_sc"]);
    assert_eq!(scauction(&["solve", &path, "--epsilon", "0.25"]).status.code(), Some(2));
    assert_eq!(scauction(&["solve", &path, "--epsilon", "0/1"]).status.code(), Some(2));
    assert_eq!(scauction(&["verify", "bogus"]).status.code(), Some(2));
}

#[test]
fn unknown_instance_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"m": 1, "players": [{"domain": {"kind": "explicit", "valuations": [[0, 1]]}, "report": 0, "bid": 3}]}"#,
    )
    .unwrap();
    assert_eq!(scauction(&["solve", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn solve_all_zero_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    std::fs::write(
        &path,
        r#"{"m": 3, "players": [
            {"domain": {"kind": "explicit", "valuations": [[0, 0, 0, 0]]}, "report": 0},
            {"domain": {"kind": "explicit", "valuations": [[0, 0, 0, 0]]}, "report": 0}
        ]}"#,
    )
    .unwrap();
    for mech in ["kminded", "general", "singleminded", "vcg"] {
        let v = json(&scauction(&["solve", path.to_str().unwrap(), "--mechanism", mech]));
        assert_eq!(v["allocation"], serde_json::json!([0, 0]), "{mech}");
        assert_eq!(v["welfare"], 0);
        assert_eq!(v["ratio_vs_opt"], "1/1");
    }
}

#[test]
fn vcg_on_satisfiable_sat_instance() {
    let dir = tempfile::tempdir().unwrap();
    // x1 or x2 or not x1: a tautology, so satisfiable
    let path = gen_to(dir.path(), "sat.json", &["sat2p", "--vars", "2", "--formula", "1 2 -1"]);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let x = file["players"][0]["report"].as_u64().unwrap();
    let v = json(&scauction(&["solve", &path, "--mechanism", "vcg"]));
    assert_eq!(v["welfare"].as_u64().unwrap(), 4 * 4 * x + 1);
}

#[test]
fn general_ratio_meets_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5 {
        let path = gen_to(
            dir.path(),
            &format!("g{seed}.json"),
            &["random_sc", "--seed", &seed.to_string(), "--players", "3", "--m", "12", "--max-marginal", "40"],
        );
        let v = json(&scauction(&["solve", &path, "--epsilon", "1/4"]));
        let ratio = scauction::rational::parse(v["ratio_vs_opt"].as_str().unwrap()).unwrap();
        assert!(ratio >= scauction::rational::parse("3/4").unwrap());
    }
}

#[test]
fn payments_across_methods() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_to(dir.path(), "p.json", &["random_sc", "--seed", "3", "--players", "3", "--m", "6"]);
    let threshold = json(&scauction(&["pay", &path, "--method", "threshold"]));
    let exact = json(&scauction(&["pay", &path, "--method", "exact"]));
    assert_eq!(threshold["payments"], exact["payments"]);
    assert_eq!(exact["method"], "exact");
    let s1 = json(&scauction(&["pay", &path, "--method", "sample", "--seed", "9"]));
    let s2 = json(&scauction(&["pay", &path, "--method", "sample", "--seed", "9"]));
    assert_eq!(s1, s2);
    assert_eq!(s1["draws"].as_array().unwrap().len(), 3);

    let solved = json(&scauction(&["solve", &path]));
    for (q, p) in solved["allocation"].as_array().unwrap().iter().zip(threshold["payments"].as_array().unwrap()) {
        if q == 0 {
            assert_eq!(p, "0/1");
        }
    }
}

#[test]
fn verify_suites() {
    let v = json(&scauction(&["verify", "payhard", "--vars", "3", "--trials", "100"]));
    assert_eq!(v["status"], "pass");
    let v = json(&scauction(&["verify", "gap", "--bits", "3"]));
    assert_eq!(v["status"], "pass");
    assert_eq!(v["witnesses"][0]["greedy_min_score"], 1);
    assert_eq!(v["witnesses"][1]["kind"], "tie-break-monotonicity");
    let v = json(&scauction(&["verify", "ic", "--trials", "5"]));
    assert_eq!(v["suite"], "ic");
    assert_eq!(v["status"], "pass");
    let out = scauction(&["verify", "mono", "--trials", "5", "--cap-profiles", "1"]);
    assert_eq!(out.status.code(), Some(3));
}
