use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_smoothsched"));
    c.env("SMOOTHSCHED_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_solve_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let sched = dir.path().join("s.json");
    let out = run(&["--seed", "5", "gen", "--family", "jump-lb", "--phi", "2", "-n", "6", "-m", "3", "-o", p(&inst)]);
    assert!(out.status.success());
    let again = dir.path().join("i2.json");
    run(&["--seed", "5", "gen", "--family", "jump-lb", "--phi", "2", "-n", "6", "-m", "3", "-o", p(&again)]);
    assert_eq!(std::fs::read(&inst).unwrap(), std::fs::read(&again).unwrap());

    let summary = ok_json(&[
        "solve", "-i", p(&inst), "--algo", "local-search", "--neighborhood", "lex-jump", "-o", p(&sched),
    ]);
    assert_eq!(summary["info"]["strictly_decreasing"], true);

    let report = ok_json(&["verify", "-i", p(&inst), "-s", p(&sched)]);
    assert_eq!(report["feasible"], true);
    assert_eq!(report["lex_jump_optimal"], true);
    assert_eq!(report["jump_optimal"], true);
    assert_eq!(report["near_list"], true);
    assert_eq!(report["opt_mode"], "exact");
    let checks = report["classification"]["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["status"] != "fail"));
}

#[test]
fn verify_reports_infeasible_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let sched = dir.path().join("s.json");
    std::fs::write(&inst, r#"{"speeds":[1,1],"jobs":[{"p":0.5,"allowed":[2]},{"p":0.5}]}"#).unwrap();
    std::fs::write(&sched, r#"{"assignment":[1,1]}"#).unwrap();
    let report = ok_json(&["verify", "-i", p(&inst), "-s", p(&sched)]);
    assert_eq!(report["feasible"], false);
    assert_eq!(report["validation"]["disallowed"], serde_json::json!([0]));
}

#[test]
fn list_with_order_and_optimal() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    std::fs::write(&inst, r#"{"speeds":[2,1],"jobs":[{"p":0.9},{"p":0.8},{"p":0.7}]}"#).unwrap();
    let out = ok_json(&["solve", "-i", p(&inst), "--algo", "list", "--order", "3,2,1"]);
    assert_eq!(out["assignment"].as_array().unwrap().len(), 3);
    let opt = ok_json(&["solve", "-i", p(&inst), "--algo", "optimal"]);
    let a: Vec<u64> = opt["assignment"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(a.iter().all(|&i| i == 1 || i == 2));
}

#[test]
fn construct_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let meta = ok_json(&["construct", "lexlist", "--params", r#"{"phi":64}"#, "--out-dir", p(dir.path())]);
    assert_eq!(meta["construction"]["params"]["r"], 3);
    assert!(meta["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
    for f in ["instance.json", "bad.json", "good.json", "meta.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let report = ok_json(&[
        "verify",
        "-i",
        p(&dir.path().join("instance.json")),
        "-s",
        p(&dir.path().join("bad.json")),
        "--opt-upper-bound",
        "3",
    ]);
    assert_eq!(report["lex_jump_optimal"], true);
    assert_eq!(report["opt_mode"], "upper-bound");
}

#[test]
fn strict_mode_rejects_small_parameters() {
    let out = run(&["construct", "restricted-lex", "--params", r#"{"k":3}"#]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("68"));
    let ok = ok_json(&["--lenient", "construct", "restricted-lex", "--params", r#"{"k":3}"#]);
    assert_eq!(ok["construction"]["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn estimate_both_methods() {
    let exact = ok_json(&["--seed", "1", "estimate", "--family", "jump-lb", "-n", "5", "-m", "3", "--trials", "10"]);
    assert_eq!(exact["estimator"], "exact");
    assert_eq!(exact["lower_bound"], false);
    let ms = ok_json(&[
        "--seed", "1", "estimate", "--family", "jump-lb", "-n", "5", "-m", "3", "--trials", "10", "--method",
        "multistart",
    ]);
    assert_eq!(ms["lower_bound"], true);
    assert!(ms["mean"].as_f64().unwrap() <= exact["mean"].as_f64().unwrap() + 1e-12);
}

#[test]
fn sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(
        &grid,
        r#"{"entries":[{"kind":"smoothed","family":"jump-lb","neighborhood":"jump","phi":[1,2],"n":[4],"trials":6},
                       {"kind":"construction","name":"jump-related","params":[{"phi":3}],"samples":4}]}"#,
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run(&["--seed", "9", "sweep", "--grid", p(&grid), "-o", p(&a)]).status.success());
    let out = bin()
        .env("SMOOTHSCHED_THREADS", "1")
        .args(["--seed", "9", "sweep", "--grid", p(&grid), "-o", p(&b)])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("kind,name,neighborhood,estimator,phi,n,m,trials,mean_ratio"));

    std::fs::write(&grid, r#"{"entries":[]}"#).unwrap();
    assert!(run(&["sweep", "--grid", p(&grid), "-o", p(&a)]).status.success());
    assert_eq!(std::fs::read_to_string(&a).unwrap().lines().count(), 1);
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    std::fs::write(&inst, r#"{"speeds":[1,2],"jobs":[{"p":1}]}"#).unwrap();
    let out = run(&["solve", "-i", p(&inst)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-increasing"));
    let out = run(&["sweep", "--grid", p(&inst), "-o", "/nonexistent/dir/x.csv"]);
    assert!(!out.status.success());
}
