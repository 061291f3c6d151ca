use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oran-orch"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(cli(d, &["generate", "--nodes", "30", "--requests", "6", "--seed", "2", "-o", "inst.json"]).status.success());
    assert!(cli(d, &["solve", "inst.json", "-o", "sol.json"]).status.success());

    let ok = cli(d, &["validate", "inst.json", "sol.json"]);
    assert_eq!(ok.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["feasible"], true);

    // accept a request without assigning anything to it
    let mut sol: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("sol.json")).unwrap()).unwrap();
    let policy = &mut sol["result"]["policy"];
    policy["active"] = serde_json::json!([]);
    std::fs::write(d.join("bad.json"), sol.to_string()).unwrap();
    let bad = cli(d, &["validate", "inst.json", "bad.json"]);
    assert_eq!(bad.status.code(), Some(1), "{}", String::from_utf8_lossy(&bad.stderr));

    let missing = cli(d, &["validate", "inst.json", "nope.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn branched_solution_validates_per_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(cli(d, &["generate", "--nodes", "60", "--requests", "8", "-o", "inst.json"]).status.success());
    assert!(cli(d, &["solve", "inst.json", "--mode", "branched", "-o", "sol.json"]).status.success());
    let out = cli(d, &["validate", "inst.json", "sol.json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["reports"].as_array().unwrap().len() >= 2);
}
