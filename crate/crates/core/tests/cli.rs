use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn empty_config_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"scenarios": []}"#);
    let out = dir.path().join("out");
    let o = lab(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("summary.csv").exists());
}

#[test]
fn wrong_expectation_exits_one_and_names_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenarios": [
            {"id": "cp-ok", "kind": "cp", "params": {"p": 2}},
            {"id": "cp-negative-control", "kind": "cp", "params": {"p": 1}, "expect": {"verdicts": {"exceeds_two": false}}}
        ]}"#,
    );
    let out = dir.path().join("out");
    let o = lab(&["run", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("cp-negative-control"));
    assert!(!stderr.contains("cp-ok"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("cp-ok.report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for body in [
        "{not json",
        r#"{"scenarios": [{"id": "x", "kind": "no-such-kind", "params": {}}]}"#,
        r#"{"scenarios": [{"id": "x", "kind": "cp", "params": {"p": 1, "bogus": 3}}]}"#,
        r#"{"scenarios": [{"id": "x", "kind": "norm", "params": {"norm": "lp", "weight": "nope", "phi": "bump", "p": 1}}]}"#,
    ] {
        let cfg = write_config(dir.path(), body);
        let o = lab(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{body}");
    }
}

#[test]
fn evaluation_error_exits_three() {
    let o = lab(&["cp", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn single_scenario_prints_report() {
    let o = lab(&["cp", "--p", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cp = report["quantities"]["cp"]["value"].as_f64().unwrap();
    assert!((cp - 2.0 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn kinds_lists_every_kind() {
    let o = lab(&["kinds"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for k in ["cp", "verify-main", "norm", "appendix-osc", "approx-sweep"] {
        assert!(text.lines().any(|l| l == k), "{k}");
    }
}
