use std::path::{Path, PathBuf};
use std::process::Command;

use invkit::cli;
use serde_json::Value;

const DIAMOND: &str = r#"{"system":{"A":[[-1,0],[0,-1]],"time":"continuous"},
 "set":{"type":"h_polyhedron","G":[[1,1],[-1,1],[1,-1],[-1,-1]],"b":[1,1,1,1]}}"#;
const EXPANDING: &str = r#"{"system":{"A":[[2,0],[0,2]],"time":"discrete"},
 "set":{"type":"ellipsoid","Q":[[1,0],[0,1]]}}"#;
const ROTATION: &str = r#"{"system":{"A":[[0,-1],[1,0]],"time":"continuous"},
 "set":{"type":"ellipsoid","Q":[[1,0],[0,1]]}}"#;
const SPIRAL: &str = r#"{"system":{"A":[[1,-1,0],[1,1,0],[0,0,1]],"time":"continuous"},
 "set":{"type":"lorenz_cone","Q":[[1,0,0],[0,1,0],[0,0,-1]]},"tolerances":{"psd":0.0}}"#;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["invkit"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes_follow_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [(DIAMOND, 0, "invariant"), (EXPANDING, 1, "not_invariant"), (ROTATION, 2, "inconclusive"), (SPIRAL, 0, "invariant")];
    for (i, (text, code, verdict)) in cases.into_iter().enumerate() {
        let p = write(dir.path(), &format!("p{i}.json"), text);
        let r = run(&["check", s(&p)]);
        assert_eq!(r.code, code, "{}", r.err);
        let report: Value = serde_json::from_str(&r.out).unwrap();
        assert_eq!(report["verdict"], verdict);
        assert_eq!(report["seed"], 0);
        assert!(report["tool_version"].is_string());
    }
}

#[test]
fn pinned_tolerance_flag_decides_the_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "rot.json", ROTATION);
    assert_eq!(run(&["check", s(&p), "--tol-psd", "0"]).code, 0);
}

#[test]
fn report_file_reverifies_on_its_own() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("diamond.json", DIAMOND), ("spiral.json", SPIRAL)] {
        let p = write(dir.path(), name, text);
        let out = dir.path().join(format!("{name}.report"));
        let r = run(&["check", s(&p), "--report", s(&out)]);
        assert_eq!(r.code, 0);
        assert_eq!(r.out.trim(), "invariant");
        let v = run(&["verify", s(&p), "--report", s(&out)]);
        assert_eq!(v.code, 0, "{}", v.out);
        let outcome: Value = serde_json::from_str(&v.out).unwrap();
        assert_eq!(outcome["valid"], true);
    }
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spiral.json.report")).unwrap()).unwrap();
    assert_eq!(report["certificate"]["eta"], 2.0);
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "diamond.json", DIAMOND);
    let out = dir.path().join("report.json");
    run(&["check", s(&p), "--report", s(&out)]);
    let mut report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    report["certificate"]["matrix"] = serde_json::json!([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]);
    std::fs::write(&out, report.to_string()).unwrap();
    let v = run(&["verify", s(&p), "--report", s(&out)]);
    assert_eq!(v.code, 1);
}

#[test]
fn witness_search() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "exp.json", EXPANDING);
    let r = run(&["witness", s(&p), "--samples", "20", "--steps", "5", "--seed", "3"]);
    assert_eq!(r.code, 1);
    let doc: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(doc["found"], true);
    assert_eq!(doc["seed"], 3);
    let p = write(dir.path(), "diamond.json", DIAMOND);
    assert_eq!(run(&["witness", s(&p), "--samples", "20", "--steps", "20"]).code, 0);
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = DIAMOND.replace("\"set\"", "\"x0\":[1,0],\"set\"");
    let p = write(dir.path(), "d.json", &text);
    let r = run(&["simulate", s(&p), "--steps", "3", "--dt", "0.5"]);
    assert_eq!(r.code, 0);
    let lines: Vec<&str> = r.out.lines().collect();
    assert_eq!(lines[0], "t,x1,x2");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "0,1,0");
    let last: Vec<f64> = lines[4].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 1.5).abs() < 1e-12 && (last[1] - (-1.5f64).exp()).abs() < 1e-12);
}

#[test]
fn euler_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "d.json", DIAMOND);
    let r = run(&["euler", s(&p), "--method", "forward", "--grid", "8"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let doc: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(doc["method"], "forward");
    assert_eq!(doc["table"].as_array().unwrap().len(), 8);
    let r = run(&["euler", s(&p), "--dt", "2.5", "--method", "forward"]);
    let doc: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(doc["table"][0]["passes"], false);
    let discrete = write(dir.path(), "e.json", EXPANDING);
    assert_eq!(run(&["euler", s(&discrete)]).code, 3);
}

#[test]
fn diagnose_reports_cone_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", SPIRAL);
    let r = run(&["diagnose", s(&p), "--samples", "16"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let doc: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(doc["set"], "lorenz_cone");
    assert!(doc["cone"].is_object());
    assert!(doc["boundary_flow"].is_object());
    assert_eq!(doc["nagumo"]["clean"], true);
}

#[test]
fn input_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"system\": ");
    let r = run(&["check", s(&bad)]);
    assert_eq!(r.code, 3);
    assert!(r.err.contains("parse error"), "{}", r.err);
    let q = write(dir.path(), "q.json", &EXPANDING.replace("[[1,0],[0,1]]", "[[1,0],[0,-1]]"));
    assert_eq!(run(&["check", s(&q)]).code, 3);
    assert_eq!(run(&["check", "/nonexistent/problem.json"]).code, 3);
    assert_eq!(run(&["check"]).code, 3);
    assert_eq!(run(&["frobnicate", s(&bad)]).code, 3);
    let p = write(dir.path(), "d.json", DIAMOND);
    assert_eq!(run(&["check", s(&p), "--method", "sideways"]).code, 3);
    assert_eq!(run(&["verify", s(&p)]).code, 3);
}

#[test]
fn binary_honors_exit_contract() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_invkit");
    for (text, code) in [(DIAMOND, 0), (EXPANDING, 1), (ROTATION, 2), ("[]", 3)] {
        let p = write(dir.path(), "p.json", text);
        let status = Command::new(bin).args(["check", s(&p)]).env("INVKIT_LOG", "debug").output().unwrap();
        assert_eq!(status.status.code(), Some(code));
    }
    let out = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("diagnose"));
}
