use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mixbvp::cli::read_solution_csv;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixbvp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--problem", "mms-bc1", "--n", "1000"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(text.starts_with("t,u,du\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1002);
    let u = read_solution_csv(&dir.path().join("solution.csv")).unwrap();
    assert_eq!(u.grid().intervals(), 1000);
    let report = json(&dir.path().join("solve_report.json"));
    assert_eq!(report["report"]["converged"], true);
    assert!(report["reference_error"].as_f64().unwrap() < 1e-4);
}

#[test]
fn grid_precondition_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--problem", "mms-bc1", "--n", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_problem_and_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["solve", "--problem", "nope-bc1"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["solve", "--problem", "mms-bc1", "--frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["integrate", "--problem", "mms-bc1"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["degree", "--problem", "logistic-bc1"], dir.path()).status.code(), Some(1));
}

#[test]
fn non_convergence_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    // the O(h²) residual of a coarse grid exceeds the tolerance
    let out = run(&["solve", "--problem", "mms-bc2", "--n", "16"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let report = json(&dir.path().join("solve_report.json"));
    assert_eq!(report["report"]["converged"], false);
}

#[test]
fn degree_reports_both_orientations() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["degree", "--problem", "logistic-bc1", "--r", "3", "--R", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&dir.path().join("degree_report.json"));
    assert_eq!((rep["deg_omega_r"].as_i64(), rep["deg_omega_R"].as_i64(), rep["deg_annulus"].as_i64()), (Some(1), Some(0), Some(1)));
    let out = run(&["degree", "--problem", "superlinear-bc2", "--r", "0.5", "--R", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&dir.path().join("degree_report.json"));
    assert_eq!(rep["deg_annulus"].as_i64(), Some(-1));
}

#[test]
fn failing_hypothesis_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // r = 0.3 fails the integral hypothesis for the logistic problem
    let out = run(&["degree", "--problem", "logistic-bc1", "--r", "0.3", "--R", "0.1"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let rep = json(&dir.path().join("degree_report.json"));
    assert_eq!(rep["hypothesis_r"]["integral_passes"], false);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"problem": "logistic", "bc": "bc3", "n": 8, "theta_steps": 5}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mixbvp"))
        .args(["sweep-theta", "--config"])
        .arg(&cfg)
        .args(["--n", "200", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("sweep_theta.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
    fs::write(&cfg, r#"{"problem": "logistic", "colour": "red"}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mixbvp")).args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--problem", "logistic-bc2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&dir.path().join("verify_report.json"));
    assert_eq!(rep["positivity"]["verdict"], "positive-on-(0,T]");
    let out = run(&["export", "--problem", "mms-bc3", "--n", "500"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let u = read_solution_csv(&dir.path().join("solution.csv")).unwrap();
    let r = read_solution_csv(&dir.path().join("reference.csv")).unwrap();
    assert!(u.value_distance(&r) < 1e-4);
}

#[test]
fn sweep_alpha_with_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep-alpha", "--problem", "logistic-bc1", "--alpha0", "2", "--alpha-steps", "4", "--v", "ramp"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("sweep_alpha.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
    let out = run(&["sweep-alpha", "--problem", "logistic-bc1", "--v", "zigzag"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
