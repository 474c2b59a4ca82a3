use std::path::Path;
use std::process::{Command, Output};

use gree_cli::doc::StateDocument;
use gree_core::gree::gree_tmst;
use gree_core::{CovarianceMatrix, SymmetricParams};
use serde_json::Value;

fn gree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gree")).args(args).output().unwrap()
}

fn write_cm(dir: &Path, name: &str, alpha: &CovarianceMatrix) -> String {
    let p = dir.join(name);
    std::fs::write(&p, StateDocument::cm(alpha).render()).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn number(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn convert_thermal_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let cm = write_cm(dir.path(), "t.json", &CovarianceMatrix::thermal(&[1.0, 1.0]));
    let em = dir.path().join("em.json").to_string_lossy().into_owned();
    assert!(gree(&["convert", "-i", &cm, "-o", &em]).status.success());
    let doc = StateDocument::parse(&std::fs::read_to_string(&em).unwrap()).unwrap();
    let m = doc.exponential().unwrap();
    for i in 0..4 {
        assert!((m.matrix()[(i, i)] - 3.0_f64.ln()).abs() < 1e-12);
    }
    let back = json(&gree(&["convert", "-i", &em, "--direction", "em-to-cm"]));
    let orig = CovarianceMatrix::thermal(&[1.0, 1.0]);
    for (i, row) in back["matrix"].as_array().unwrap().iter().enumerate() {
        for (j, v) in row.as_array().unwrap().iter().enumerate() {
            assert!((number(v) - orig.matrix()[(i, j)]).abs() < 1e-8);
        }
    }
}

#[test]
fn vacuum_conversion_is_a_guard_error() {
    let dir = tempfile::tempdir().unwrap();
    let cm = write_cm(dir.path(), "v.json", &CovarianceMatrix::vacuum(1));
    let out = gree(&["convert", "-i", &cm]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("pure direction"));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"n":1,"ordering":"qpqp","kind":"cm","matrix":[[1,0],[0,1]]}"#).unwrap();
    let out = gree(&["entropy", "-i", &p.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(2));
    let out = gree(&["entropy", "-i", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn entropy_and_relent_in_both_units() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_cm(dir.path(), "a.json", &CovarianceMatrix::thermal(&[1.0]));
    let b = write_cm(dir.path(), "b.json", &CovarianceMatrix::thermal(&[1.5]));
    let nats = json(&gree(&["relent", "--rho", &a, "--sigma", &b]));
    assert!((number(&nats["relative_entropy"]) - 0.08495).abs() < 1e-4);
    let bits = json(&gree(&["relent", "--rho", &a, "--sigma", &b, "--bits"]));
    assert_eq!(bits["unit"], "bits");
    let ratio = number(&nats["relative_entropy"]) / number(&bits["relative_entropy"]);
    assert!((ratio - std::f64::consts::LN_2).abs() < 1e-12);
    let s = json(&gree(&["entropy", "-i", &a]));
    // n̄ = ½: g(½) = 1.5 ln 1.5 − 0.5 ln 0.5.
    assert!((number(&s["entropy"]) - (1.5 * 1.5_f64.ln() - 0.5 * 0.5_f64.ln())).abs() < 1e-12);
}

#[test]
fn separable_input_has_zero_gree() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_cm(dir.path(), "s.json", &CovarianceMatrix::thermal(&[1.0, 1.3]));
    let sep = json(&gree(&["separable", "-i", &p]));
    assert_eq!(sep["separable"], true);
    let r = json(&gree(&["gree", "-i", &p, "--starts", "4"]));
    assert_eq!(number(&r["value"]), 0.0);
}

#[test]
fn cli_gree_matches_library_tmst() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_cm(dir.path(), "t.json", &SymmetricParams::tmst(1.5, 0.9).unwrap().cm());
    let r = json(&gree(&["gree", "-i", &p, "--starts", "8"]));
    let lib = gree_tmst(1.5, 0.9).unwrap().value;
    assert!((number(&r["value_nats"]) - lib).abs() < 1e-6);
    let t = json(&gree(&["gree-tmst", "--m", "1.5", "--k", "0.9"]));
    assert!((number(&t["value"]) - lib).abs() < 1e-12);
    let restricted = json(&gree(&["gree", "-i", &p, "--starts", "4", "--types", "IV"]));
    assert_eq!(restricted["best_type"], "IV");
}

#[test]
fn classify_reports_type() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_cm(dir.path(), "t.json", &SymmetricParams::tmst(1.5, 0.9).unwrap().cm());
    let c = json(&gree(&["classify", "-i", &p]));
    assert_eq!(c["type"], "IV");
}

#[test]
fn descend_writes_step_log() {
    let dir = tempfile::tempdir().unwrap();
    let rho = write_cm(dir.path(), "r.json", &SymmetricParams::tmst(1.5, 0.9).unwrap().cm());
    let sigma = write_cm(dir.path(), "s.json", &CovarianceMatrix::thermal(&[1.0, 1.0]));
    let log = dir.path().join("log.csv");
    let r = json(&gree(&["descend", "--rho", &rho, "--sigma", &sigma, "--log", &log.to_string_lossy()]));
    assert!(number(&r["objective"]) < 1e-8);
    let text = std::fs::read_to_string(log).unwrap();
    assert!(text.lines().any(|l| l == "iteration,group,gain,objective"));
}

#[test]
fn empty_scan_is_header_only() {
    let out = gree(&["scan", "fig2", "--points", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 1);
}

#[test]
fn verify_roundtrip_passes() {
    let r = json(&gree(&["verify", "--suite", "roundtrip", "--count", "30"]));
    assert_eq!(r["failed"], 0);
    assert!(number(&r["max"]["error"]) < 1e-8);
}
