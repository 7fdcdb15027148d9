use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deltaprime")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

const STAR: &str = r#"{"geometry":{"name":"star3"},"box_radius":6,"levels":3,"alpha":1,"beta":3,"solver":{"k":10,"tol":1e-8,"seed":7}}"#;

#[test]
fn halfplane_bottoms_text() {
    let o = run(&["closed-form", "halfplane-bottoms", "1", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "-0.25 -4\n");
}

#[test]
fn minimax_reports_both_constants() {
    let o = run(&["closed-form", "minimax", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["discrepancy"], Value::Bool(true));
    assert!((v["value"].as_f64().unwrap() - 5.208630).abs() < 1e-6);
    assert!((v["printed_value"].as_f64().unwrap() - 4.356316).abs() < 1e-6);
}

#[test]
fn verify_ordering_passes_with_json_report() {
    let f = config(STAR);
    let o = run(&["verify", "ordering", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["name"], "ordering");
    assert!(v["wall_clock_seconds"].is_null());
}

#[test]
fn deterministic_reruns_are_byte_identical() {
    let f = config(STAR);
    let p = f.path().to_str().unwrap();
    for args in [vec!["verify", "ordering", "--config", p], vec!["spectrum", "--config", p, "--operator", "delta-prime", "--format", "csv"]] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn failed_assertion_exits_2_and_still_reports() {
    let f = config(
        r#"{"geometry":{"name":"half_plane"},"box_radius":4,"levels":2,"alpha":1,"solver":{"k":1,"tol":1e-9},"experiment":{"operator":"delta","threshold_tolerance":1e-6}}"#,
    );
    let o = run(&["verify", "threshold-convergence", "--config", f.path().to_str().unwrap(), "--format", "text"]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("verdict     FAIL") && out.contains("FAIL  R=4 L=2: |lambda_1 - threshold|"), "{out}");
}

#[test]
fn usage_and_config_errors_exit_1() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["closed-form", "no-such-constant"]).status.code(), Some(1));
    assert_eq!(run(&["closed-form", "halfplane-bottoms", "1"]).status.code(), Some(1));

    let f = config(&STAR.replace("\"beta\":3", "\"beta\":0"));
    let o = run(&["verify", "ordering", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta must be strictly positive"));
    assert!(o.stdout.is_empty());

    let o = run(&["verify", "no-such-run", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spectrum_csv_columns() {
    let f = config(STAR);
    let o = run(&["spectrum", "--config", f.path().to_str().unwrap(), "--operator", "delta", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("index,value,residual"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert!(first[1].parse::<f64>().unwrap() < 0.0);
    assert_eq!(out.lines().count(), 11);
}

#[test]
fn partition_info_and_exports() {
    let f = config(STAR);
    let p = f.path().to_str().unwrap();
    let o = run(&["partition", "info", "--config", p]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["chromatic_number"], 3);
    assert_eq!(v["edge_constant"].as_f64().unwrap().round(), 3.0);
    assert_eq!(v["admissible"], Value::Bool(true));

    let mesh = stdout(&run(&["export", "mesh", "--config", p]));
    assert!(mesh.lines().any(|l| l.starts_with("v ")) && mesh.lines().any(|l| l.starts_with("e ")));
    let matrix = stdout(&run(&["export", "matrix", "--config", p, "--operator", "delta-prime", "--which", "m"]));
    let first: Vec<&str> = matrix.lines().next().unwrap().split(' ').collect();
    assert_eq!(first.len(), 3);
    assert_eq!(first[0], "1");
}
