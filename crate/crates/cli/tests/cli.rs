#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cohomflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohomflow"))
        .args(args)
        .current_dir(dir)
        .env("COHOMFLOW_OUT", dir.join("out"))
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap();
    let errs = common::validate(&common::report_schema(), &v, "$");
    assert!(errs.is_empty(), "{errs:#?}");
    v
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohomflow(dir.path(), &["evolve", "--config", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"manifold": "s4", "cfl": -1}"#).unwrap();
    let out = cohomflow(dir.path(), &["build", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cfl"));

    fs::write(dir.path().join("typo.json"), r#"{"manifould": "s4"}"#).unwrap();
    let out = cohomflow(dir.path(), &["build", "--config", "typo.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("manifould"));

    let out = cohomflow(dir.path(), &["build", "--manifold", "k3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cohomflow(dir.path(), &["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn theorem_check_passes_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohomflow(dir.path(), &["check-theorem", "--manifold", "s4", "--N", "400", "--t-end", "1e-3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["experiment"], "check-theorem");
    for file in ["sec_r0.svg", "diagnostics.csv", "profiles_initial.csv", "profiles_initial.json"] {
        assert!(dir.path().join("out").join(file).is_file(), "{file}");
    }
}

#[test]
fn round_sphere_control_exits_with_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohomflow(
        dir.path(),
        &["check-theorem", "--model", "round-s4", "--N", "200", "--t-end", "2e-4", "--samples", "200"],
    );
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(dir.path())["verdict"], "fail");
}

#[test]
fn einstein_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohomflow(dir.path(), &["check-einstein", "--model", "round-s4", "--t-end", "0.05"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(dir.path())["verdict"], "pass");
}

#[test]
fn evolve_is_reproducible_from_a_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.json"),
        r#"{"manifold": "mn", "n": 2, "N": 80, "t_end": 5e-5, "output_stride": 20, "seed": 3}"#,
    )
    .unwrap();
    let a = cohomflow(dir.path(), &["evolve", "--config", "run.json"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let first = fs::read(dir.path().join("out/trace/diagnostics.csv")).unwrap();
    let report_a = report(dir.path());
    let b = cohomflow(dir.path(), &["evolve", "--config", "run.json"]);
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(first, fs::read(dir.path().join("out/trace/diagnostics.csv")).unwrap());
    assert_eq!(report_a, report(dir.path()));
    let svg = fs::read_to_string(dir.path().join("out/minsec.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn build_then_curvature_from_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohomflow(dir.path(), &["build", "--manifold", "cp2", "--N", "400", "--out", "built"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let profiles = dir.path().join("built/profiles.csv");
    assert!(profiles.is_file() && dir.path().join("built/profiles.svg").is_file());
    let out = cohomflow(
        dir.path(),
        &["curvature", "--input", profiles.to_str().unwrap(), "--samples", "500"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert!(r["min_sec_t0"].as_f64().unwrap() > -1e-6);
    let csv = fs::read_to_string(dir.path().join("out/curvature.csv")).unwrap();
    assert_eq!(csv.lines().count(), 401);
}

#[test]
fn calibrate_reports_pole_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cohomflow(dir.path(), &["calibrate", "--manifold", "s4", "--c", "1", "--side", "minus"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    let slope = r["results"][0]["value"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.02);
    let out = cohomflow(dir.path(), &["calibrate", "--manifold", "s4", "--c", "1", "--range", "3,5"]);
    assert_eq!(out.status.code(), Some(3));
}
