use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tempora(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempora")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn strip_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn hydrogen_uwform_report() {
    let out = tempora(&["uwform", "--model", "hydrogen", "--m", "1", "--gamma", "1", "--n-max", "3"]);
    assert!(out.status.success());
    let r = report(&out);
    assert!(r["results"]["max_uw_ccr_residual"].as_f64().unwrap() <= 1e-10);
    assert!(r["results"]["min_uncertainty_value"].as_f64().unwrap() >= 0.5);
    assert_eq!(r["results"]["admissible"], true);
    assert!(r["results"]["im_identity_defect"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn oscillator_timeop_report() {
    let out = tempora(&["timeop", "--model", "oscillator", "--omega", "1", "--n-max", "20"]);
    assert!(out.status.success());
    let r = report(&out);
    assert!(r["results"]["max_ccr_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(r["statistics"]["channels"], 1);
}

#[test]
fn rabi_bounds_report() {
    let out = tempora(&["spectrum", "--model", "rabi", "--mu", "0.5", "--omega", "1", "--g", "0.3", "--cutoff", "200", "--count", "20"]);
    assert!(out.status.success());
    let r = report(&out);
    let bounds = r["results"]["bound_checks"].as_array().unwrap();
    assert_eq!(bounds.len(), 20);
    assert!(bounds.iter().all(|b| b == true));
}

#[test]
fn every_tolerance_is_echoed() {
    let r = report(&tempora(&["s0check", "--samples", "5"]));
    for c in r["checks"].as_array().unwrap() {
        if let Some(name) = c["tolerance"].as_str() {
            assert!(r["tolerances"].get(name).is_some(), "{name} not echoed");
        }
    }
    assert_eq!(r["results"]["strong_relation_all_exact"], true);
}

#[test]
fn reruns_are_identical_apart_from_timings() {
    let args = ["uwform", "--seed", "42", "--f", r#"{"kind": "sin", "params": [0.3]}"#];
    let a = strip_timings(report(&tempora(&args)));
    let b = strip_timings(report(&tempora(&args)));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = strip_timings(report(&tempora(&["uwform", "--seed", "43", "--f", r#"{"kind": "sin", "params": [0.3]}"#])));
    assert_ne!(a["results"]["max_uw_ccr_residual"], c["results"]["max_uw_ccr_residual"]);
}

#[test]
fn selftest_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |sub: &str| {
        let out = dir.path().join(sub);
        let status = tempora(&["selftest", "--out", out.to_str().unwrap(), "--seed", "3"]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stdout));
        strip_timings(serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap())
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn zero_tolerance_fails_residual_checks() {
    let out = tempora(&["selftest", "--tol", "uw_ccr=0", "--tol", "weyl=0"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["passed"], false);
    let failed: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"2.hydrogen.uw_ccr"));
    assert!(failed.contains(&"7.grid.weak_weyl"));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"kind": "hydrogen", "m": 1.0, "gamma": 1.0, "n_max": 4},
            "pipeline": {"kind": "ftransform", "f": {"kind": "exp", "params": [1.0]}},
            "tolerances": {"uw_ccr": 1e-11}, "seed": 5}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = tempora(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["tolerances"]["uw_ccr"], 1e-11);
    assert_eq!(r["input"]["seed"], 5);
    assert_eq!(r["command"], "ftransform");
}

#[test]
fn abweyl_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempora(&["abweyl", "--L", "50", "--N", "1024", "--k0", "5", "--sigma", "2", "--tmax", "1", "--steps", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("abweyl.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,residual,strong_residual"));
    assert_eq!(csv.lines().count(), 6);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(r["results"]["max_residual"].as_f64().unwrap() <= 1e-6);
    assert!(r["results"]["refinement_ratio"].as_f64().is_some());
}

#[test]
fn custom_spectrum_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    std::fs::write(&path, r#"{"label": "toy", "accumulation": "to_zero", "entries": [[-0.5, 1], [-0.125, 4]]}"#).unwrap();
    let r = report(&tempora(&["decompose", "--spectrum", path.to_str().unwrap(), "--p", "2"]));
    assert_eq!(r["statistics"]["channels"], 4);
    assert_eq!(r["results"]["decomposition"]["p"], 2.0);
    assert!(r["results"]["decomposition"]["channels"].is_array());
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(tempora(&["abweyl", "--k0", "0"]).status.code(), Some(2));
    assert_eq!(tempora(&["timeop", "--model", "oscillator", "--gamma", "1"]).status.code(), Some(2));
    assert_eq!(tempora(&["run"]).status.code(), Some(2));
    assert!(!Path::new("report.json").exists());
}

#[test]
fn inadmissible_function_fails_the_run() {
    let out = tempora(&["ftransform", "--n-max", "4", "--f", r#"{"kind": "sin", "params": [-1.0]}"#]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["results"]["admissible"], false);
    assert_eq!(r["results"]["witnesses"]["sin"][0], serde_json::json!({"k": 1, "level": 1}));
}

#[test]
fn oscspec_with_jobs() {
    let out = tempora(&["oscspec", "--n", "50,100", "--jobs", "2", "--tol", "toeplitz_lambda_floor=2.9"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["results"]["n_list"], serde_json::json!([50, 100]));
}
