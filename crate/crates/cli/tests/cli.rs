use std::process::Command;

use hvisc::{run_experiment, ExperimentConfig, ExperimentError};

fn hvisc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hvisc"))
}

fn small_metric_gap() -> ExperimentConfig {
    ExperimentConfig::new("metric-gap").param("eps", "0.1,0.01")
}

#[test]
fn identical_configs_give_identical_summaries() {
    let cfg = ExperimentConfig::new("holder-bridge").param("samples", 2000).param("seed", 7);
    let a = run_experiment(&cfg).unwrap().to_json();
    let b = run_experiment(&cfg).unwrap().to_json();
    assert_eq!(a, b);
    let other = run_experiment(&cfg.clone().param("seed", 8)).unwrap().to_json();
    assert_ne!(a, other);
}

#[test]
fn summary_records_resolved_parameters() {
    let s = run_experiment(&small_metric_gap()).unwrap();
    assert!(s.passed);
    assert_eq!(s.parameters["eps"], "0.1,0.01");
    assert_eq!(s.parameters["seed"], "0");
    let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
    assert_eq!(v["experiment"], "metric-gap");
    assert_eq!(v["checks"][0]["bound"]["kind"], "near");
}

#[test]
fn unknown_experiment_is_reported() {
    let err = run_experiment(&ExperimentConfig::new("no-such-thing")).unwrap_err();
    assert_eq!(
        err.downcast_ref::<ExperimentError>(),
        Some(&ExperimentError::UnknownExperiment("no-such-thing".into()))
    );
}

#[test]
fn invalid_parameters_are_reported() {
    for cfg in [
        small_metric_gap().param("bogus", 1),
        small_metric_gap().param("eps", "-0.1"),
        ExperimentConfig::new("holder-bridge").param("samples", "many"),
        ExperimentConfig::new("holder-bridge").param("rho", "NaN"),
    ] {
        let err = run_experiment(&cfg).unwrap_err();
        assert!(
            matches!(err.downcast_ref::<ExperimentError>(), Some(ExperimentError::InvalidParameters { .. })),
            "{cfg:?}: {err:#}"
        );
    }
}

#[test]
fn artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_experiment(&small_metric_gap().output_dir(dir.path())).unwrap();
    assert!(s.files.iter().any(|f| f.ends_with(".csv")));
    for f in &s.files {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let written = std::fs::read_to_string(dir.path().join("metric-gap.json")).unwrap();
    assert_eq!(written, s.to_json());
}

#[test]
fn solver_runs_export_grids() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        ExperimentConfig::new("lip-preserve-right").param("delta", 0.1).param("pairs", 500).output_dir(dir.path());
    let s = run_experiment(&cfg).unwrap();
    for ext in [".bin", ".meta", "-slice.csv"] {
        assert!(s.files.iter().any(|f| f.ends_with(ext)), "{ext} missing from {:?}", s.files);
    }
}

#[test]
fn binary_exit_codes() {
    let ok = hvisc().args(["metric-gap", "--eps", "0.1", "--quiet"]).status().unwrap();
    assert_eq!(ok.code(), Some(0));
    let red = hvisc().args(["barrier-check", "--samples", "200", "--mu-samples", "500", "--quiet"]).status().unwrap();
    assert_eq!(red.code(), Some(1));
    let bad = hvisc().args(["metric-gap", "--eps", "-1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("invalid parameters"));
}

#[test]
fn binary_json_matches_library() {
    let out = hvisc().args(["metric-gap", "--eps", "0.1,0.01", "--json"]).output().unwrap();
    assert!(out.status.success());
    let lib = run_experiment(&small_metric_gap()).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib.to_json());
}

#[test]
fn list_names_every_experiment() {
    let out = hvisc().arg("list").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for e in hvisc::catalog() {
        assert!(text.lines().any(|l| l.starts_with(e.name)), "{}", e.name);
    }
}
