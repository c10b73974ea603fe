use std::fs;
use std::process::{Command, Output};

fn modefilter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modefilter")).args(args).output().expect("binary runs")
}

#[test]
fn init_config_prints_loadable_defaults() {
    let out = modefilter(&["init-config", "--experiment", "teleport-compare"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("experiment = \"teleport_compare\""));
    assert!(text.contains("calibrated to the target output negativity, not a measured value"));
    let cfg = modefilter::pipeline::RunConfig::from_toml(&text).unwrap();
    assert_eq!(cfg.filter.electrical_cutoff_hz, 101e3);
}

#[test]
fn passing_run_exits_zero_and_report_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("scan");
    let out = modefilter(&["subtraction-scan", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let printed = String::from_utf8(out.stdout).unwrap();
    assert!(printed.contains("overall: PASS"));
    let report = modefilter(&["report", dir.to_str().unwrap()]);
    assert_eq!(report.status.code(), Some(0));
    assert_eq!(String::from_utf8(report.stdout).unwrap(), fs::read_to_string(dir.join("report.txt")).unwrap());
}

#[test]
fn config_file_and_overrides_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.toml");
    let dir = tmp.path().join("modes");
    let text = String::from_utf8(modefilter(&["init-config", "--experiment", "modes"]).stdout).unwrap();
    fs::write(&cfg_path, text).unwrap();
    let out = modefilter(&[
        "run",
        "--config",
        cfg_path.to_str().unwrap(),
        "--set",
        "modes.kappas_hz=[3e5, 6e5]",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let snapshot = modefilter::pipeline::RunConfig::load(&dir.join("config.toml")).unwrap();
    assert_eq!(snapshot.modes.kappas_hz, vec![3e5, 6e5]);
}

#[test]
fn failed_threshold_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = modefilter(&["modes", "--out", tmp.path().to_str().unwrap(), "--set", "checks.residual_reflection=0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn errors_exit_two_with_message() {
    let tmp = tempfile::tempdir().unwrap();
    let out = modefilter(&["report", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing artifact"));

    let out = modefilter(&["modes", "--out", tmp.path().to_str().unwrap(), "--set", "efficiency.eta0=2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("efficiency.eta0"));
}
