use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cfg: Option<(&Path, &str)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_boltzgain"));
    cmd.args(args);
    if let Some((path, text)) = cfg {
        std::fs::write(path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

#[test]
fn geometry_selftest_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest-geometry", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("geometry_checks.csv")).unwrap();
    assert!(csv.starts_with("name,passed,value,tolerance\n"));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("selftest-geometry_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["config"]["grid"]["pointsPerAxis"], 13);
}

#[test]
fn exponents_summary_reports_min_r() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["exponents", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("exponents_summary.json")).unwrap()).unwrap();
    let r = summary["suites"][0]["data"]["minR"]["r_min"].as_f64().unwrap();
    assert!((r - 3.885).abs() <= 1e-2, "r_min = {r}");
}

#[test]
fn gamma_outside_range_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["exponents"], Some((&dir.path().join("bad.toml"), "[crossSection]\ngamma = 1.5\n")));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[0, 1]"));
}

#[test]
fn unknown_subcommand_and_missing_config_exit_two() {
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(run(&["exponents", "--config", "/nonexistent/config.toml"], None).status.code(), Some(2));
}

#[test]
fn seed_flag_reaches_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest-geometry", "--seed", "7", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("selftest-geometry_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 7);
}
