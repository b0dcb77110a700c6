use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn uep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uep")).current_dir(dir).args(args).output().expect("binary runs")
}

const SMALL_VALIDATION: &str = r#"
name = "small"
seed = 3

[validation]
cumulative = [2, 6]
capacities = [2]
erasures = [0.2]
trials = 5000
saturation = 1e-3
"#;

#[test]
fn validate_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SMALL_VALIDATION).unwrap();
    let out = uep(dir.path(), &["--scenario", "s.toml", "--out", "res", "validate-approx"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("res/validate-approx.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# experiment: validate-approx"));
    assert!(lines.next().unwrap().starts_with("# scenario-sha256: "));
    assert_eq!(lines.next(), Some("# seed.monte-carlo: 3"));
    assert!(lines.next().unwrap().starts_with("capacity,erasure,t,window,analytic"));
    assert!(lines.count() > 2);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SMALL_VALIDATION).unwrap();
    let mut runs = Vec::new();
    for (out_dir, seed) in [("a", "8"), ("b", "8"), ("c", "9")] {
        let out = uep(dir.path(), &["--scenario", "s.toml", "--out", out_dir, "--seed", seed, "validate-approx"]);
        assert!(out.status.success());
        runs.push(fs::read_to_string(dir.path().join(out_dir).join("validate-approx.csv")).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    assert_ne!(runs[0], runs[2]);
}

#[test]
fn solve_and_sweep_default_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = uep(dir.path(), &["--out", ".", "solve"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("feasible true"));
    assert!(dir.path().join("solve.csv").exists());

    let out = uep(dir.path(), &["--out", ".", "--direct", "off", "sweep-rbp"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("sweep-rbp.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 11);
}

#[test]
fn coverage_writes_curves_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = uep(dir.path(), &["--out", ".", "--erasure-view", "allocator", "coverage-sc"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("coverage-sc.csv").exists());
    assert!(dir.path().join("coverage-sc-summary.csv").exists());
}

#[test]
fn infeasible_scenario_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), "[allocation]\nn_hat = [0, 0, 0]\n").unwrap();
    let out = uep(dir.path(), &["--scenario", "s.toml", "--out", ".", "solve"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), "[network]\nisd_m = -5.0\n").unwrap();
    let out = uep(dir.path(), &["--scenario", "s.toml", "solve"]);
    assert_eq!(out.status.code(), Some(1));
    let out = uep(dir.path(), &["--scenario", "missing.toml", "solve"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
