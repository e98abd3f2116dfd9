use std::fs;
use std::process::{Command, Output};

fn rctomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rctomo")).args(args).output().expect("run rctomo")
}

fn config(dir: &tempfile::TempDir, json: &str) -> String {
    let path = dir.path().join("config.json");
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn control_check_to_stdout() {
    let out = rctomo(&["control-check", "--check"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("system,size,d,dimension,target,generators_used,converged,full"));
    assert_eq!(lines.count(), 7);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, r#"{"dimz": [3]}"#);
    assert_eq!(rctomo(&["haar-scaling", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn bad_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, r#"{"dims": [32]}"#);
    assert_eq!(rctomo(&["haar-scaling", "--config", &cfg]).status.code(), Some(1));
    assert_eq!(rctomo(&["haar-scaling", "--config", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(rctomo(&["control-check", "--threads", "0"]).status.code(), Some(1));
    assert_eq!(rctomo(&["reconstruct", "--trajectory"]).status.code(), Some(1));
    assert_eq!(rctomo(&["time-trace", "--svg"]).status.code(), Some(1));
}

#[test]
fn failed_gate_exits_3_only_with_check() {
    // Too short to reach any plateau.
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, r#"{"dims": [3], "t_max": 0.5, "n_times": 4, "n_realizations": 4}"#);
    assert_eq!(rctomo(&["time-trace", "--config", &cfg]).status.code(), Some(0));
    assert_eq!(rctomo(&["time-trace", "--config", &cfg, "--check"]).status.code(), Some(3));
}

#[test]
fn writes_extra_files_with_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, r#"{"dims": [2], "t_max": 1.0, "n_times": 3, "n_realizations": 3}"#);
    let out = dir.path().join("run");
    let status = rctomo(&["time-trace", "--config", &cfg, "--svg", "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(0));
    for name in ["time_trace.csv", "plateau.csv", "trial_seeds.csv", "time_trace.svg"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let svg = fs::read_to_string(out.join("time_trace.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}
