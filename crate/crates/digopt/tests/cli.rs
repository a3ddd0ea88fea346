//! CLI surface tests: subcommands, flags and exit codes.

use std::path::PathBuf;
use std::process::Command;

fn scenario_arg(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"))
        .to_string_lossy()
        .into_owned()
}

fn digopt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_digopt"))
}

fn temp_dir(tag: &str) -> String {
    let dir = std::env::temp_dir().join(format!("digopt-cli-{tag}"));
    let _ = std::fs::remove_dir_all(&dir);
    dir.to_string_lossy().into_owned()
}

#[test]
fn run_converges_with_exit_zero() {
    let out = temp_dir("run");
    let status = digopt()
        .args([
            "run",
            "--scenario",
            &scenario_arg("experiment2_fixed"),
            "--out",
            &out,
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for file in [
        "trajectory.csv",
        "iterations.csv",
        "summary.toml",
        "tip_path.csv",
    ] {
        assert!(PathBuf::from(&out).join(file).exists(), "{file} missing");
    }
}

#[test]
fn verify_of_fresh_run_passes() {
    let out = temp_dir("verify");
    let status = digopt()
        .args([
            "run",
            "--scenario",
            &scenario_arg("experiment2_fixed"),
            "--out",
            &out,
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let status = digopt()
        .args([
            "verify",
            "--scenario",
            &scenario_arg("experiment2_fixed"),
            "--out",
            &out,
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn fixed_time_flag_freezes_intervals() {
    let out = temp_dir("fixed-flag");
    let output = digopt()
        .args([
            "run",
            "--scenario",
            &scenario_arg("experiment2_variable"),
            "--out",
            &out,
            "--fixed-time",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("duration 6.00 s"), "stdout: {stdout}");
}

#[test]
fn seed_only_and_eval() {
    let out = temp_dir("seed-only");
    let status = digopt()
        .args([
            "seed-only",
            "--scenario",
            &scenario_arg("experiment1"),
            "--out",
            &out,
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let output = digopt()
        .args(["eval", "--scenario", &scenario_arg("experiment1")])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.contains("violated: swept_volume_min"),
        "stdout: {stdout}"
    );
}

#[test]
fn exit_codes_for_failures() {
    // Unknown argument: usage error.
    let status = digopt().args(["run", "--bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    // Missing scenario file: I/O error.
    let status = digopt()
        .args(["run", "--scenario", "/nonexistent.toml", "--out", "/tmp/x"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(6));
    // Malformed scenario: validation error.
    let bad = std::env::temp_dir().join("digopt-cli-bad.toml");
    std::fs::write(&bad, "schema_version = 1\n").unwrap();
    let status = digopt()
        .args([
            "run",
            "--scenario",
            bad.to_str().unwrap(),
            "--out",
            "/tmp/x",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    // Seed out of reach: seed error.
    let unreachable = std::env::temp_dir().join("digopt-cli-unreachable.toml");
    let text = std::fs::read_to_string(scenario_arg("experiment1"))
        .unwrap()
        .replace("dig_x_start_m = 6.0", "dig_x_start_m = 60.0")
        .replace("dig_x_end_m = 4.0", "dig_x_end_m = 58.0")
        .replace(
            "file = \"excavator_table1.toml\"",
            &format!(
                "file = \"{}\"",
                PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                    .join("../../scenarios/excavator_table1.toml")
                    .display()
            ),
        );
    std::fs::write(&unreachable, text).unwrap();
    let status = digopt()
        .args([
            "run",
            "--scenario",
            unreachable.to_str().unwrap(),
            "--out",
            "/tmp/x",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn help_exits_zero() {
    let output = digopt().arg("--help").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("USAGE"));
    assert!(stdout.contains("EXIT CODES"));
}
