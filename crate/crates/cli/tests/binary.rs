mod common;

use common::*;
use qbm_cli::OUTPUT_DIR_ENV;
use std::process::Command;

fn qbm_modes() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qbm-modes"));
    cmd.env_remove(OUTPUT_DIR_ENV);
    cmd
}

#[test]
fn validate_accepts_a_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "ok.toml", MINIMAL);
    let out = qbm_modes().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid"));
    assert!(!dir.path().join("qbm-output").exists());
}

#[test]
fn validation_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "bad.toml", &MINIMAL.replace("T = 2.0", "T = -2.0"));
    for sub in ["validate", "run"] {
        let out = qbm_modes().arg(sub).arg(&path).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{sub}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("occupation.T"));
    }
}

#[test]
fn run_writes_into_the_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "ok.toml", &with_outputs(r#"["kernels"]"#));
    let out = qbm_modes().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("qbm-output/kernels.csv").exists());
    assert!(dir.path().join("qbm-output/manifest.txt").exists());
    assert!(dir.path().join("qbm-output/report.json").exists());
}

#[test]
fn environment_variable_overrides_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("elsewhere");
    let path = write_config(dir.path(), "ok.toml", &with_outputs(r#"["kernels"]"#));
    let out = qbm_modes()
        .env(OUTPUT_DIR_ENV, &target)
        .arg("run")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("kernels.csv").exists());
    assert!(!dir.path().join("qbm-output").exists());
}

#[test]
fn failed_output_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // The cumulant integrator refuses a step above its stability bound.
    let text = with_outputs(r#"["rates", "master"]"#) + "\n[master]\ndt = 1.0\n";
    let path = write_config(dir.path(), "fail.toml", &text);
    let out = qbm_modes().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rates        ok") && stdout.contains("master       FAILED"), "{stdout}");
    assert!(dir.path().join("qbm-output/rates.csv").exists());
}

#[test]
fn unknown_subcommand_is_rejected() {
    let out = qbm_modes().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
}
