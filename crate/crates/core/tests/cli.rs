//! Exit codes and messages of the `patchflow` binary.

use std::path::Path;
use std::process::{Command, Output};

fn patchflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patchflow"))
        .args(args)
        .current_dir(dir)
        .env("PATCHFLOW_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn verify_spectral_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = patchflow(&["verify", "--suite", "spectral"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("suite,check,measure,value,limit,status"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",PASS")), "{csv}");
}

#[test]
fn oversized_patch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.n = 64\ngrid.L = 8\npatch.shape = disc\npatch.radius = 3\n");
    let out = patchflow(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("patch too large"), "{}", stderr(&out));
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.n = 64\nsolver.timestep = 0.01\n");
    let out = patchflow(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("solver.timestep"), "{}", stderr(&out));
}

#[test]
fn bad_value_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "solver.dt = fast\n");
    let out = patchflow(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("solver.dt"), "{}", stderr(&out));
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_patchflow"))
        .args(["verify", "--suite", "spectral"])
        .env("PATCHFLOW_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("PATCHFLOW_THREADS"));
}

#[test]
fn unstable_time_step_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 64\ngrid.L = 4\npatch.radius = 0.8\nsolver.dt = 5\nsolver.t_end = 10\nvorticity.amplitude = 5\n",
    );
    let out = patchflow(&["run", &cfg, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn short_run_writes_series_and_snapshots_for_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 64\ngrid.L = 4\npatch.radius = 0.8\nsolver.dt = 0.01\nsolver.t_end = 0.05\ndiagnostics.every = 5\noutput.snapshots = true\nseed = 3\n",
    );
    let out = patchflow(&["run", &cfg, "--out", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let series = std::fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,holder_X,besov_dXu,besov_TXu,bony_residual,boundary_holder,div_u,div_X,tangency,mass,energy,area,suppX_diam,multiplier_probe"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2, "{series}");
    assert!(rows.iter().all(|r| r.split(',').count() == 14));
    assert!(dir.path().join("out/kappa.csv").exists());

    let snap = dir.path().join("out/final/rho.snap");
    let out = patchflow(
        &["analyze", snap.to_str().unwrap(), "--norms", "holder(0.5);besov_inh(0.5,3,inf)"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("norm,j,block_lp,weighted"));
    let json: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(json["field"], "rho");
    assert_eq!(json["norms"].as_array().unwrap().len(), 2);

    let out = patchflow(&["analyze", snap.to_str().unwrap(), "--norms", "sobolev(1)"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--norms"));
}
