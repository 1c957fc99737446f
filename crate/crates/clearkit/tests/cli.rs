//! End-to-end checks of the `clearkit` binary: subcommand contracts, exit
//! codes, artifact layout, and byte-level reproducibility.

mod common;

use clearkit::cavity::calibrate_drive;
use clearkit::design::design_clear;
use common::demo_params;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn clearkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clearkit"))
        .args(args)
        .env_remove("CLEARKIT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", stderr(out));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_lists_every_subcommand() {
    let out = clearkit(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    for name in [
        "decay-sweep",
        "power-sweep",
        "trajectory-compare",
        "clear-vs-square",
        "shortened-clear",
        "optimize-run",
        "ramsey-single",
        "design",
        "ramsey-fit",
        "simulate",
    ] {
        assert!(text.contains(name), "--help is missing `{name}`");
    }
}

#[test]
fn design_prints_the_report_as_json() {
    let out = clearkit(&["design", "--set", "p_norm=1"]);
    let v = stdout_json(&out);

    // The printed numbers are exactly what the library computes.
    let params = demo_params();
    let eps = calibrate_drive(&params).eps_for_power(1.0).unwrap();
    let expected = design_clear(&params, eps, 0.15, 0.15, 1.7, 0.15, 0.15).unwrap();
    for (field, want) in [
        ("amp_up1", expected.spec.amp_up1),
        ("amp_up2", expected.spec.amp_up2),
        ("amp_dn1", expected.spec.amp_dn1),
        ("amp_dn2", expected.spec.amp_dn2),
    ] {
        let got = v["spec"][field].as_f64().unwrap();
        assert!(
            (got - want).abs() < 1e-12,
            "{field}: printed {got}, library {want}"
        );
    }
    assert!(v["residual_ground"].as_f64().unwrap() < 1e-9);
    assert!(v["residual_excited"].as_f64().unwrap() < 1e-9);
}

#[test]
fn unknown_setting_exits_2_and_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let out = clearkit(&[
        "decay-sweep",
        "--set",
        "nope=1",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("nope"), "stderr does not name the key: {err}");
    assert!(
        err.contains("t_points"),
        "stderr does not list the known settings: {err}"
    );
}

#[test]
fn malformed_device_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let device = tmp.path().join("device.json");
    fs::write(&device, r#"{ "oops": 1.0 }"#).unwrap();
    let out = clearkit(&["design", "--params", device.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("oops"));
}

#[test]
fn missing_device_file_exits_2() {
    let out = clearkit(&["design", "--params", "/nonexistent/device.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ramsey_fit_round_trips_a_generated_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let run = clearkit(&[
        "ramsey-single",
        "--out",
        tmp.path().to_str().unwrap(),
        "--seed",
        "9",
        "--set",
        "noise_sigma=0",
    ]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));

    let trace = tmp.path().join("ramsey_trace.csv");
    let out = clearkit(&["ramsey-fit", trace.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert!(v["converged"].as_bool().unwrap());
    // The scenario synthesized n0 = 0.9, phi0 = 0.3 (its defaults).
    assert!((v["n0"].as_f64().unwrap() - 0.9).abs() < 1e-6);
    assert!((v["phi0"].as_f64().unwrap() - 0.3).abs() < 1e-6);
}

#[test]
fn ramsey_fit_with_too_few_samples_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("short.csv");
    fs::write(&trace, "t_r_us,signal\n0.0,0.5\n0.1,0.4\n0.2,0.6\n").unwrap();
    let out = clearkit(&["ramsey-fit", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn scenario_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for dir in &dirs {
        let out = clearkit(&[
            "ramsey-single",
            "--out",
            dir.to_str().unwrap(),
            "--seed",
            "5",
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    for name in ["ramsey_trace.csv", "ramsey_fit.json", "manifest.json"] {
        let a = fs::read(dirs[0].join(name)).unwrap();
        let b = fs::read(dirs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical CLI runs");
    }
}

#[test]
fn simulate_writes_the_documented_trajectory_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let out = clearkit(&[
        "simulate",
        "--shape",
        "square",
        "--out",
        tmp.path().to_str().unwrap(),
        "--set",
        "sample_interval=0.1",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let text = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# scenario: simulate_square"));
    assert!(lines.next().unwrap().starts_with("# seed:"));
    assert!(lines.next().unwrap().starts_with("# config_sha256:"));
    assert_eq!(lines.next().unwrap(), "t_us,re_g,im_g,re_e,im_e,n_g,n_e");
    assert!(lines.next().unwrap().starts_with("0"));
}

#[test]
fn optimize_alias_runs_the_ring_down_tuner() {
    let tmp = tempfile::tempdir().unwrap();
    let out = clearkit(&[
        "optimize",
        "--out",
        tmp.path().to_str().unwrap(),
        "--seed",
        "3",
        "--set",
        "max_iterations=4",
        "--set",
        "noise_sigma=0.002",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    for name in [
        "history.csv",
        "ramsey_before_g.csv",
        "ramsey_before_e.csv",
        "ramsey_after_g.csv",
        "ramsey_after_e.csv",
        "optimized_spec.json",
        "optimize_summary.json",
        "manifest.json",
    ] {
        assert!(tmp.path().join(name).is_file(), "missing artifact {name}");
    }
    let history = fs::read_to_string(tmp.path().join("history.csv")).unwrap();
    let header = history
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap();
    assert_eq!(header, "iter,amp_dn1,amp_dn2,n0_g,n0_e,objective");
}

#[test]
fn out_dir_env_var_supplies_the_default_location() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_clearkit"))
        .args(["ramsey-single", "--seed", "2", "--set", "noise_sigma=0"])
        .env("CLEARKIT_OUT_DIR", tmp.path())
        .current_dir(tmp.path())
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(
        tmp.path().join("ramsey_single").join("manifest.json").is_file(),
        "scenario did not land in $CLEARKIT_OUT_DIR/<name>"
    );
    assert!(
        String::from_utf8_lossy(&out.stdout).contains("ramsey_single"),
        "run summary not printed"
    );
}

/// The manifest's `config_sha256` matches the hash stamped into each CSV.
#[test]
fn manifest_hash_matches_the_csv_comment_block() {
    let tmp = tempfile::tempdir().unwrap();
    let out = clearkit(&[
        "ramsey-single",
        "--out",
        tmp.path().to_str().unwrap(),
        "--seed",
        "6",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap())
            .unwrap();
    let hash = manifest["config_sha256"].as_str().unwrap();
    let csv = fs::read_to_string(tmp.path().join("ramsey_trace.csv")).unwrap();
    let stamped = csv
        .lines()
        .find(|l| l.starts_with("# config_sha256:"))
        .expect("CSV carries the config hash");
    assert_eq!(stamped.trim_start_matches("# config_sha256:").trim(), hash);
    assert_eq!(hash.len(), 64, "hash is hex sha-256");
    assert!(Path::new(&tmp.path().join("ramsey_trace.csv")).exists());
}
