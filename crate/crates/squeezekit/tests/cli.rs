//! End-to-end CLI behavior: exit codes, output schema, determinism.

use std::process::{Command, Output};

fn squeezekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squeezekit"))
        .args(args)
        .output()
        .expect("failed to launch squeezekit")
}

#[test]
fn squeeze_single_emits_expected_json() {
    let out = squeezekit(&["squeeze", "single", "--alpha", "0.5", "--cutoff", "60"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["config"]["command"], "squeeze single");
    let c0 = doc["c0"][0].as_f64().unwrap();
    assert!((c0 - 0.930605).abs() < 1e-6, "c0 = {c0}");
    let n_bar = doc["mean_occupation"].as_f64().unwrap();
    assert!((n_bar - 1.0 / 3.0).abs() < 1e-6, "mean occupation = {n_bar}");
    let residual = doc["defining_residuals"][0].as_f64().unwrap();
    let bound = squeezekit::closed_form::smsv_tail_bound(0.5, 60);
    assert!(residual <= bound, "defining residual = {residual}, bound = {bound}");
}

#[test]
fn emitted_state_reloads_exactly() {
    let out = squeezekit(&["squeeze", "two", "--alpha", "0.4+0.2i", "--cutoff", "24"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let state_doc: squeezekit::io::StateDoc =
        serde_json::from_value(doc["state"].clone()).unwrap();
    let state = state_doc.to_state().unwrap();
    assert_eq!(state.num_modes(), 2);
    assert_eq!(state.cutoff(), 24);
    assert!(state.is_normalized());
    // serialize again: byte-identical amplitudes
    let doc2 = squeezekit::io::StateDoc::from_state(&state);
    assert_eq!(
        serde_json::to_string(&doc2).unwrap(),
        serde_json::to_string(&state_doc).unwrap()
    );
}

#[test]
fn domain_error_exits_one() {
    let out = squeezekit(&["squeeze", "single", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("normalizability"), "stderr: {stderr}");
}

#[test]
fn usage_errors_exit_two() {
    let out = squeezekit(&["squeeze", "single", "--alpha", "0.5", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let out = squeezekit(&["squeeze", "single", "--alpha", "0.5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2), "csv is spectrum-only");

    let out = squeezekit(&["nogo", "scan", "--modes", "3", "--alpha", "not-a-number", "--cutoffs", "4,5,6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nogo_scan_reports_no_solution() {
    let out = squeezekit(&[
        "nogo", "scan", "--modes", "3", "--alpha", "0.5,0.5,0.5", "--cutoffs", "4,5,6,7",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "NoSolution");
    let traj = doc["evidence"]["sigma_min_trajectory"].as_array().unwrap();
    assert_eq!(traj.len(), 4);
    assert!(traj.iter().all(|s| s.as_f64().unwrap() > 0.05));
}

#[test]
fn nogo_scan_reports_unique_for_two_modes() {
    let out = squeezekit(&[
        "nogo", "scan", "--modes", "2", "--alpha", "0.5", "--cutoffs", "10,16,22", "--tol", "1e-6",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "UniqueSqueezedState");
}

#[test]
fn pairwise_chain_output() {
    let out = squeezekit(&[
        "nogo", "pairwise-chain", "--modes", "4", "--alpha", "0.5", "--cutoff", "24",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["max_pair_residual"].as_f64().unwrap() < 1e-5);
    assert!(doc["min_linking_residual"].as_f64().unwrap() > 0.4);
}

#[test]
fn tfd_spectrum_csv_shape_and_monotonicity() {
    let out = squeezekit(&["tfd", "spectrum", "--beta", "1", "--omega", "0.1:10:50:log"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "omega,alpha,r,mean_occupation,thermal_residual"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 50);
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0], "omega ascending");
        assert!(w[1][2] < w[0][2], "r strictly decreasing");
    }
}

#[test]
fn equiv_single_passes() {
    let out = squeezekit(&["equiv", "single", "--r", "0.5", "--theta", "0"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], true);
    let alpha_re = doc["alpha"][0].as_f64().unwrap();
    assert!((alpha_re + 0.4621172).abs() < 1e-7);
}

#[test]
fn check_appendix_residuals() {
    let out = squeezekit(&["check", "appendix", "--seed", "7"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for entry in doc["generating_function"].as_array().unwrap() {
        assert!(entry["abs_error"].as_f64().unwrap() < 1e-6);
    }
    for entry in doc["commutator"].as_array().unwrap() {
        assert!(entry["residual"].as_f64().unwrap() <= 1e-9);
    }
    assert_eq!(doc["off_diagonal"]["closed_form_max"].as_f64().unwrap(), 0.0);
    assert!(doc["off_diagonal"]["kernel_basis_max"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["tfd", "spectrum", "--beta", "1", "--omega", "0.5:5:10:log"],
        vec!["nogo", "scan", "--modes", "3", "--alpha", "0.5", "--cutoffs", "4,5,6"],
        vec!["check", "appendix", "--seed", "3"],
        vec!["squeeze", "single", "--alpha", "0.3"],
    ] {
        let first = squeezekit(&args);
        let second = squeezekit(&args);
        assert!(first.status.success());
        assert_eq!(first.stdout, second.stdout, "args: {args:?}");
    }
}

#[test]
fn output_flag_writes_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    let out = squeezekit(&[
        "squeeze",
        "single",
        "--alpha",
        "0.3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], "1");
    // no stray temp files left behind
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn thread_cap_env_var_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_squeezekit"))
        .env("SQUEEZEKIT_THREADS", "1")
        .args(["tfd", "spectrum", "--beta", "1", "--omega", "0.5:5:5:lin"])
        .output()
        .unwrap();
    assert!(out.status.success());
}
