//! CLI outputs pinned against the golden examples under docs/golden/.
//! These catch both schema drift and numerical drift.

use std::path::PathBuf;
use std::process::Command;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/golden")
}

fn run(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_squeezekit"))
        .args(args)
        .output()
        .expect("failed to launch squeezekit");
    assert!(out.status.success(), "command failed: {args:?}");
    out.stdout
}

fn assert_matches_golden(args: &[&str], file: &str) {
    let expected = std::fs::read(golden_dir().join(file))
        .unwrap_or_else(|e| panic!("missing golden file {file}: {e}"));
    let actual = run(args);
    assert_eq!(
        actual, expected,
        "output of {args:?} no longer matches docs/golden/{file}"
    );
}

#[test]
fn squeeze_single_matches_golden() {
    assert_matches_golden(
        &["squeeze", "single", "--alpha", "0.5", "--cutoff", "8"],
        "squeeze_single.json",
    );
}

#[test]
fn nogo_scan_matches_golden() {
    assert_matches_golden(
        &["nogo", "scan", "--modes", "3", "--alpha", "0.5", "--cutoffs", "4,5,6"],
        "nogo_scan_n3.json",
    );
}

#[test]
fn pairwise_chain_matches_golden() {
    assert_matches_golden(
        &["nogo", "pairwise-chain", "--modes", "4", "--alpha", "0.5", "--cutoff", "16"],
        "pairwise_chain_n4.json",
    );
}

#[test]
fn tfd_spectrum_matches_golden() {
    assert_matches_golden(
        &["tfd", "spectrum", "--beta", "1", "--omega", "0.5:5:5:log"],
        "tfd_spectrum.csv",
    );
}

#[test]
fn equiv_single_matches_golden() {
    assert_matches_golden(
        &["equiv", "single", "--r", "0.3", "--theta", "0", "--cutoff", "30"],
        "equiv_single.json",
    );
}
