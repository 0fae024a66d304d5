//! Output document schema shared by the CLI and tests.
//!
//! Complex numbers serialize as `[re, im]` pairs. Amplitude tensors are
//! flat arrays with an explicit `shape` field, in occupation-number
//! lexicographic order with mode 1 slowest-varying. Every JSON document
//! carries a top-level `schema_version` and echoes its fully-resolved run
//! configuration. Serialization uses serde_json's shortest round-trip float
//! encoding, so amplitudes reload bit-exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::solver::{KernelMethod, KernelReport, ScanEvidence, Verdict, VerdictKind};
use crate::tfd::TfdSpectrumRow;

pub const SCHEMA_VERSION: &str = "1";

type C64 = num_complex::Complex64;

pub fn complex_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn pair_complex(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

/// A serialized Fock state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDoc {
    pub schema_version: String,
    pub num_modes: usize,
    pub cutoff: usize,
    /// Per-mode dimensions, `[cutoff+1; num_modes]`.
    pub shape: Vec<usize>,
    /// Flat amplitude tensor, lexicographic, mode 1 slowest.
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateDoc {
    pub fn from_state(state: &FockState) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            num_modes: state.num_modes(),
            cutoff: state.cutoff(),
            shape: vec![state.cutoff() + 1; state.num_modes()],
            amplitudes: state.amplitudes().iter().map(|&z| complex_pair(z)).collect(),
        }
    }

    pub fn to_state(&self) -> Result<FockState> {
        let expected_shape = vec![self.cutoff + 1; self.num_modes];
        if self.shape != expected_shape {
            return Err(Error::ShapeMismatch(format!(
                "state document shape {:?} does not match cutoff {}",
                self.shape, self.cutoff
            )));
        }
        FockState::from_amplitudes(
            self.num_modes,
            self.cutoff,
            self.amplitudes.iter().map(|&p| pair_complex(p)).collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SqueezeDoc {
    pub schema_version: String,
    pub config: serde_json::Value,
    pub alpha: [f64; 2],
    pub cutoff: usize,
    /// Pre-renormalization norm deficit of the truncated expansion.
    pub truncation_deficit: f64,
    /// Leading amplitude (C_0 or C_00).
    pub c0: [f64; 2],
    pub mean_occupation: f64,
    /// Defining-condition residual(s) in the rectangular codomain.
    pub defining_residuals: Vec<f64>,
    pub state: StateDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivDoc {
    pub schema_version: String,
    pub config: serde_json::Value,
    pub context: String,
    pub r: f64,
    pub theta: f64,
    pub alpha: [f64; 2],
    pub cutoff: usize,
    pub fidelity: f64,
    pub fidelity_deficit: f64,
    /// `| ||S xi vacuum|| - 1 |` for the unitary route.
    pub unitary_norm_deficit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelReportDoc {
    pub cutoff: usize,
    pub tolerance: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub singular_values: Vec<f64>,
    pub kernel_dim: usize,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_basis: Option<Vec<StateDoc>>,
}

impl KernelReportDoc {
    pub fn from_report(report: &KernelReport, include_basis: bool) -> Self {
        Self {
            cutoff: report.cutoff,
            tolerance: report.tolerance,
            sigma_max: report.sigma_max,
            sigma_min: report.sigma_min,
            singular_values: report.singular_values.clone(),
            kernel_dim: report.kernel_dim,
            method: method_name(report.method).to_string(),
            kernel_basis: include_basis.then(|| {
                report.kernel_basis.iter().map(StateDoc::from_state).collect()
            }),
        }
    }
}

pub fn method_name(method: KernelMethod) -> &'static str {
    match method {
        KernelMethod::Dense => "dense-svd",
        KernelMethod::Gram => "gram-eigen",
        KernelMethod::Lanczos => "lanczos",
    }
}

pub fn verdict_name(kind: VerdictKind) -> &'static str {
    match kind {
        VerdictKind::UniqueSqueezedState => "UniqueSqueezedState",
        VerdictKind::VacuumOnly => "VacuumOnly",
        VerdictKind::NoSolution => "NoSolution",
        VerdictKind::Inconclusive => "Inconclusive",
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvidenceDoc {
    pub cutoffs: Vec<usize>,
    pub sigma_min_trajectory: Vec<f64>,
    pub kernel_dim_trajectory: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau_rel_change: Option<f64>,
}

impl EvidenceDoc {
    pub fn from_evidence(evidence: &ScanEvidence) -> Self {
        Self {
            cutoffs: evidence.cutoffs.clone(),
            sigma_min_trajectory: evidence.sigma_min_trajectory.clone(),
            kernel_dim_trajectory: evidence.kernel_dim_trajectory.clone(),
            log_slope: evidence.log_slope,
            plateau_rel_change: evidence.plateau_rel_change,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NogoScanDoc {
    pub schema_version: String,
    pub config: serde_json::Value,
    pub verdict: String,
    pub evidence: EvidenceDoc,
    pub reports: Vec<KernelReportDoc>,
}

impl NogoScanDoc {
    pub fn new(config: serde_json::Value, verdict: &Verdict, reports: &[KernelReport]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            config,
            verdict: verdict_name(verdict.kind).to_string(),
            evidence: EvidenceDoc::from_evidence(&verdict.evidence),
            reports: reports
                .iter()
                .map(|r| KernelReportDoc::from_report(r, false))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseChainDoc {
    pub schema_version: String,
    pub config: serde_json::Value,
    pub pair_residuals: Vec<f64>,
    pub cyclic_residuals: Vec<f64>,
    pub max_pair_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_linking_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfdRowDoc {
    pub omega: f64,
    pub alpha: f64,
    pub r: f64,
    pub mean_occupation: f64,
    pub thermal_residual: f64,
    pub cutoff: usize,
    pub truncated: bool,
}

impl TfdRowDoc {
    pub fn from_row(row: &TfdSpectrumRow) -> Self {
        Self {
            omega: row.omega,
            alpha: row.alpha,
            r: row.r,
            mean_occupation: row.mean_occupation,
            thermal_residual: row.thermal_residual,
            cutoff: row.cutoff,
            truncated: row.truncated,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfdSpectrumDoc {
    pub schema_version: String,
    pub config: serde_json::Value,
    pub rows: Vec<TfdRowDoc>,
}

/// The five spectrum columns as CSV, header included.
pub fn spectrum_to_csv(rows: &[TfdSpectrumRow]) -> String {
    let mut out = String::from("omega,alpha,r,mean_occupation,thermal_residual\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.omega, row.alpha, row.r, row.mean_occupation, row.thermal_residual
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenFnCheckDoc {
    pub x: f64,
    pub terms: usize,
    pub partial_sum: f64,
    pub exact: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommutatorCheckDoc {
    pub alpha: [f64; 2],
    pub cutoff: usize,
    pub window: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OffDiagonalCheckDoc {
    pub alpha: [f64; 2],
    pub cutoff: usize,
    /// Largest |m != n| amplitude of the closed-form two-mode state.
    pub closed_form_max: f64,
    /// Largest |m != n| amplitude across the numerical kernel basis.
    pub kernel_basis_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppendixDoc {
    pub schema_version: String,
    pub config: serde_json::Value,
    pub generating_function: Vec<GenFnCheckDoc>,
    pub commutator: Vec<CommutatorCheckDoc>,
    pub off_diagonal: OffDiagonalCheckDoc,
}

/// Serialize with a stable layout and trailing newline.
pub fn to_json_bytes<T: Serialize>(doc: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Write through a temp file in the target directory, then rename.
pub fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
            std::process::id()
        )),
        None => std::path::PathBuf::from(format!(".squeezekit.tmp-{}", std::process::id())),
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_doc_round_trip_is_exact() {
        let amps: Vec<C64> = (0..9)
            .map(|i| C64::new((i as f64 * 0.37).sin() * 0.3, (i as f64 * 1.1).cos() * 0.2))
            .collect();
        let state = FockState::from_amplitudes(2, 2, amps).unwrap();
        let doc = StateDoc::from_state(&state);
        let json = serde_json::to_string(&doc).unwrap();
        let back: StateDoc = serde_json::from_str(&json).unwrap();
        let restored = back.to_state().unwrap();
        for (a, b) in state.amplitudes().iter().zip(restored.amplitudes()) {
            assert_eq!(a, b, "round trip must be bit-exact");
        }
    }

    #[test]
    fn state_doc_rejects_bad_shape() {
        let state = FockState::vacuum(1, 3).unwrap();
        let mut doc = StateDoc::from_state(&state);
        doc.shape = vec![7];
        assert!(doc.to_state().is_err());
    }

    #[test]
    fn csv_has_five_columns() {
        let rows = vec![TfdSpectrumRow {
            omega: 1.0,
            alpha: 0.5,
            r: 0.54,
            mean_occupation: 0.33,
            thermal_residual: 1e-12,
            cutoff: 40,
            truncated: false,
        }];
        let csv = spectrum_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "omega,alpha,r,mean_occupation,thermal_residual"
        );
        assert_eq!(lines.next().unwrap().split(',').count(), 5);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        // no stray temp files
        let count = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(count, 1);
    }
}
