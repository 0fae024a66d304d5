//! Thermofield-double squeezing spectra.
//!
//! Per frequency `omega` at inverse temperature `beta` the coupling is
//! `alpha(omega) = exp(-beta omega / 2) = tanh(r)`, equivalently
//! `r = (1/2) ln coth(beta omega / 4)`. Each grid point is an independent
//! two-mode squeezing problem; the product structure over frequencies is
//! exact, so a discrete grid replaces the continuum integral with no
//! cross-frequency coupling. The reduced single-wedge state is thermal with
//! Bose-Einstein occupation `1 / (exp(beta omega) - 1)`.

use rayon::prelude::*;

use crate::closed_form::{tmsv_closed_form, SqueezeParamAlpha};
use crate::error::{Error, Result};
use crate::fock::FockState;

/// Tail target for the per-row auto cutoff: smallest `K` with
/// `alpha^K < AUTO_CUTOFF_EPS`.
pub const AUTO_CUTOFF_EPS: f64 = 1e-12;

/// Hard cap on per-row cutoffs; hot rows (tiny `beta omega`) get flagged
/// instead of exploding.
pub const MAX_ROW_CUTOFF: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Linear,
    Logarithmic,
}

/// Frequency-grid configuration for a spectrum run.
#[derive(Debug, Clone)]
pub struct TfdConfig {
    pub beta: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub num_points: usize,
    pub grid: GridKind,
}

impl TfdConfig {
    pub fn new(
        beta: f64,
        omega_min: f64,
        omega_max: f64,
        num_points: usize,
        grid: GridKind,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
        }
        if !(omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
            )));
        }
        if num_points < 2 {
            return Err(Error::InvalidParameter("num_points must be >= 2".into()));
        }
        Ok(Self { beta, omega_min, omega_max, num_points, grid })
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.num_points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.grid {
                    GridKind::Linear => self.omega_min + t * (self.omega_max - self.omega_min),
                    GridKind::Logarithmic => {
                        (self.omega_min.ln() + t * (self.omega_max.ln() - self.omega_min.ln()))
                            .exp()
                    }
                }
            })
            .collect()
    }
}

/// One spectrum entry.
#[derive(Debug, Clone)]
pub struct TfdSpectrumRow {
    pub omega: f64,
    /// `exp(-beta omega / 2)`, always in (0, 1).
    pub alpha: f64,
    /// Squeeze magnitude, `tanh(r) = alpha`.
    pub r: f64,
    pub mean_occupation: f64,
    /// Max deviation of the reduced single-mode populations from the
    /// Bose-Einstein geometric law.
    pub thermal_residual: f64,
    /// Fock cutoff the row was assembled at.
    pub cutoff: usize,
    /// True when the auto cutoff hit [`MAX_ROW_CUTOFF`].
    pub truncated: bool,
}

fn check_positive(beta: f64, omega: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
    }
    Ok(())
}

/// `alpha = exp(-beta omega / 2)`; automatically satisfies the
/// normalizability bound `|alpha| < 1`.
pub fn tfd_alpha(beta: f64, omega: f64) -> Result<f64> {
    check_positive(beta, omega)?;
    Ok((-beta * omega / 2.0).exp())
}

/// `r = (1/2) ln coth(beta omega / 4)`, evaluated as
/// `(ln(1 + alpha) - ln(1 - alpha)) / 2` with `1 - alpha = -expm1(-x)`
/// so both the `beta omega >> 1` and `beta omega << 1` regimes stay
/// cancellation-free.
pub fn tfd_r(beta: f64, omega: f64) -> Result<f64> {
    check_positive(beta, omega)?;
    let x = beta * omega / 2.0;
    let alpha = (-x).exp();
    let one_minus_alpha = -(-x).exp_m1();
    Ok(0.5 * (alpha.ln_1p() - one_minus_alpha.ln()))
}

/// Smallest cutoff with `alpha^K < eps`, clamped to
/// `[2, MAX_ROW_CUTOFF]`; the bool flags a clamped (still hot) row.
fn row_cutoff(alpha: f64, eps: f64) -> (usize, bool) {
    if alpha <= 0.0 {
        return (2, false);
    }
    let needed = (eps.ln() / alpha.ln()).ceil();
    if needed <= 2.0 {
        (2, false)
    } else if needed > MAX_ROW_CUTOFF as f64 {
        (MAX_ROW_CUTOFF, true)
    } else {
        (needed as usize, false)
    }
}

/// Thermality diagnostics of the reduced single-wedge state.
#[derive(Debug, Clone, Copy)]
pub struct ThermalCheck {
    /// `max_n |p_n - (1 - e^{-beta omega}) e^{-beta omega n}|`.
    pub population_residual: f64,
    /// `|n_mean - 1/(e^{beta omega} - 1)|`.
    pub mean_occupation_residual: f64,
    /// Largest off-diagonal magnitude of the reduced density matrix.
    pub off_diagonal_max: f64,
}

/// Assemble the two-mode state at `(beta, omega)`, trace out one wedge and
/// compare against the Bose-Einstein law.
pub fn thermal_check(beta: f64, omega: f64, cutoff: usize) -> Result<ThermalCheck> {
    let alpha = tfd_alpha(beta, omega)?;
    if alpha.powi(cutoff as i32) >= 1e-10 {
        return Err(Error::CutoffTooSmall(format!(
            "alpha^cutoff = {:.3e} >= 1e-10 at beta*omega = {}",
            alpha.powi(cutoff as i32),
            beta * omega
        )));
    }
    thermal_check_at_cutoff(beta, omega, cutoff)
}

/// As [`thermal_check`] but without the cutoff precondition; capped spectrum
/// rows still report their (correspondingly larger) residual.
fn thermal_check_at_cutoff(beta: f64, omega: f64, cutoff: usize) -> Result<ThermalCheck> {
    let alpha = tfd_alpha(beta, omega)?;
    let param = SqueezeParamAlpha::two(num_complex::Complex64::new(alpha, 0.0))?;
    let state = tmsv_closed_form(&param, cutoff)?.state;
    let rho = state.reduced_density(&[1])?;

    let boltzmann = (-beta * omega).exp();
    let populations = rho.diagonal();
    let mut population_residual = 0.0f64;
    for (n, &p) in populations.iter().enumerate() {
        let expected = (1.0 - boltzmann) * boltzmann.powi(n as i32);
        population_residual = population_residual.max((p - expected).abs());
    }
    let mean = state.mean_occupation(1)?;
    let bose_einstein = ((beta * omega).exp_m1()).recip();
    Ok(ThermalCheck {
        population_residual,
        mean_occupation_residual: (mean - bose_einstein).abs(),
        off_diagonal_max: rho.off_diagonal_max(),
    })
}

/// Assemble the spectrum row at one frequency.
fn spectrum_row(beta: f64, omega: f64) -> Result<TfdSpectrumRow> {
    let alpha = tfd_alpha(beta, omega)?;
    let r = tfd_r(beta, omega)?;
    let (cutoff, truncated) = row_cutoff(alpha, AUTO_CUTOFF_EPS);
    let param = SqueezeParamAlpha::two(num_complex::Complex64::new(alpha, 0.0))?;
    let state: FockState = tmsv_closed_form(&param, cutoff)?.state;
    let mean_occupation = state.mean_occupation(1)?;
    let check = thermal_check_at_cutoff(beta, omega, cutoff)?;
    Ok(TfdSpectrumRow {
        omega,
        alpha,
        r,
        mean_occupation,
        thermal_residual: check.population_residual,
        cutoff,
        truncated,
    })
}

/// Per-frequency squeezing data over the configured grid, sorted by omega.
/// Rows are independent and computed in parallel.
pub fn tfd_spectrum(config: &TfdConfig) -> Result<Vec<TfdSpectrumRow>> {
    config
        .frequencies()
        .par_iter()
        .map(|&omega| spectrum_row(config.beta, omega))
        .collect()
}
