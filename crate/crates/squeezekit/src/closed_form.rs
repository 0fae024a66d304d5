//! Direct Fock-coefficient constructors for squeezed vacua.
//!
//! Single-mode: the state annihilated by `(a - alpha a^dag)` has
//! `C_{2n} = alpha^n sqrt((2n-1)!!/(2n)!!) C_0` with
//! `C_0 = (1-|alpha|^2)^{1/4}` real positive, odd coefficients zero.
//!
//! Two-mode: the joint kernel of `(a - alpha b^dag)` and
//! `(b - alpha a^dag)` is `sqrt(1-|alpha|^2) sum alpha^m |m,m>`.
//!
//! Both demand `|alpha| < 1` for normalizability. The exponential-series
//! constructors build the same states along an independent numerical route
//! (`exp(alpha a^dag^2 / 2)|0>` and `exp(alpha a^dag b^dag)|0,0>`) and are
//! used as cross-checks against the recurrence forms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{encode_index, FockState};

type C64 = Complex64;

/// Default tail target for [`auto_cutoff`].
pub const DEFAULT_CUTOFF_EPS: f64 = 1e-12;

/// Which coupled-mode condition an `alpha` parametrizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaContext {
    SingleMode,
    TwoMode,
}

/// Coupling parameter of an annihilation condition, `|alpha| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParamAlpha {
    value: C64,
    context: AlphaContext,
}

impl SqueezeParamAlpha {
    pub fn new(value: C64, context: AlphaContext) -> Result<Self> {
        let alpha_abs = value.norm();
        if alpha_abs >= 1.0 {
            return Err(Error::NonNormalizable { alpha_abs });
        }
        if !alpha_abs.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        Ok(Self { value, context })
    }

    pub fn single(value: C64) -> Result<Self> {
        Self::new(value, AlphaContext::SingleMode)
    }

    pub fn two(value: C64) -> Result<Self> {
        Self::new(value, AlphaContext::TwoMode)
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn abs(&self) -> f64 {
        self.value.norm()
    }

    pub fn context(&self) -> AlphaContext {
        self.context
    }
}

/// A truncated closed-form state together with the norm deficit it had
/// before renormalization, so truncation error stays distinguishable from
/// logic error.
#[derive(Debug, Clone)]
pub struct ClosedFormState {
    pub state: FockState,
    /// `1 - ||psi_truncated||^2` measured against the exact normalization.
    pub truncation_deficit: f64,
}

/// `(2n-1)!!/(2n)!!`, evaluated in log space via lgamma differences so the
/// individual double factorials never overflow. `(-1)!! = 1`.
///
/// Uses `(2n-1)!!/(2n)!! = (2n)! / (2^n n!)^2`.
pub fn double_factorial_ratio(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let log_ratio = libm::lgamma(2.0 * nf + 1.0)
        - 2.0 * libm::lgamma(nf + 1.0)
        - 2.0 * nf * std::f64::consts::LN_2;
    log_ratio.exp()
}

/// Partial sum of the generating function `(1-x)^{-1/2} = sum ratio(n) x^n`
/// over `n < terms`; requires `|x| < 1`.
pub fn gen_fn_partial_sum(x: f64, terms: usize) -> Result<f64> {
    if x.abs() >= 1.0 {
        return Err(Error::NonNormalizable { alpha_abs: x.abs() });
    }
    if terms == 0 {
        return Err(Error::InvalidParameter("terms must be >= 1".into()));
    }
    let mut sum = 0.0;
    let mut xn = 1.0;
    for n in 0..terms {
        sum += double_factorial_ratio(n) * xn;
        xn *= x;
    }
    Ok(sum)
}

/// Smallest even cutoff `K` with `|alpha|^{K+2} / (1 - |alpha|^2) < eps`.
pub fn auto_cutoff(alpha_abs: f64, eps: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha_abs) {
        return Err(Error::NonNormalizable { alpha_abs });
    }
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let denom = 1.0 - alpha_abs * alpha_abs;
    let mut cutoff = 2usize;
    while alpha_abs.powi(cutoff as i32 + 2) / denom >= eps {
        cutoff += 2;
        if cutoff > 2000 {
            return Err(Error::CutoffTooSmall(format!(
                "auto cutoff for |alpha| = {alpha_abs} exceeds 2000 at eps = {eps}"
            )));
        }
    }
    Ok(cutoff)
}

/// One-term truncation bound on the single-mode defining residual
/// `||(a - alpha a^dag) psi_K||`: `|alpha|^{K/2+1} sqrt(K+2)`.
pub fn smsv_tail_bound(alpha_abs: f64, cutoff: usize) -> f64 {
    alpha_abs.powf(cutoff as f64 / 2.0 + 1.0) * ((cutoff + 2) as f64).sqrt()
}

/// Two-mode analogue: the unmatched boundary term of one coupled condition,
/// `|alpha|^{K+1} sqrt(K+2)`.
pub fn tmsv_tail_bound(alpha_abs: f64, cutoff: usize) -> f64 {
    alpha_abs.powi(cutoff as i32 + 1) * ((cutoff + 2) as f64).sqrt()
}

/// Single-mode squeezed vacuum by the recurrence route, renormalized after
/// truncation. Odd-occupation amplitudes are exactly zero.
pub fn smsv_closed_form(alpha: &SqueezeParamAlpha, cutoff: usize) -> Result<ClosedFormState> {
    if alpha.context() != AlphaContext::SingleMode {
        return Err(Error::InvalidParameter(
            "smsv_closed_form expects a single-mode alpha".into(),
        ));
    }
    if cutoff == 0 {
        return Err(Error::InvalidDimension("cutoff must be >= 1"));
    }
    let a = alpha.value();
    let c0 = (1.0 - a.norm_sqr()).powf(0.25);
    let mut amplitudes = vec![C64::new(0.0, 0.0); cutoff + 1];
    let mut coeff = C64::new(c0, 0.0);
    amplitudes[0] = coeff;
    let mut n = 1usize;
    while 2 * n <= cutoff {
        // C_{2n} = alpha sqrt((2n-1)/(2n)) C_{2n-2}
        coeff *= a * ((2 * n - 1) as f64 / (2 * n) as f64).sqrt();
        amplitudes[2 * n] = coeff;
        n += 1;
    }
    let state = FockState::from_amplitudes(1, cutoff, amplitudes)?;
    let truncation_deficit = 1.0 - state.norm_sqr();
    Ok(ClosedFormState {
        state: state.normalized()?,
        truncation_deficit,
    })
}

/// Two-mode squeezed vacuum `sqrt(1-|alpha|^2) sum alpha^m |m,m>`,
/// renormalized after truncation. All off-diagonal amplitudes are exactly
/// zero.
pub fn tmsv_closed_form(alpha: &SqueezeParamAlpha, cutoff: usize) -> Result<ClosedFormState> {
    if alpha.context() != AlphaContext::TwoMode {
        return Err(Error::InvalidParameter(
            "tmsv_closed_form expects a two-mode alpha".into(),
        ));
    }
    if cutoff == 0 {
        return Err(Error::InvalidDimension("cutoff must be >= 1"));
    }
    let a = alpha.value();
    let c00 = (1.0 - a.norm_sqr()).sqrt();
    let mut amplitudes = vec![C64::new(0.0, 0.0); (cutoff + 1) * (cutoff + 1)];
    let mut coeff = C64::new(c00, 0.0);
    for m in 0..=cutoff {
        amplitudes[encode_index(&[m, m], cutoff)] = coeff;
        coeff *= a;
    }
    let state = FockState::from_amplitudes(2, cutoff, amplitudes)?;
    let truncation_deficit = 1.0 - state.norm_sqr();
    Ok(ClosedFormState {
        state: state.normalized()?,
        truncation_deficit,
    })
}

/// `exp(alpha a^dag^2 / 2)|0>` by direct series, unnormalized: the |2n>
/// amplitude is `alpha^n sqrt((2n)!) / (2^n n!)`, evaluated in log space.
pub fn exp_quadratic_single_unnormalized(alpha: C64, cutoff: usize) -> Result<FockState> {
    let alpha_abs = alpha.norm();
    if alpha_abs >= 1.0 {
        return Err(Error::NonNormalizable { alpha_abs });
    }
    if cutoff == 0 {
        return Err(Error::InvalidDimension("cutoff must be >= 1"));
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); cutoff + 1];
    let mut alpha_pow = C64::new(1.0, 0.0);
    let mut n = 0usize;
    while 2 * n <= cutoff {
        let nf = n as f64;
        let log_mag = 0.5 * libm::lgamma(2.0 * nf + 1.0)
            - nf * std::f64::consts::LN_2
            - libm::lgamma(nf + 1.0);
        amplitudes[2 * n] = alpha_pow * log_mag.exp();
        alpha_pow *= alpha;
        n += 1;
    }
    FockState::from_amplitudes(1, cutoff, amplitudes)
}

/// Normalized variant of [`exp_quadratic_single_unnormalized`]; must agree
/// with [`smsv_closed_form`] up to truncation.
pub fn exp_quadratic_single(alpha: C64, cutoff: usize) -> Result<ClosedFormState> {
    let raw = exp_quadratic_single_unnormalized(alpha, cutoff)?;
    // exact norm^2 of the untruncated series is (1-|alpha|^2)^{-1/2}
    let exact_norm_sqr = (1.0 - alpha.norm_sqr()).powf(-0.5);
    let truncation_deficit = 1.0 - raw.norm_sqr() / exact_norm_sqr;
    Ok(ClosedFormState {
        state: raw.normalized()?,
        truncation_deficit,
    })
}

/// `exp(alpha a^dag b^dag)|0,0>` by direct series, unnormalized: amplitude
/// `alpha^m` at `(m,m)`.
pub fn exp_pair_coupling_unnormalized(alpha: C64, cutoff: usize) -> Result<FockState> {
    let alpha_abs = alpha.norm();
    if alpha_abs >= 1.0 {
        return Err(Error::NonNormalizable { alpha_abs });
    }
    if cutoff == 0 {
        return Err(Error::InvalidDimension("cutoff must be >= 1"));
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); (cutoff + 1) * (cutoff + 1)];
    let mut alpha_pow = C64::new(1.0, 0.0);
    for m in 0..=cutoff {
        amplitudes[encode_index(&[m, m], cutoff)] = alpha_pow;
        alpha_pow *= alpha;
    }
    FockState::from_amplitudes(2, cutoff, amplitudes)
}

/// Normalized variant of [`exp_pair_coupling_unnormalized`]; must agree with
/// [`tmsv_closed_form`] up to truncation.
pub fn exp_pair_coupling(alpha: C64, cutoff: usize) -> Result<ClosedFormState> {
    let raw = exp_pair_coupling_unnormalized(alpha, cutoff)?;
    // exact norm^2 of the untruncated series is 1/(1-|alpha|^2)
    let exact_norm_sqr = 1.0 / (1.0 - alpha.norm_sqr());
    let truncation_deficit = 1.0 - raw.norm_sqr() / exact_norm_sqr;
    Ok(ClosedFormState {
        state: raw.normalized()?,
        truncation_deficit,
    })
}
