//! C ABI for squeezekit.
//!
//! Opaque handles own their Rust values and must be released with the
//! matching `*_free` function. Every fallible call returns an [`SqkStatus`];
//! results come back through out-pointers. Scalars use `double`, complex
//! numbers travel as `(re, im)` pairs, and amplitude buffers are
//! re/im-interleaved in the crate's lexicographic basis order (mode 1
//! slowest-varying).
//!
//! The C header is generated by cbindgen into `include/squeezekit.h` at
//! build time.

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;

use squeezekit::closed_form::{smsv_closed_form, tmsv_closed_form, SqueezeParamAlpha};
use squeezekit::fock::{fidelity, FockState};
use squeezekit::solver::{classify, cutoff_scan, MemoryBudget, VerdictKind};
use squeezekit::tfd::{tfd_alpha, tfd_r, tfd_spectrum, GridKind, TfdConfig};
use squeezekit::unitary::{squeeze_single, squeeze_two, SqueezeParamXi};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A coupling violated `|alpha| < 1`.
    NonNormalizable = 3,
    ShapeMismatch = 4,
    BufferTooSmall = 5,
    ComputationFailed = 6,
    InternalError = 7,
}

/// Scan classification outcomes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqkVerdict {
    UniqueSqueezedState = 0,
    VacuumOnly = 1,
    NoSolution = 2,
    Inconclusive = 3,
}

/// Opaque multi-mode Fock state handle.
pub struct SqkState {
    inner: FockState,
}

fn status_of(err: &squeezekit::Error) -> SqkStatus {
    use squeezekit::Error;
    match err {
        Error::NonNormalizable { .. } => SqkStatus::NonNormalizable,
        Error::ShapeMismatch(_) | Error::ModeIndexOutOfRange { .. } => SqkStatus::ShapeMismatch,
        Error::MemoryBudget { .. } | Error::SvdFailed => SqkStatus::ComputationFailed,
        Error::Io(_) | Error::Json(_) => SqkStatus::InternalError,
        _ => SqkStatus::InvalidArgument,
    }
}

fn guarded(f: impl FnOnce() -> SqkStatus) -> SqkStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(SqkStatus::InternalError)
}

fn emit_state(out: *mut *mut SqkState, result: squeezekit::Result<FockState>) -> SqkStatus {
    match result {
        Ok(state) => {
            unsafe { *out = Box::into_raw(Box::new(SqkState { inner: state })) };
            SqkStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Library version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn sqk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a state handle. Passing NULL is a no-op.
///
/// # Safety
/// `state` must be a pointer previously returned by a squeezekit constructor
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sqk_state_free(state: *mut SqkState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Product vacuum over `num_modes` modes at the given cutoff.
#[no_mangle]
pub extern "C" fn sqk_state_vacuum(
    num_modes: usize,
    cutoff: usize,
    out: *mut *mut SqkState,
) -> SqkStatus {
    if out.is_null() {
        return SqkStatus::NullPointer;
    }
    guarded(|| emit_state(out, FockState::vacuum(num_modes, cutoff)))
}

/// Single-mode squeezed vacuum annihilated by `(a - alpha a^dag)`.
#[no_mangle]
pub extern "C" fn sqk_smsv_closed_form(
    alpha_re: f64,
    alpha_im: f64,
    cutoff: usize,
    out: *mut *mut SqkState,
) -> SqkStatus {
    if out.is_null() {
        return SqkStatus::NullPointer;
    }
    guarded(|| {
        let result = SqueezeParamAlpha::single(Complex64::new(alpha_re, alpha_im))
            .and_then(|alpha| smsv_closed_form(&alpha, cutoff))
            .map(|cf| cf.state);
        emit_state(out, result)
    })
}

/// Two-mode squeezed vacuum for the coupled conditions with equal coupling.
#[no_mangle]
pub extern "C" fn sqk_tmsv_closed_form(
    alpha_re: f64,
    alpha_im: f64,
    cutoff: usize,
    out: *mut *mut SqkState,
) -> SqkStatus {
    if out.is_null() {
        return SqkStatus::NullPointer;
    }
    guarded(|| {
        let result = SqueezeParamAlpha::two(Complex64::new(alpha_re, alpha_im))
            .and_then(|alpha| tmsv_closed_form(&alpha, cutoff))
            .map(|cf| cf.state);
        emit_state(out, result)
    })
}

/// `S(xi)|0>` with `xi = r e^{i theta}`.
#[no_mangle]
pub extern "C" fn sqk_squeeze_single(
    r: f64,
    theta: f64,
    cutoff: usize,
    out: *mut *mut SqkState,
) -> SqkStatus {
    if out.is_null() {
        return SqkStatus::NullPointer;
    }
    guarded(|| {
        let result = SqueezeParamXi::new(r, theta).and_then(|xi| squeeze_single(&xi, cutoff));
        emit_state(out, result)
    })
}

/// `T(xi)|0,0>` with `xi = r e^{i theta}`.
#[no_mangle]
pub extern "C" fn sqk_squeeze_two(
    r: f64,
    theta: f64,
    cutoff: usize,
    out: *mut *mut SqkState,
) -> SqkStatus {
    if out.is_null() {
        return SqkStatus::NullPointer;
    }
    guarded(|| {
        let result = SqueezeParamXi::new(r, theta).and_then(|xi| squeeze_two(&xi, cutoff));
        emit_state(out, result)
    })
}

/// # Safety
/// `state` must be a live handle from a squeezekit constructor.
#[no_mangle]
pub unsafe extern "C" fn sqk_state_num_modes(
    state: *const SqkState,
    out: *mut usize,
) -> SqkStatus {
    if state.is_null() || out.is_null() {
        return SqkStatus::NullPointer;
    }
    unsafe { *out = (*state).inner.num_modes() };
    SqkStatus::Ok
}

/// # Safety
/// `state` must be a live handle from a squeezekit constructor.
#[no_mangle]
pub unsafe extern "C" fn sqk_state_cutoff(state: *const SqkState, out: *mut usize) -> SqkStatus {
    if state.is_null() || out.is_null() {
        return SqkStatus::NullPointer;
    }
    unsafe { *out = (*state).inner.cutoff() };
    SqkStatus::Ok
}

/// Total amplitude count, `(cutoff + 1)^num_modes`.
///
/// # Safety
/// `state` must be a live handle from a squeezekit constructor.
#[no_mangle]
pub unsafe extern "C" fn sqk_state_dim(state: *const SqkState, out: *mut usize) -> SqkStatus {
    if state.is_null() || out.is_null() {
        return SqkStatus::NullPointer;
    }
    unsafe { *out = (*state).inner.dim() };
    SqkStatus::Ok
}

/// Copy the amplitude tensor into `buffer` as re/im-interleaved doubles.
/// `buffer_len` must be at least `2 * dim`.
///
/// # Safety
/// `state` must be a live handle; `buffer` must point to at least
/// `buffer_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sqk_state_amplitudes(
    state: *const SqkState,
    buffer: *mut f64,
    buffer_len: usize,
) -> SqkStatus {
    if state.is_null() || buffer.is_null() {
        return SqkStatus::NullPointer;
    }
    let amplitudes = unsafe { (*state).inner.amplitudes() };
    if buffer_len < 2 * amplitudes.len() {
        return SqkStatus::BufferTooSmall;
    }
    for (i, z) in amplitudes.iter().enumerate() {
        unsafe {
            *buffer.add(2 * i) = z.re;
            *buffer.add(2 * i + 1) = z.im;
        }
    }
    SqkStatus::Ok
}

/// `|<a|b>|^2` for normalized states of matching shape.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn sqk_state_fidelity(
    a: *const SqkState,
    b: *const SqkState,
    out: *mut f64,
) -> SqkStatus {
    if a.is_null() || b.is_null() || out.is_null() {
        return SqkStatus::NullPointer;
    }
    guarded(|| match fidelity(unsafe { &(*a).inner }, unsafe { &(*b).inner }) {
        Ok(f) => {
            unsafe { *out = f };
            SqkStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Mean occupation of a 1-based mode index.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqk_state_mean_occupation(
    state: *const SqkState,
    mode_index: usize,
    out: *mut f64,
) -> SqkStatus {
    if state.is_null() || out.is_null() {
        return SqkStatus::NullPointer;
    }
    guarded(|| match unsafe { (*state).inner.mean_occupation(mode_index) } {
        Ok(n) => {
            unsafe { *out = n };
            SqkStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// `alpha = exp(-beta omega / 2)`.
#[no_mangle]
pub extern "C" fn sqk_tfd_alpha(beta: f64, omega: f64, out: *mut f64) -> SqkStatus {
    if out.is_null() {
        return SqkStatus::NullPointer;
    }
    match tfd_alpha(beta, omega) {
        Ok(a) => {
            unsafe { *out = a };
            SqkStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// `r = (1/2) ln coth(beta omega / 4)`.
#[no_mangle]
pub extern "C" fn sqk_tfd_r(beta: f64, omega: f64, out: *mut f64) -> SqkStatus {
    if out.is_null() {
        return SqkStatus::NullPointer;
    }
    match tfd_r(beta, omega) {
        Ok(r) => {
            unsafe { *out = r };
            SqkStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Fill `buffer` with the spectrum as rows of
/// `(omega, alpha, r, mean_occupation, thermal_residual)`; `buffer_len`
/// must be at least `5 * num_points`. `log_grid` nonzero selects the
/// logarithmic grid.
///
/// # Safety
/// `buffer` must point to at least `buffer_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sqk_tfd_spectrum(
    beta: f64,
    omega_min: f64,
    omega_max: f64,
    num_points: usize,
    log_grid: i32,
    buffer: *mut f64,
    buffer_len: usize,
) -> SqkStatus {
    if buffer.is_null() {
        return SqkStatus::NullPointer;
    }
    if buffer_len < 5usize.saturating_mul(num_points) {
        return SqkStatus::BufferTooSmall;
    }
    guarded(|| {
        let grid = if log_grid != 0 {
            GridKind::Logarithmic
        } else {
            GridKind::Linear
        };
        let rows = TfdConfig::new(beta, omega_min, omega_max, num_points, grid)
            .and_then(|config| tfd_spectrum(&config));
        match rows {
            Ok(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    let base = 5 * i;
                    unsafe {
                        *buffer.add(base) = row.omega;
                        *buffer.add(base + 1) = row.alpha;
                        *buffer.add(base + 2) = row.r;
                        *buffer.add(base + 3) = row.mean_occupation;
                        *buffer.add(base + 4) = row.thermal_residual;
                    }
                }
                SqkStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Scan the cyclic system over the given cutoffs and classify it.
///
/// `alphas` holds `2 * num_modes` doubles (re/im interleaved). On success
/// `sigma_min_out` (length `cutoffs_len`, may be NULL) receives the smallest
/// singular value at each cutoff and `kernel_dim_out` (may be NULL) the
/// final kernel dimension.
///
/// # Safety
/// All non-NULL pointers must reference buffers of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn sqk_nogo_classify(
    num_modes: usize,
    alphas: *const f64,
    alphas_len: usize,
    cutoffs: *const usize,
    cutoffs_len: usize,
    tolerance: f64,
    verdict_out: *mut SqkVerdict,
    sigma_min_out: *mut f64,
    kernel_dim_out: *mut usize,
) -> SqkStatus {
    if alphas.is_null() || cutoffs.is_null() || verdict_out.is_null() {
        return SqkStatus::NullPointer;
    }
    if alphas_len != 2 * num_modes {
        return SqkStatus::InvalidArgument;
    }
    guarded(|| {
        let couplings: Vec<Complex64> = (0..num_modes)
            .map(|i| unsafe { Complex64::new(*alphas.add(2 * i), *alphas.add(2 * i + 1)) })
            .collect();
        let cutoff_list: Vec<usize> =
            (0..cutoffs_len).map(|i| unsafe { *cutoffs.add(i) }).collect();
        let reports = match cutoff_scan(
            num_modes,
            &couplings,
            &cutoff_list,
            tolerance,
            &MemoryBudget::default(),
        ) {
            Ok(r) => r,
            Err(e) => return status_of(&e),
        };
        let verdict = classify(&reports, &couplings);
        unsafe {
            *verdict_out = match verdict.kind {
                VerdictKind::UniqueSqueezedState => SqkVerdict::UniqueSqueezedState,
                VerdictKind::VacuumOnly => SqkVerdict::VacuumOnly,
                VerdictKind::NoSolution => SqkVerdict::NoSolution,
                VerdictKind::Inconclusive => SqkVerdict::Inconclusive,
            };
        }
        if !sigma_min_out.is_null() {
            for (i, report) in reports.iter().enumerate() {
                unsafe { *sigma_min_out.add(i) = report.sigma_min };
            }
        }
        if !kernel_dim_out.is_null() {
            unsafe { *kernel_dim_out = reports.last().map_or(0, |r| r.kernel_dim) };
        }
        SqkStatus::Ok
    })
}
