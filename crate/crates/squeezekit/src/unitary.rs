//! Unitary squeezing operators built by exponentiating anti-Hermitian
//! generators, the BCH-transform and commutator-identity checks, and the
//! sign registry connecting the unitary parameter `xi = r e^{i theta}` to
//! the annihilation-condition parameter `alpha`.
//!
//! Conventions:
//!   single mode: `S(xi) = exp((xi* a^2 - xi a^dag^2)/2)`,
//!                `alpha = -tanh(r) e^{i theta}`;
//!   two mode:    `T(xi) = exp(xi a^dag b^dag - xi* a b)`,
//!                `alpha = +tanh(r) e^{i theta}`.
//! The sign flip between the two is a consequence of the differing exponent
//! structures and is kept in one place, [`squeeze_sign`].

use num_complex::Complex64;

use crate::closed_form::{AlphaContext, SqueezeParamAlpha};
use crate::error::{Error, Result};
use crate::fock::{basis_dim, decode_index, FockOperator, FockState, LadderKind};
use crate::linalg::complex_gemm;

type C64 = Complex64;

/// Scaled-Taylor parameters: with `||B||_1 <= THETA` the truncation error of
/// the degree-`TERMS` Taylor polynomial is bounded by
/// `THETA^(TERMS+1) / ((TERMS+1)! (1 - THETA)) < 5e-20`,
/// and squaring a unitary factor does not amplify it.
const EXP_THETA: f64 = 0.5;
const EXP_TERMS: usize = 16;

/// Squeeze magnitude and phase, `xi = r e^{i theta}` with `r >= 0` and
/// `theta` normalized into `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParamXi {
    r: f64,
    theta: f64,
}

impl SqueezeParamXi {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "squeeze magnitude r must be finite and >= 0, got {r}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be finite".into()));
        }
        Ok(Self {
            r,
            theta: theta.rem_euclid(std::f64::consts::TAU),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn xi(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }
}

/// Sign relating `alpha` to `tanh(r) e^{i theta}` in each context.
pub fn squeeze_sign(context: AlphaContext) -> f64 {
    match context {
        AlphaContext::SingleMode => -1.0,
        AlphaContext::TwoMode => 1.0,
    }
}

/// `alpha = sign(context) tanh(r) e^{i theta}`.
pub fn alpha_from_xi(xi: &SqueezeParamXi, context: AlphaContext) -> Result<SqueezeParamAlpha> {
    let value = C64::from_polar(xi.r.tanh(), xi.theta) * squeeze_sign(context);
    SqueezeParamAlpha::new(value, context)
}

/// Inverse of [`alpha_from_xi`]; `theta` is taken as 0 when `r = 0`.
pub fn xi_from_alpha(alpha: &SqueezeParamAlpha) -> SqueezeParamXi {
    let r = alpha.abs().atanh();
    if r == 0.0 {
        return SqueezeParamXi { r: 0.0, theta: 0.0 };
    }
    let rotated = alpha.value() * squeeze_sign(alpha.context());
    let theta = rotated.im.atan2(rotated.re).rem_euclid(std::f64::consts::TAU);
    SqueezeParamXi { r, theta }
}

/// Anti-Hermitian generator `(xi* a^2 - xi a^dag^2)/2` on the square
/// cutoff-K truncation.
pub fn generator_single(xi: &SqueezeParamXi, cutoff: usize) -> Result<FockOperator> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall(
            "single-mode generator needs cutoff >= 2".into(),
        ));
    }
    let lower = FockOperator::ladder(1, cutoff, 1, LadderKind::Lower)?;
    let raise = FockOperator::ladder(1, cutoff, 1, LadderKind::Raise)?.restrict_codomain(cutoff)?;
    let a_sq = lower.compose(&lower)?;
    let adag_sq = raise.compose(&raise)?;
    let half = C64::new(0.5, 0.0);
    a_sq.scaled(xi.xi().conj() * half)
        .sub(&adag_sq.scaled(xi.xi() * half))
}

/// Anti-Hermitian generator `xi a^dag b^dag - xi* a b` on the square
/// two-mode cutoff-K truncation.
pub fn generator_two(xi: &SqueezeParamXi, cutoff: usize) -> Result<FockOperator> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall(
            "two-mode generator needs cutoff >= 2".into(),
        ));
    }
    let a = FockOperator::ladder(2, cutoff, 1, LadderKind::Lower)?;
    let b = FockOperator::ladder(2, cutoff, 2, LadderKind::Lower)?;
    let adag = FockOperator::ladder(2, cutoff, 1, LadderKind::Raise)?.restrict_codomain(cutoff)?;
    let bdag = FockOperator::ladder(2, cutoff, 2, LadderKind::Raise)?.restrict_codomain(cutoff)?;
    let ab = a.compose(&b)?;
    let adag_bdag = adag.compose(&bdag)?;
    adag_bdag.scaled(xi.xi()).sub(&ab.scaled(xi.xi().conj()))
}

fn scaling_steps(one_norm: f64) -> u32 {
    if one_norm <= EXP_THETA {
        0
    } else {
        (one_norm / EXP_THETA).log2().ceil() as u32
    }
}

/// `exp(G)` for a square generator by scaling and squaring with a Taylor
/// core (see [`EXP_THETA`] for the remainder bound). Sparse generators are
/// exponentiated column by column through the vector path, dense inputs by
/// repeated squaring of the dense Taylor polynomial.
pub fn matrix_exp(generator: &FockOperator) -> Result<FockOperator> {
    if !generator.is_square() {
        return Err(Error::NonSquare {
            nrows: generator.nrows(),
            ncols: generator.ncols(),
        });
    }
    let dim = generator.ncols();
    let num_modes = generator.num_modes();
    let cutoff = generator.domain_cutoff();
    if generator.is_sparse() {
        let mut columns = nalgebra::DMatrix::<C64>::zeros(dim, dim);
        let mut basis = vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            basis.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            basis[j] = C64::new(1.0, 0.0);
            let col = exp_apply_slice(generator, &basis);
            for i in 0..dim {
                columns[(i, j)] = col[i];
            }
        }
        FockOperator::from_dense(num_modes, cutoff, cutoff, columns)
    } else {
        let s = scaling_steps(generator.one_norm());
        let scale = C64::new((0.5f64).powi(s as i32), 0.0);
        let b = generator.to_dense() * scale;
        let eye = nalgebra::DMatrix::<C64>::identity(dim, dim);
        let mut sum = eye.clone();
        let mut term = eye;
        for k in 1..=EXP_TERMS {
            term = complex_gemm(&term, &b) * C64::new(1.0 / k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = complex_gemm(&sum, &sum);
        }
        FockOperator::from_dense(num_modes, cutoff, cutoff, sum)
    }
}

fn exp_apply_slice(generator: &FockOperator, x: &[C64]) -> Vec<C64> {
    let dim = x.len();
    let s = scaling_steps(generator.one_norm());
    let inv_scale = (0.5f64).powi(s as i32);
    let reps = 1u64 << s;
    let mut v = x.to_vec();
    let mut term = vec![C64::new(0.0, 0.0); dim];
    let mut next = vec![C64::new(0.0, 0.0); dim];
    for _ in 0..reps {
        term.copy_from_slice(&v);
        for k in 1..=EXP_TERMS {
            next.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            generator.apply_slice(&term, &mut next);
            let f = inv_scale / k as f64;
            for (t, n) in term.iter_mut().zip(&next) {
                *t = n * f;
            }
            for (acc, t) in v.iter_mut().zip(&term) {
                *acc += t;
            }
        }
    }
    v
}

/// `exp(G) |psi>` without materializing the exponential; same scaled-Taylor
/// error control as [`matrix_exp`].
pub fn exp_apply(generator: &FockOperator, state: &FockState) -> Result<FockState> {
    if !generator.is_square() {
        return Err(Error::NonSquare {
            nrows: generator.nrows(),
            ncols: generator.ncols(),
        });
    }
    if state.num_modes() != generator.num_modes() || state.cutoff() != generator.domain_cutoff() {
        return Err(Error::ShapeMismatch(format!(
            "generator acts on cutoff {} but state has cutoff {}",
            generator.domain_cutoff(),
            state.cutoff()
        )));
    }
    let out = exp_apply_slice(generator, state.amplitudes());
    FockState::from_amplitudes(state.num_modes(), state.cutoff(), out)
}

fn check_squeeze_cutoff(r: f64, cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall("squeeze needs cutoff >= 2".into()));
    }
    let tail = r.tanh().powi(cutoff as i32);
    if tail >= 1e-10 {
        return Err(Error::CutoffTooSmall(format!(
            "tanh(r)^cutoff = {tail:.3e} >= 1e-10; increase the cutoff for r = {r}"
        )));
    }
    Ok(())
}

/// `S(xi)|0>`: the single-mode squeezed vacuum via the unitary route.
pub fn squeeze_single(xi: &SqueezeParamXi, cutoff: usize) -> Result<FockState> {
    check_squeeze_cutoff(xi.r, cutoff)?;
    let generator = generator_single(xi, cutoff)?;
    exp_apply(&generator, &FockState::vacuum(1, cutoff)?)
}

/// `T(xi)|0,0>`: the two-mode squeezed vacuum via the unitary route.
pub fn squeeze_two(xi: &SqueezeParamXi, cutoff: usize) -> Result<FockState> {
    check_squeeze_cutoff(xi.r, cutoff)?;
    let generator = generator_two(xi, cutoff)?;
    exp_apply(&generator, &FockState::vacuum(2, cutoff)?)
}

fn window_max_norm(op: &FockOperator, window: usize) -> f64 {
    let dense = op.to_dense();
    let num_modes = op.num_modes();
    let keep: Vec<usize> = (0..dense.nrows())
        .filter(|&i| {
            decode_index(i, num_modes, op.codomain_cutoff())
                .iter()
                .sum::<usize>()
                <= window
        })
        .collect();
    debug_assert_eq!(basis_dim(num_modes, op.codomain_cutoff()), dense.ncols());
    let mut m = 0.0f64;
    for &i in &keep {
        for &j in &keep {
            m = m.max(dense[(i, j)].norm());
        }
    }
    m
}

/// Max-norm residual of the BCH transforms
/// `T a T^dag = cosh(r) a - e^{i theta} sinh(r) b^dag` (and the `b`
/// analogue), restricted to matrix elements between states whose total
/// occupation is at most `window`. Exponentials leak occupation near the
/// cutoff, so the comparison is only meaningful on that interior block.
pub fn bch_residual_two(xi: &SqueezeParamXi, cutoff: usize, window: usize) -> Result<f64> {
    let margin = (4.0 * xi.r).ceil() as usize;
    let limit = cutoff.saturating_sub(margin);
    if window > limit {
        return Err(Error::WindowTooLarge { window, limit });
    }
    let generator = generator_two(xi, cutoff)?;
    let t = matrix_exp(&generator)?;
    let t_dag = t.dagger();

    let a = FockOperator::ladder(2, cutoff, 1, LadderKind::Lower)?;
    let b = FockOperator::ladder(2, cutoff, 2, LadderKind::Lower)?;
    let a_dag = a.dagger();
    let b_dag = b.dagger();

    let cosh_r = C64::new(xi.r.cosh(), 0.0);
    let phase_sinh = C64::from_polar(xi.r.sinh(), xi.theta);

    let lhs_a = t.compose(&a)?.compose(&t_dag)?;
    let rhs_a = a.scaled(cosh_r).sub(&b_dag.scaled(phase_sinh))?;
    let res_a = window_max_norm(&lhs_a.sub(&rhs_a)?, window);

    let lhs_b = t.compose(&b)?.compose(&t_dag)?;
    let rhs_b = b.scaled(cosh_r).sub(&a_dag.scaled(phase_sinh))?;
    let res_b = window_max_norm(&lhs_b.sub(&rhs_b)?, window);

    Ok(res_a.max(res_b))
}

/// Max-norm residual of the commutator identity
/// `[a, exp(alpha a^dag^2 / 2)] = alpha a^dag exp(alpha a^dag^2 / 2)`
/// on the interior window, with the exponential built by direct series on
/// the truncated space (the series terminates: `a^dag^2` is nilpotent
/// there).
pub fn commutator_check_single(alpha: C64, cutoff: usize, window: usize) -> Result<f64> {
    let alpha_abs = alpha.norm();
    if alpha_abs >= 1.0 {
        return Err(Error::NonNormalizable { alpha_abs });
    }
    let limit = cutoff.saturating_sub(2);
    if window > limit {
        return Err(Error::WindowTooLarge { window, limit });
    }
    let lower = FockOperator::ladder(1, cutoff, 1, LadderKind::Lower)?;
    let raise = FockOperator::ladder(1, cutoff, 1, LadderKind::Raise)?.restrict_codomain(cutoff)?;
    let adag_sq = raise.compose(&raise)?.to_dense();

    let dim = cutoff + 1;
    let mut series = nalgebra::DMatrix::<C64>::identity(dim, dim);
    let mut term = nalgebra::DMatrix::<C64>::identity(dim, dim);
    let half_alpha = alpha * C64::new(0.5, 0.0);
    for k in 1..=cutoff / 2 + 1 {
        term = complex_gemm(&term, &adag_sq) * (half_alpha / k as f64);
        series += &term;
    }
    let e_op = FockOperator::from_dense(1, cutoff, cutoff, series)?;

    let lhs = lower.compose(&e_op)?.sub(&e_op.compose(&lower)?)?;
    let rhs = raise.compose(&e_op)?.scaled(alpha);
    Ok(window_max_norm(&lhs.sub(&rhs)?, window))
}
