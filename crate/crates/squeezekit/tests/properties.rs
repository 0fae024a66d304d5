//! Property-based invariants over randomized states and couplings.

use num_complex::Complex64;
use proptest::prelude::*;

use squeezekit::closed_form::{
    smsv_closed_form, smsv_tail_bound, tmsv_closed_form, tmsv_tail_bound, SqueezeParamAlpha,
};
use squeezekit::fock::{fidelity, inner, FockOperator, FockState, LadderKind};
use squeezekit::io::StateDoc;
use squeezekit::solver::constraint_residual;
use squeezekit::unitary::{alpha_from_xi, xi_from_alpha, SqueezeParamXi};

type C64 = Complex64;

fn complex_in_disk(max_abs: f64) -> impl Strategy<Value = C64> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(u, phi)| {
        C64::from_polar(max_abs * u.sqrt(), phi)
    })
}

fn arbitrary_state(num_modes: usize, cutoff: usize) -> impl Strategy<Value = FockState> {
    let dim = (cutoff + 1).pow(num_modes as u32);
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim).prop_filter_map(
        "state must be normalizable",
        move |raw| {
            let amps: Vec<C64> = raw.iter().map(|&(re, im)| C64::new(re, im)).collect();
            let state = FockState::from_amplitudes(num_modes, cutoff, amps).ok()?;
            state.normalized().ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_phase_invariant_and_symmetric(
        a in arbitrary_state(1, 6),
        b in arbitrary_state(1, 6),
        phi in 0.0..std::f64::consts::TAU,
    ) {
        let f_ab = fidelity(&a, &b).unwrap();
        let f_ba = fidelity(&b, &a).unwrap();
        prop_assert!((f_ab - f_ba).abs() < 1e-12);
        let rotated = a.scaled(C64::from_polar(1.0, phi));
        let f_rot = fidelity(&rotated, &b).unwrap();
        prop_assert!((f_ab - f_rot).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f_ab));
    }

    #[test]
    fn ladder_adjointness(
        psi in arbitrary_state(2, 4),
        phi in arbitrary_state(2, 4),
        mode in 1usize..=2,
    ) {
        // <a psi | phi> = <psi | a^dag phi> under the rectangular convention
        let lower = FockOperator::ladder(2, 4, mode, LadderKind::Lower).unwrap();
        let raise = FockOperator::ladder(2, 4, mode, LadderKind::Raise).unwrap();
        let lhs = inner(&lower.apply(&psi).unwrap(), &phi).unwrap();
        let rhs = inner(&psi.embed(5).unwrap(), &raise.apply(&phi).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_is_physical(state in arbitrary_state(2, 4), keep in 1usize..=2) {
        let rho = state.reduced_density(&[keep]).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() <= 1e-10);
        prop_assert!(rho.hermiticity_defect() <= 1e-12);
        let eigenvalues = rho.eigenvalues().unwrap();
        for ev in eigenvalues {
            prop_assert!(ev >= -1e-10, "negative eigenvalue {ev}");
        }
    }

    #[test]
    fn smsv_defining_condition_over_the_disk(alpha in complex_in_disk(0.9)) {
        let cutoff = 40;
        let param = SqueezeParamAlpha::single(alpha).unwrap();
        let state = smsv_closed_form(&param, cutoff).unwrap().state;
        let residual = constraint_residual(&state, 1, 1, alpha).unwrap();
        let bound = smsv_tail_bound(alpha.norm(), cutoff).max(1e-13);
        prop_assert!(residual <= bound, "residual {residual} > bound {bound}");
        // even-occupation support
        for occ in (1..cutoff).step_by(2) {
            prop_assert_eq!(state.amplitude(&[occ]).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn tmsv_defining_conditions_over_the_disk(alpha in complex_in_disk(0.8)) {
        let cutoff = 30;
        let param = SqueezeParamAlpha::two(alpha).unwrap();
        let state = tmsv_closed_form(&param, cutoff).unwrap().state;
        let bound = tmsv_tail_bound(alpha.norm(), cutoff).max(1e-13);
        let r1 = constraint_residual(&state, 1, 2, alpha).unwrap();
        let r2 = constraint_residual(&state, 2, 1, alpha).unwrap();
        prop_assert!(r1 <= bound && r2 <= bound, "residuals {r1}, {r2} > {bound}");
    }

    #[test]
    fn xi_alpha_round_trip(r in 0.0..2.0f64, theta in 0.0..std::f64::consts::TAU) {
        for context in [
            squeezekit::closed_form::AlphaContext::SingleMode,
            squeezekit::closed_form::AlphaContext::TwoMode,
        ] {
            let xi = SqueezeParamXi::new(r, theta).unwrap();
            let alpha = alpha_from_xi(&xi, context).unwrap();
            let back = xi_from_alpha(&alpha);
            prop_assert!((back.r() - r).abs() < 1e-10);
            if r > 1e-12 {
                prop_assert!((back.theta() - xi.theta()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn state_documents_round_trip_bit_exactly(state in arbitrary_state(2, 3)) {
        let doc = StateDoc::from_state(&state);
        let json = serde_json::to_string(&doc).unwrap();
        let back: StateDoc = serde_json::from_str(&json).unwrap();
        let restored = back.to_state().unwrap();
        for (a, b) in state.amplitudes().iter().zip(restored.amplitudes()) {
            prop_assert_eq!(a, b);
        }
    }
}
