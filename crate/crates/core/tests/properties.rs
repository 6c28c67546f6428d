use cvqkd_attack::analysis::{v_be_closed_form, v_be_general};
use cvqkd_attack::attack::{attack_residuals, solve_general, AttackTarget};
use cvqkd_attack::coupler::{CouplerModel, InversionOptions, WavelengthBand};
use cvqkd_attack::homodyne::{
    balanced_output, one_port_split, two_port_shot_noise_variance, unbalanced_difference,
};
use cvqkd_attack::units::QuadraturePair;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn transmittance_bounded(f in 0.1f64..=1.0, c in 0.05f64..2.0, w in 0.1f64..3.0, lambda in 0.01f64..5.0) {
        let m = CouplerModel::new(f, c, w).unwrap();
        let t = m.transmittance(lambda).unwrap();
        prop_assert!(t >= 0.0 && t <= f * f + 1e-15);
    }

    #[test]
    fn inversion_round_trip(lambda0 in 0.8f64..2.4) {
        let m = CouplerModel::<f64>::telecom_default();
        let band = WavelengthBand::default();
        let t = m.transmittance(lambda0).unwrap();
        let roots = m.invert_transmittance(t, &band, &InversionOptions::default()).unwrap();
        prop_assert!(roots.iter().any(|r| (r - lambda0).abs() < 1e-7), "{lambda0}: {roots:?}");
        for r in &roots {
            prop_assert!((m.transmittance(*r).unwrap() - t).abs() < 1e-9);
        }
        prop_assert!(roots.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn inversion_round_trip_oscillating_model(lambda0 in 0.5f64..4.0, f in 0.5f64..=1.0) {
        let m = CouplerModel::new(f, 0.35, 1.2).unwrap();
        let band = WavelengthBand::new(0.5, 4.0).unwrap();
        let t = m.transmittance(lambda0).unwrap();
        let roots = m.invert_transmittance(t, &band, &InversionOptions::default()).unwrap();
        prop_assert!(roots.iter().any(|r| (r - lambda0).abs() < 1e-7), "{lambda0}: {roots:?}");
    }

    #[test]
    fn unbalanced_reduces_to_balanced(lo in 1.0f64..1e9, x in -50.0f64..50.0, p in -50.0f64..50.0, theta in -3.2f64..3.2, s in 0.0f64..1e3) {
        let xt = balanced_output(lo, QuadraturePair::new(x, p), theta);
        let u = unbalanced_difference(0.5, xt, s, lo);
        prop_assert!((u - xt).abs() <= 1e-12 * xt.abs().max(1.0));
    }

    #[test]
    fn shot_noise_symmetric(t in 0.0f64..=1.0) {
        let a = two_port_shot_noise_variance(t).unwrap();
        let b = two_port_shot_noise_variance(1.0 - t).unwrap();
        prop_assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn one_port_ports_anticorrelated(t in 0.0f64..=1.0, lo in 1.0f64..1e9, z in -6.0f64..6.0) {
        let ports = one_port_split(t, lo, z);
        let d1 = ports.i1 - t * lo;
        let d2 = ports.i2 - (1.0 - t) * lo;
        prop_assert!((d1 + d2).abs() <= 1e-15 * lo * 8.0);
        prop_assert!((ports.total() - lo).abs() <= 1e-15 * lo * 8.0);
    }

    #[test]
    fn general_solver_valid_in_every_quadrant(x in -60.0f64..60.0, p in -60.0f64..60.0, eta in 0.0f64..=1.0) {
        let target = AttackTarget::new(QuadraturePair::new(x, p), eta, 1e4);
        let sol = solve_general(&target, 1e8, None).unwrap();
        prop_assert!(sol.t1 >= 0.0 && sol.t1 <= 1.0);
        prop_assert!(sol.t2 >= 0.0 && sol.t2 <= 1.0);
        prop_assert!(sol.signal_intensity >= 0.0 && sol.lo_intensity > 0.0);
        let (rx, rp) = attack_residuals(&sol, &target);
        let scale = target.residual_scale();
        prop_assert!(rx.abs() < 1e-9 * scale && rp.abs() < 1e-9 * scale);
    }

    #[test]
    fn balanced_solution_preferred_when_weak(x in 0.5f64..20.0, frac in 0.0f64..0.5) {
        // here I_S at T2 = 1/2 stays below 0.01 I_LO, so the balanced split wins
        let target = AttackTarget::new(QuadraturePair::new(x, frac * x), 0.6, 1e4);
        let sol = solve_general(&target, 1e8, None).unwrap();
        prop_assert!(sol.is_weak_signal());
        prop_assert_eq!(sol.t2, 0.5);
    }

    #[test]
    fn term_split_sums(t2 in 0.0f64..=1.0) {
        let cv = v_be_closed_form(t2).unwrap();
        prop_assert!((cv.first_term + cv.second_term - cv.v_be).abs() <= 1e-15);
        prop_assert!(cv.first_term <= 0.125 + 1e-15);
    }

    #[test]
    fn general_scales_linearly_in_lo(t2 in 0.0f64..=1.0, t1 in 0.0f64..=1.0, k in 0.01f64..1.0) {
        let full = v_be_general(t1, t2, 0.0, 1e8, 1e8).unwrap();
        let part = v_be_general(t1, t2, 0.0, k * 1e8, 1e8).unwrap();
        prop_assert!((part - k * full).abs() <= 1e-12);
    }
}
