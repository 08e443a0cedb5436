use bdris::alternating::{solve, AoConfig};
use bdris::channel::{draw_channel_set, ChannelSet};
use bdris::manifold::{haar_unitary, project_to_tangent, retract, tangent_defect};
use bdris::metrics::{link_metrics, sinr_pair, PhaseShiftMatrix, PowerConfig};
use bdris::montecarlo::ScenarioConfig;
use bdris::power::optimal_power;
use bdris::{dbm_to_mw, C64, CMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, m: usize) -> (ChannelSet, PhaseShiftMatrix, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = ScenarioConfig::default().with_elements(m).unwrap();
    let ch = draw_channel_set(&config, &mut rng).unwrap();
    let phi = haar_unitary(m, &mut rng);
    (ch, phi, rng)
}

fn powers(p_max_dbm: f64, i_th_dbm: f64) -> PowerConfig {
    PowerConfig {
        p_max: dbm_to_mw(p_max_dbm),
        i_th: dbm_to_mw(i_th_dbm),
        ..PowerConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sinr_scales_linearly_with_power(seed in any::<u64>(), m in 1usize..12, p in 1e-3f64..1e3, k in 0.1f64..10.0) {
        let (ch, phi, _) = instance(seed, m);
        let pw = PowerConfig::default();
        let (s1, e1) = sinr_pair(&ch, &phi, p, &pw);
        let (s2, e2) = sinr_pair(&ch, &phi, k * p, &pw);
        prop_assert!((s2 - k * s1).abs() <= 1e-9 * s2.abs().max(1e-300));
        prop_assert!((e2 - k * e1).abs() <= 1e-9 * e2.abs().max(1e-300));
    }

    #[test]
    fn secrecy_is_clamped_gap(seed in any::<u64>(), m in 1usize..12, p in 0.0f64..1e3) {
        let (ch, phi, _) = instance(seed, m);
        let r = link_metrics(&ch, &phi, p, &PowerConfig::default());
        prop_assert!(r.secrecy_rate >= 0.0);
        prop_assert_eq!(r.secrecy_rate, r.rate_gap().max(0.0));
    }

    #[test]
    fn projection_lands_in_tangent_space(seed in any::<u64>(), m in 1usize..10) {
        let (_, phi, mut rng) = instance(seed, m);
        let g = CMatrix::from_fn(m, m, |_, _| C64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)));
        let t = project_to_tangent(&phi, &g);
        prop_assert!(tangent_defect(&phi, &t) < 1e-10 * (1.0 + g.norm()));
        let again = project_to_tangent(&phi, &t);
        prop_assert!((&again - &t).norm() < 1e-10 * (1.0 + t.norm()));
    }

    #[test]
    fn retraction_stays_unitary(seed in any::<u64>(), m in 1usize..10, eta in 0.0f64..10.0) {
        let (_, phi, mut rng) = instance(seed, m);
        let g = CMatrix::from_fn(m, m, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let next = retract(&phi, &project_to_tangent(&phi, &g), eta).unwrap();
        prop_assert!(next.unitarity_error() < 1e-10);
    }

    #[test]
    fn power_decision_is_feasible(seed in any::<u64>(), m in 1usize..12, p_max in 0.0f64..40.0, i_th in -70.0f64..0.0) {
        let (ch, phi, _) = instance(seed, m);
        let pw = powers(p_max, i_th);
        let d = optimal_power(&ch, &phi, &pw);
        let r = link_metrics(&ch, &phi, d.p_star, &pw);
        prop_assert!(d.p_star >= 0.0 && d.p_star <= pw.p_max);
        prop_assert!(r.interference_at_pu <= pw.i_th * (1.0 + 1e-12));
        prop_assert_eq!(d.is_silent(), d.normalized_gain_su <= d.normalized_gain_eve);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn alternating_solution_is_feasible_and_unitary(seed in any::<u64>(), m in 2usize..10) {
        let (ch, _, mut rng) = instance(seed, m);
        let pw = PowerConfig::default();
        let sol = solve(&ch, &pw, &AoConfig::default(), &mut rng).unwrap();
        prop_assert!(sol.phi.unitarity_error() < 1e-8);
        prop_assert!(sol.metrics.interference_at_pu <= pw.i_th * (1.0 + 1e-9));
        prop_assert!(sol.metrics.secrecy_rate + 1e-9 >= sol.trace.initial_secrecy);
    }
}
