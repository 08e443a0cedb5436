//! End-to-end checks at reduced scale; the full-size versions live in the
//! acceptance target.

use bdris::alternating::{solve, AoConfig, SolveStatus};
use bdris::channel::{draw_channel_set, draw_rician_vector, steering_vector, ArrayGeometry, LinkGeometry};
use bdris::manifold::{haar_unitary, project_to_tangent, retract};
use bdris::metrics::{link_metrics, PowerConfig};
use bdris::montecarlo::{run_trial_with_seed, Method, ScenarioConfig};
use bdris::power::optimal_power;
use bdris::{C64, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn rician_power_matches_path_gain() {
    let geom = ArrayGeometry::half_wavelength(2, 4, 2e9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [0.0, 3.0] {
        let link = LinkGeometry::new(50.0, k, 2.0, 0.4, 1.1).unwrap();
        let n = 20_000;
        let total: f64 = (0..n).map(|_| draw_rician_vector(&link, &geom, &mut rng).unwrap().norm_squared()).sum();
        let per_element = total / (n * 8) as f64;
        assert!((per_element / link.path_gain() - 1.0).abs() < 0.03, "K={k}: {per_element}");
    }
}

#[test]
fn huge_k_is_deterministic_los() {
    let geom = ArrayGeometry::half_wavelength(2, 2, 2e9).unwrap();
    let link = LinkGeometry::new(10.0, 1e12, 1.0, 0.3, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let los = steering_vector(&geom, 0.3, 0.2).unwrap() * C64::new(0.1, 0.0);
    let h = draw_rician_vector(&link, &geom, &mut rng).unwrap();
    assert!((h - los).norm() < 1e-9);
}

#[test]
fn closed_form_power_beats_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let config = ScenarioConfig::default().with_elements(4).unwrap();
    let pw = PowerConfig::default();
    for _ in 0..50 {
        let ch = draw_channel_set(&config, &mut rng).unwrap();
        let phi = haar_unitary(4, &mut rng);
        let p = optimal_power(&ch, &phi, &pw).p_star;
        let best = (0..=500)
            .map(|i| pw.p_max * i as f64 / 500.0)
            .map(|q| link_metrics(&ch, &phi, q, &pw))
            .filter(|r| r.interference_at_pu <= pw.i_th)
            .map(|r| r.secrecy_rate)
            .fold(0.0, f64::max);
        assert!(link_metrics(&ch, &phi, p, &pw).secrecy_rate + 1e-12 >= best);
    }
}

#[test]
fn long_retraction_chain_stays_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut phi = haar_unitary(6, &mut rng);
    for _ in 0..2000 {
        let g = CMatrix::from_fn(6, 6, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        phi = retract(&phi, &project_to_tangent(&phi, &g), 1.5).unwrap();
    }
    assert!(phi.unitarity_error() < 1e-9);
}

#[test]
fn alternating_trace_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let config = ScenarioConfig::default().with_elements(8).unwrap();
    for _ in 0..10 {
        let ch = draw_channel_set(&config, &mut rng).unwrap();
        let sol = solve(&ch, &config.powers, &AoConfig::default(), &mut rng).unwrap();
        let mut prev = sol.trace.initial_secrecy;
        for r in &sol.trace.records {
            assert!(r.secrecy_rate + 1e-9 >= prev);
            assert!(r.interference_slack >= -1e-12 * config.powers.i_th);
            prev = r.secrecy_rate;
        }
        assert!(sol.trace.outer_iterations() <= 50);
    }
}

#[test]
fn methods_see_the_same_channels() {
    let config = ScenarioConfig::default().with_elements(4).unwrap();
    let seed = config.trial_seed(3);
    let a = run_trial_with_seed(&config, Method::Optimized, seed).unwrap();
    let b = run_trial_with_seed(&config, Method::RandomPhase, seed).unwrap();
    let c = run_trial_with_seed(&config, Method::DiagonalRis, seed).unwrap();
    assert_eq!(a.channels, b.channels);
    assert_eq!(a.channels, c.channels);
    if a.status != SolveStatus::Silent {
        assert!(a.metrics.secrecy_rate >= 0.0);
    }
}
