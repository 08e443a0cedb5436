//! Oracle suites behind `bdris verify`.
//!
//! Each suite checks the implementation against an independent computation:
//! finite differences for the gradient, `ΦΦᴴ = I` after retractions, a dense
//! grid search for the power switch, and the per-iteration trace of the
//! alternating optimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alternating::{solve, AoConfig};
use crate::channel::{complex_gaussian, draw_channel_set, ChannelSet};
use crate::manifold::{euclidean_gradient, haar_unitary, lagrangian, project_to_tangent, retract};
use crate::metrics::{effective_gain, link_metrics, PowerConfig};
use crate::montecarlo::ScenarioConfig;
use crate::power::optimal_power;
use crate::{Result, C64, CMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Worst observed value of the suite's figure of merit.
    pub worst: f64,
    pub threshold: f64,
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<18} cases={:<6} worst={:.3e} threshold={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.threshold
        )
    }
}

fn scenario_channels(m: usize, rng: &mut ChaCha8Rng) -> Result<ChannelSet> {
    let config = ScenarioConfig::default().with_elements(m)?;
    draw_channel_set(&config, rng)
}

/// Central differences of the Lagrangian in the real and imaginary part of each entry.
pub fn finite_difference_gradient(
    channels: &ChannelSet,
    phi: &CMatrix,
    p_s: f64,
    powers: &PowerConfig,
    lambda: f64,
    step: f64,
) -> CMatrix {
    let m = phi.nrows();
    let mut probe = phi.clone();
    CMatrix::from_fn(m, m, |i, j| {
        let mut at = |delta: C64| {
            let saved = probe[(i, j)];
            probe[(i, j)] = saved + delta;
            let value = lagrangian(channels, &probe, p_s, powers, lambda);
            probe[(i, j)] = saved;
            value
        };
        let re = (at(C64::new(step, 0.0)) - at(C64::new(-step, 0.0))) / (2.0 * step);
        let im = (at(C64::new(0.0, step)) - at(C64::new(0.0, -step))) / (2.0 * step);
        C64::new(re, im)
    })
}

pub fn gradient_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let powers = PowerConfig::default();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (m, count) in [(4, 100), (16, 20)] {
        let mut done = 0;
        while done < count {
            let ch = scenario_channels(m, &mut rng)?;
            let phi = haar_unitary(m, &mut rng);
            let p = rng.random_range(0.0..powers.p_max);
            let lambda = rng.random_range(0.0..10.0);
            if link_metrics(&ch, &phi, p, &powers).rate_gap().abs() < 1e-6 {
                continue;
            }
            let analytic = euclidean_gradient(&ch, &phi, p, &powers, lambda);
            let numeric = finite_difference_gradient(&ch, &phi, p, &powers, lambda, 1e-6);
            worst = worst.max((&analytic - &numeric).norm() / numeric.norm());
            done += 1;
        }
        cases += done;
    }
    Ok(SuiteReport {
        name: "gradient-fd",
        passed: worst < 1e-5,
        cases,
        worst,
        threshold: 1e-5,
    })
}

pub fn unitarity_suite(seed: u64, steps: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let sizes = [4, 8, 16];
    let mut phis: Vec<_> = sizes.iter().map(|&m| haar_unitary(m, &mut rng)).collect();
    for k in 0..steps {
        let slot = k % sizes.len();
        let m = sizes[slot];
        let g = CMatrix::from_fn(m, m, |_, _| complex_gaussian(&mut rng));
        let t = project_to_tangent(&phis[slot], &g);
        let eta = rng.random_range(0.0..2.0);
        phis[slot] = retract(&phis[slot], &t, eta)?;
        worst = worst.max(phis[slot].unitarity_error());
    }
    Ok(SuiteReport {
        name: "unitarity",
        passed: worst < 1e-8,
        cases: steps,
        worst,
        threshold: 1e-8,
    })
}

/// Shortfall of the closed-form power against the best point of a uniform grid
/// over the feasible interval, measured in grid steps.
pub fn power_suite(seed: u64, instances: usize, grid_points: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let m = [1, 4, 8][rng.random_range(0..3)];
        let ch = scenario_channels(m, &mut rng)?;
        let phi = haar_unitary(m, &mut rng);
        let powers = PowerConfig {
            p_max: crate::dbm_to_mw(rng.random_range(0.0..40.0)),
            i_th: crate::dbm_to_mw(rng.random_range(-60.0..-10.0)),
            ..PowerConfig::default()
        };
        let decision = optimal_power(&ch, &phi, &powers);
        let g_gain = effective_gain(&ch.g, &phi)?;
        let upper = if g_gain > 0.0 { (powers.i_th / g_gain).min(powers.p_max) } else { powers.p_max };
        let step = upper / (grid_points - 1) as f64;
        let secrecy = |p: f64| link_metrics(&ch, &phi, p, &powers).secrecy_rate;
        let (best_p, best) = (0..grid_points)
            .map(|i| {
                let p = i as f64 * step;
                (p, secrecy(p))
            })
            .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let closed = secrecy(decision.p_star);
        // Compare positions only when the grid sees a strictly positive optimum.
        let gap_steps = if best > 0.0 { (best_p - decision.p_star).abs() / step } else { 0.0 };
        let shortfall = if closed + 1e-12 >= best { 0.0 } else { f64::INFINITY };
        worst = worst.max(gap_steps).max(shortfall);
    }
    Ok(SuiteReport {
        name: "power-oracle",
        passed: worst <= 1.0,
        cases: instances,
        worst,
        threshold: 1.0,
    })
}

/// Largest per-iteration decrease of the recorded secrecy rate.
pub fn monotonicity_suite(seed: u64, instances: usize, m: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let powers = PowerConfig::default();
    let cfg = AoConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let ch = scenario_channels(m, &mut rng)?;
        let sol = solve(&ch, &powers, &cfg, &mut rng)?;
        let mut previous = sol.trace.initial_secrecy;
        for r in &sol.trace.records {
            worst = worst.max(previous - r.secrecy_rate);
            previous = r.secrecy_rate;
        }
    }
    Ok(SuiteReport {
        name: "ao-monotonicity",
        passed: worst <= 1e-9,
        cases: instances,
        worst,
        threshold: 1e-9,
    })
}

pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        gradient_suite(seed)?,
        unitarity_suite(seed.wrapping_add(1), 10_000)?,
        power_suite(seed.wrapping_add(2), 1000, 10_000)?,
        monotonicity_suite(seed.wrapping_add(3), 100, 8)?,
    ])
}
