//! Lagrangian of the phase subproblem and its Euclidean gradient.
//!
//! With `u = Φw` and `A_x = xᵀu`, the Lagrangian is
//!
//! ```text
//! L(Φ, λ) = log2(1 + γ_s) − log2(1 + γ_e) − λ (|A_g|² P_s − I_th)
//! ```
//!
//! and its gradient is the rank-one matrix `v wᴴ` with
//!
//! ```text
//! v = 2P_s/ln2 · ( h̄_s A_s / ((1+γ_s) D_s) − h̄_e A_e / ((1+γ_e) D_e) ) − 2λ P_s ḡ A_g
//! ```
//!
//! (`D_x` is the noise-plus-primary-interference term). It is the gradient for
//! the real inner product `Re tr(AᴴB)`: a perturbation `Δ` changes `L` by
//! `Re tr(∇ᴴ Δ)` to first order.

use std::f64::consts::LN_2;

use crate::channel::ChannelSet;
use crate::metrics::{combined_direction, combining_vector, EffectiveGains, PowerConfig};
use crate::{CMatrix, CVector};

use super::geometry::{project_to_tangent_with, Projection};

/// Gradient information at one point of the unitary group.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub euclidean: CMatrix,
    pub riemannian: CMatrix,
    pub lagrangian_value: f64,
    pub secrecy_value: f64,
}

pub(crate) fn lagrangian_from_gains(
    gains: &EffectiveGains,
    channels: &ChannelSet,
    p_s: f64,
    powers: &PowerConfig,
    lambda: f64,
) -> f64 {
    let m = gains.metrics(channels, p_s, powers);
    m.rate_gap() - lambda * (m.interference_at_pu - powers.i_th)
}

/// Unclamped rate gap minus the multiplier-weighted interference slack.
///
/// Accepts any square matrix so it can be probed off the manifold.
pub fn lagrangian(channels: &ChannelSet, phi: &CMatrix, p_s: f64, powers: &PowerConfig, lambda: f64) -> f64 {
    lagrangian_from_gains(&EffectiveGains::from_phase(channels, phi), channels, p_s, powers, lambda)
}

/// Left factor `v` of the rank-one gradient `v wᴴ`.
pub(crate) fn gradient_factor(
    gains: &EffectiveGains,
    channels: &ChannelSet,
    p_s: f64,
    powers: &PowerConfig,
    lambda: f64,
) -> CVector {
    let d_s = powers.su_disturbance(channels);
    let d_e = powers.eve_disturbance(channels);
    let gamma_s = gains.a_s.norm_sqr() * p_s / d_s;
    let gamma_e = gains.a_e.norm_sqr() * p_s / d_e;
    let scale = 2.0 * p_s / LN_2;
    let c_s = gains.a_s * (scale / ((1.0 + gamma_s) * d_s));
    let c_e = gains.a_e * (scale / ((1.0 + gamma_e) * d_e));
    let c_g = gains.a_g * (2.0 * lambda * p_s);
    CVector::from_iterator(
        channels.elements(),
        channels
            .h_s
            .iter()
            .zip(channels.h_e.iter())
            .zip(channels.g.iter())
            .map(|((hs, he), g)| hs.conj() * c_s - he.conj() * c_e - g.conj() * c_g),
    )
}

pub fn euclidean_gradient(channels: &ChannelSet, phi: &CMatrix, p_s: f64, powers: &PowerConfig, lambda: f64) -> CMatrix {
    let gains = EffectiveGains::from_phase(channels, phi);
    let v = gradient_factor(&gains, channels, p_s, powers, lambda);
    v * combining_vector(phi.ncols()).adjoint()
}

pub fn gradient_bundle(
    channels: &ChannelSet,
    phi: &CMatrix,
    p_s: f64,
    powers: &PowerConfig,
    lambda: f64,
    projection: Projection,
) -> GradientBundle {
    let u = combined_direction(phi);
    let gains = EffectiveGains::from_direction(channels, &u);
    let euclidean = gradient_factor(&gains, channels, p_s, powers, lambda) * combining_vector(phi.ncols()).adjoint();
    let riemannian = project_to_tangent_with(phi, &euclidean, projection);
    GradientBundle {
        euclidean,
        riemannian,
        lagrangian_value: lagrangian_from_gains(&gains, channels, p_s, powers, lambda),
        secrecy_value: gains.metrics(channels, p_s, powers).secrecy_rate,
    }
}

/// Real inner product `Re tr(AᴴB)`.
pub fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::haar_unitary;
    use crate::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn channels(m: usize, rng: &mut ChaCha8Rng, eve: bool) -> ChannelSet {
        let v = |s: f64, rng: &mut ChaCha8Rng| CVector::from_fn(m, |_, _| crate::channel::complex_gaussian(rng) * s);
        let h_s = v(0.01, rng);
        let h_e = if eve { v(0.009, rng) } else { CVector::zeros(m) };
        let g = v(0.009, rng);
        ChannelSet::new(h_s, h_e, g, C64::new(1e-3, 0.0), C64::new(1.2e-3, 0.0)).unwrap()
    }

    /// Central differences on the real and imaginary part of every entry.
    fn finite_difference(ch: &ChannelSet, phi: &CMatrix, p: f64, powers: &PowerConfig, lambda: f64) -> CMatrix {
        let h = 1e-6;
        let m = phi.nrows();
        CMatrix::from_fn(m, m, |i, j| {
            let probe = |delta: C64| {
                let mut q = phi.clone();
                q[(i, j)] += delta;
                lagrangian(ch, &q, p, powers, lambda)
            };
            let re = (probe(C64::new(h, 0.0)) - probe(C64::new(-h, 0.0))) / (2.0 * h);
            let im = (probe(C64::new(0.0, h)) - probe(C64::new(0.0, -h))) / (2.0 * h);
            C64::new(re, im)
        })
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let powers = PowerConfig::default();
        for _ in 0..20 {
            let ch = channels(4, &mut rng, true);
            let phi = haar_unitary(4, &mut rng);
            let p = rng.random_range(0.5..100.0);
            let lambda = rng.random_range(0.0..5.0);
            let analytic = euclidean_gradient(&ch, &phi, p, &powers, lambda);
            let numeric = finite_difference(&ch, &phi, p, &powers, lambda);
            let rel = (&analytic - &numeric).norm() / numeric.norm();
            assert!(rel < 1e-5, "relative error {rel}");
        }
    }

    #[test]
    fn zero_power_gives_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let ch = channels(5, &mut rng, true);
        let phi = haar_unitary(5, &mut rng);
        let g = euclidean_gradient(&ch, &phi, 0.0, &PowerConfig::default(), 3.0);
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn without_eve_and_multiplier_only_su_term_remains() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ch = channels(4, &mut rng, false);
        let phi = haar_unitary(4, &mut rng);
        let powers = PowerConfig::default();
        let p = 10.0;
        let g = euclidean_gradient(&ch, &phi, p, &powers, 0.0);
        let w = combining_vector(4);
        let a_s: C64 = ch.h_s.iter().zip((phi.as_matrix() * &w).iter()).map(|(a, b)| a * b).sum();
        let d_s = powers.su_disturbance(&ch);
        let gamma = a_s.norm_sqr() * p / d_s;
        let su_only = ch.h_s.map(|h| h.conj()) * (a_s * (2.0 * p / LN_2 / ((1.0 + gamma) * d_s))) * w.adjoint();
        assert!((&g - &su_only).norm() <= 1e-14 * su_only.norm());
    }

    #[test]
    fn lagrangian_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let ch = channels(4, &mut rng, true);
        let phi = haar_unitary(4, &mut rng);
        let powers = PowerConfig::default();
        let p = 3.0;
        let m = crate::metrics::link_metrics(&ch, &phi, p, &powers);
        assert_eq!(lagrangian(&ch, &phi, p, &powers, 0.0), m.rate_gap());

        // Active constraint: the penalty vanishes for every multiplier.
        let tight = PowerConfig { i_th: m.interference_at_pu, ..powers };
        for lambda in [0.0, 1.0, 1e6] {
            assert_eq!(lagrangian(&ch, &phi, p, &tight, lambda), m.rate_gap());
        }

        // Feasible by 1e-6 with λ = 1 adds 1e-6.
        let slack = PowerConfig { i_th: m.interference_at_pu + 1e-6, ..powers };
        let l = lagrangian(&ch, &phi, p, &slack, 1.0);
        assert!((l - (m.rate_gap() + 1e-6)).abs() < 1e-15);
    }
}
