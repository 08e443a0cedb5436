//! Closed-form transmit power for a fixed phase matrix.
//!
//! The secrecy rate grows with `P_s` exactly when the SU's normalized gain
//! beats Eve's; the best power is then the largest one allowed by the
//! interference limit and the power budget. Otherwise the transmitter stays
//! silent.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::metrics::{EffectiveGains, PowerConfig};
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerBranch {
    Transmit,
    Silent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDecision {
    pub p_star: f64,
    pub branch: PowerBranch,
    /// `|hᵀΦw|² / (σ_s² + |f_s|² Q_p)`.
    pub normalized_gain_su: f64,
    /// `|h_eᵀΦw|² / (σ_e² + |f_e|² Q_p)`.
    pub normalized_gain_eve: f64,
}

impl PowerDecision {
    pub fn is_silent(&self) -> bool {
        self.branch == PowerBranch::Silent
    }
}

pub fn optimal_power(channels: &ChannelSet, phi: &CMatrix, powers: &PowerConfig) -> PowerDecision {
    decide(&EffectiveGains::from_phase(channels, phi), channels, powers)
}

pub(crate) fn decide(gains: &EffectiveGains, channels: &ChannelSet, powers: &PowerConfig) -> PowerDecision {
    let normalized_gain_su = gains.a_s.norm_sqr() / powers.su_disturbance(channels);
    let normalized_gain_eve = gains.a_e.norm_sqr() / powers.eve_disturbance(channels);
    // Equal gains give zero secrecy at any power; stay silent.
    if normalized_gain_su > normalized_gain_eve {
        let g_gain = gains.a_g.norm_sqr();
        let p_star = if g_gain > 0.0 {
            (powers.i_th / g_gain).min(powers.p_max)
        } else {
            powers.p_max
        };
        PowerDecision {
            p_star,
            branch: PowerBranch::Transmit,
            normalized_gain_su,
            normalized_gain_eve,
        }
    } else {
        PowerDecision {
            p_star: 0.0,
            branch: PowerBranch::Silent,
            normalized_gain_su,
            normalized_gain_eve,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::link_metrics;
    use crate::{C64, CVector};

    fn scalar_channels(h_s: f64, h_e: f64, g: f64) -> ChannelSet {
        let v = |x: f64| CVector::from_element(1, C64::new(x, 0.0));
        ChannelSet::new(v(h_s), v(h_e), v(g), C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap()
    }

    fn unit_noise() -> PowerConfig {
        PowerConfig {
            p_max: 1.0,
            q_p: 1.0,
            sigma_s_sq: 1.0,
            sigma_e_sq: 1.0,
            i_th: 1e-5,
        }
    }

    #[test]
    fn eve_dominant_is_silent() {
        let d = optimal_power(&scalar_channels(0.1, 0.2, 0.1), &CMatrix::identity(1, 1), &unit_noise());
        assert_eq!(d.branch, PowerBranch::Silent);
        assert_eq!(d.p_star, 0.0);
    }

    #[test]
    fn interference_limited_example() {
        // |g|² = 1e-3, I_th = 1e-5 → min(0.01, 1).
        let ch = scalar_channels(1.0, 0.1, 1e-3f64.sqrt());
        let d = optimal_power(&ch, &CMatrix::identity(1, 1), &unit_noise());
        assert_eq!(d.branch, PowerBranch::Transmit);
        assert!((d.p_star - 0.01).abs() < 1e-15);
        let m = link_metrics(&ch, &CMatrix::identity(1, 1), d.p_star, &unit_noise());
        assert!(m.interference_at_pu <= 1e-5 * (1.0 + 1e-9));
    }

    #[test]
    fn budget_limited_when_interference_is_weak() {
        let d = optimal_power(&scalar_channels(1.0, 0.1, 1e-6), &CMatrix::identity(1, 1), &unit_noise());
        assert_eq!(d.p_star, 1.0);
    }

    #[test]
    fn tie_is_silent() {
        let d = optimal_power(&scalar_channels(0.3, 0.3, 0.1), &CMatrix::identity(1, 1), &unit_noise());
        assert_eq!(d.branch, PowerBranch::Silent);
    }

    #[test]
    fn zero_primary_gain_uses_full_budget() {
        let d = optimal_power(&scalar_channels(1.0, 0.1, 0.0), &CMatrix::identity(1, 1), &unit_noise());
        assert_eq!((d.branch, d.p_star), (PowerBranch::Transmit, 1.0));
    }
}
