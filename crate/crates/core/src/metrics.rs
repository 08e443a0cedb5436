//! Link-level figures of merit for a given phase matrix and transmit power.
//!
//! Each single-antenna receiver sees the surface through the scalar effective
//! channel `hᵀ Φ w`, where `w = (1, …, 1)ᵀ / √M` is the fixed combining
//! direction of the transmissive surface. The full row norm `‖hᵀΦ‖²` is also
//! available as [`row_gain`], but it is invariant under every unitary `Φ` and
//! therefore cannot drive a phase design.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::{Error, Result, C64, CMatrix, CVector};

/// Unitarity tolerance enforced on every [`PhaseShiftMatrix`].
pub const UNITARY_TOLERANCE: f64 = 1e-8;

/// Frobenius norm of `Φ Φᴴ − I`.
pub fn unitarity_error(phi: &CMatrix) -> f64 {
    let n = phi.nrows();
    if phi.ncols() != n {
        return f64::INFINITY;
    }
    (phi * phi.adjoint() - CMatrix::identity(n, n)).norm()
}

/// The M×M unitary response of the BD-RIS.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftMatrix(CMatrix);

impl PhaseShiftMatrix {
    pub fn new(phi: CMatrix) -> Result<Self> {
        let error = unitarity_error(&phi);
        if !(error <= UNITARY_TOLERANCE) {
            return Err(Error::NotUnitary { error });
        }
        Ok(PhaseShiftMatrix(phi))
    }

    pub fn identity(m: usize) -> Self {
        PhaseShiftMatrix(CMatrix::identity(m, m))
    }

    /// Diagonal matrix of unit-modulus entries `e^{jθ_i}`.
    pub fn diagonal(phases: &[f64]) -> Self {
        let d = CVector::from_iterator(phases.len(), phases.iter().map(|&t| C64::from_polar(1.0, t)));
        PhaseShiftMatrix(CMatrix::from_diagonal(&d))
    }

    pub(crate) fn from_unchecked(phi: CMatrix) -> Self {
        debug_assert!(unitarity_error(&phi) <= UNITARY_TOLERANCE);
        PhaseShiftMatrix(phi)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.0)
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }
}

impl Deref for PhaseShiftMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// Powers and noise levels, all in linear mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    #[serde(rename = "p_max_mw")]
    pub p_max: f64,
    #[serde(rename = "q_p_mw")]
    pub q_p: f64,
    #[serde(rename = "sigma_s_sq_mw")]
    pub sigma_s_sq: f64,
    #[serde(rename = "sigma_e_sq_mw")]
    pub sigma_e_sq: f64,
    #[serde(rename = "i_th_mw")]
    pub i_th: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            p_max: crate::dbm_to_mw(20.0),
            q_p: crate::dbm_to_mw(40.0),
            sigma_s_sq: 1e-4,
            sigma_e_sq: 1e-4,
            i_th: 1e-5,
        }
    }
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("powers.p_max", self.p_max),
            ("powers.q_p", self.q_p),
            ("powers.sigma_s_sq", self.sigma_s_sq),
            ("powers.sigma_e_sq", self.sigma_e_sq),
            ("powers.i_th", self.i_th),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(name, format!("must be positive and finite, got {value}")));
            }
        }
        Ok(())
    }

    /// Noise plus primary interference at the SU, `σ_s² + |f_s|² Q_p`.
    pub fn su_disturbance(&self, channels: &ChannelSet) -> f64 {
        self.sigma_s_sq + channels.f_s.norm_sqr() * self.q_p
    }

    /// Noise plus primary interference at Eve, `σ_e² + |f_e|² Q_p`.
    pub fn eve_disturbance(&self, channels: &ChannelSet) -> f64 {
        self.sigma_e_sq + channels.f_e.norm_sqr() * self.q_p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub gamma_s: f64,
    pub gamma_e: f64,
    pub rate_s: f64,
    pub rate_e: f64,
    pub secrecy_rate: f64,
    pub interference_at_pu: f64,
}

impl LinkMetrics {
    /// Rate difference before the `[·]⁺` clamp.
    pub fn rate_gap(&self) -> f64 {
        self.rate_s - self.rate_e
    }
}

/// Uniform combining direction `w = 1/√M · (1, …, 1)ᵀ`.
pub fn combining_vector(m: usize) -> CVector {
    CVector::from_element(m, C64::new(1.0 / (m as f64).sqrt(), 0.0))
}

/// Image of the combining vector, `u = Φ w`.
pub(crate) fn combined_direction(phi: &CMatrix) -> CVector {
    let m = phi.ncols();
    let scale = 1.0 / (m as f64).sqrt();
    CVector::from_iterator(phi.nrows(), phi.row_iter().map(|r| r.sum() * scale))
}

/// Scalar `hᵀ u`.
pub(crate) fn project(h: &CVector, u: &CVector) -> C64 {
    h.iter().zip(u.iter()).map(|(a, b)| a * b).sum()
}

fn check_dims(h: &CVector, phi: &CMatrix) -> Result<()> {
    if phi.nrows() != phi.ncols() {
        return Err(Error::DimensionMismatch {
            expected: phi.nrows(),
            actual: phi.ncols(),
        });
    }
    if h.len() != phi.nrows() {
        return Err(Error::DimensionMismatch {
            expected: phi.nrows(),
            actual: h.len(),
        });
    }
    Ok(())
}

/// Effective scalar channel `hᵀ Φ w`.
pub fn effective_amplitude(h: &CVector, phi: &CMatrix) -> Result<C64> {
    check_dims(h, phi)?;
    Ok(project(h, &combined_direction(phi)))
}

/// Effective power gain `|hᵀ Φ w|²`.
pub fn effective_gain(h: &CVector, phi: &CMatrix) -> Result<f64> {
    effective_amplitude(h, phi).map(|a| a.norm_sqr())
}

/// Full row norm `‖hᵀ Φ‖²`; equals `‖h‖²` for every unitary `Φ`.
pub fn row_gain(h: &CVector, phi: &CMatrix) -> Result<f64> {
    check_dims(h, phi)?;
    Ok((h.transpose() * phi).norm_squared())
}

/// Effective gains of the SU, Eve and PU links for one combined direction `u = Φw`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct EffectiveGains {
    pub a_s: C64,
    pub a_e: C64,
    pub a_g: C64,
}

impl EffectiveGains {
    pub fn from_direction(channels: &ChannelSet, u: &CVector) -> Self {
        EffectiveGains {
            a_s: project(&channels.h_s, u),
            a_e: project(&channels.h_e, u),
            a_g: project(&channels.g, u),
        }
    }

    pub fn from_phase(channels: &ChannelSet, phi: &CMatrix) -> Self {
        assert_eq!(channels.elements(), phi.nrows(), "channel and phase dimensions differ");
        Self::from_direction(channels, &combined_direction(phi))
    }

    pub fn metrics(&self, channels: &ChannelSet, p_s: f64, powers: &PowerConfig) -> LinkMetrics {
        let gamma_s = self.a_s.norm_sqr() * p_s / powers.su_disturbance(channels);
        let gamma_e = self.a_e.norm_sqr() * p_s / powers.eve_disturbance(channels);
        let rate_s = gamma_s.ln_1p() / std::f64::consts::LN_2;
        let rate_e = gamma_e.ln_1p() / std::f64::consts::LN_2;
        LinkMetrics {
            gamma_s,
            gamma_e,
            rate_s,
            rate_e,
            secrecy_rate: (rate_s - rate_e).max(0.0),
            interference_at_pu: self.a_g.norm_sqr() * p_s,
        }
    }
}

/// SINRs `(γ_s, γ_e)` of the SU and Eve.
pub fn sinr_pair(channels: &ChannelSet, phi: &CMatrix, p_s: f64, powers: &PowerConfig) -> (f64, f64) {
    let m = link_metrics(channels, phi, p_s, powers);
    (m.gamma_s, m.gamma_e)
}

pub fn link_metrics(channels: &ChannelSet, phi: &CMatrix, p_s: f64, powers: &PowerConfig) -> LinkMetrics {
    EffectiveGains::from_phase(channels, phi).metrics(channels, p_s, powers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_vector(m: usize, rng: &mut ChaCha8Rng) -> CVector {
        CVector::from_fn(m, |_, _| crate::channel::complex_gaussian(rng))
    }

    fn channels(m: usize, rng: &mut ChaCha8Rng) -> ChannelSet {
        ChannelSet::new(
            random_vector(m, rng) * c(0.01, 0.0),
            random_vector(m, rng) * c(0.009, 0.0),
            random_vector(m, rng) * c(0.009, 0.0),
            c(1e-3, 2e-4),
            c(-1e-3, 5e-4),
        )
        .unwrap()
    }

    #[test]
    fn row_gain_identity_and_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_vector(5, &mut rng);
        let g = row_gain(&h, &CMatrix::identity(5, 5)).unwrap();
        assert!((g - h.norm_squared()).abs() < 1e-12);

        let h = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let swap = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(row_gain(&h, &swap).unwrap(), 1.0);
    }

    #[test]
    fn row_gain_is_blind_to_unitary_phase() {
        // The reason the effective channel contracts with `w` instead of taking the row norm.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_vector(8, &mut rng);
        for _ in 0..20 {
            let phi = haar_unitary(8, &mut rng);
            assert!((row_gain(&h, &phi).unwrap() - h.norm_squared()).abs() < 1e-12 * h.norm_squared().max(1.0));
        }
        let a = effective_gain(&h, &haar_unitary(8, &mut rng)).unwrap();
        let b = effective_gain(&h, &haar_unitary(8, &mut rng)).unwrap();
        assert!((a - b).abs() > 1e-6);
    }

    #[test]
    fn effective_gain_examples() {
        let h = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let swap = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((effective_gain(&h, &swap).unwrap() - 0.5).abs() < 1e-15);
        // Identity: |Σ h_i|² / M.
        let h = CVector::from_vec(vec![c(1.0, 1.0), c(2.0, -1.0), c(0.5, 0.0)]);
        let expected = (c(3.5, 0.0)).norm_sqr() / 3.0;
        assert!((effective_gain(&h, &CMatrix::identity(3, 3)).unwrap() - expected).abs() < 1e-12);
        assert!(effective_gain(&h, &CMatrix::identity(2, 2)).is_err());
        assert!(effective_gain(&h, &CMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn unit_sinr_case() {
        let ch = ChannelSet::new(
            CVector::from_element(1, c(1.0, 0.0)),
            CVector::from_element(1, c(0.5, 0.0)),
            CVector::from_element(1, c(0.1, 0.0)),
            c(0.0, 0.0),
            c(0.0, 0.0),
        )
        .unwrap();
        let powers = PowerConfig {
            sigma_s_sq: 1.0,
            sigma_e_sq: 1.0,
            ..PowerConfig::default()
        };
        let (gs, ge) = sinr_pair(&ch, &CMatrix::identity(1, 1), 1.0, &powers);
        assert_eq!(gs, 1.0);
        assert_eq!(ge, 0.25);
        assert_eq!(sinr_pair(&ch, &CMatrix::identity(1, 1), 0.0, &powers), (0.0, 0.0));
    }

    #[test]
    fn doubling_primary_power_lowers_sinr() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = channels(4, &mut rng);
        let phi = haar_unitary(4, &mut rng);
        let p = PowerConfig::default();
        let louder = PowerConfig { q_p: 2.0 * p.q_p, ..p };
        assert!(sinr_pair(&ch, &phi, 1.0, &louder).0 < sinr_pair(&ch, &phi, 1.0, &p).0);
    }

    #[test]
    fn symmetric_links_have_zero_secrecy() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = random_vector(4, &mut rng);
        let ch = ChannelSet::new(h.clone(), h.clone(), h, c(1e-3, 0.0), c(1e-3, 0.0)).unwrap();
        let m = link_metrics(&ch, &haar_unitary(4, &mut rng), 50.0, &PowerConfig::default());
        assert_eq!(m.secrecy_rate, 0.0);
        assert!(m.gamma_s > 0.0);
    }

    #[test]
    fn exact_log_example() {
        // γ_s = 3, γ_e = 1 → log2(4) − log2(2) = 1.
        let ch = ChannelSet::new(
            CVector::from_element(1, c(3f64.sqrt(), 0.0)),
            CVector::from_element(1, c(1.0, 0.0)),
            CVector::from_element(1, c(1.0, 0.0)),
            c(0.0, 0.0),
            c(0.0, 0.0),
        )
        .unwrap();
        let powers = PowerConfig {
            sigma_s_sq: 1.0,
            sigma_e_sq: 1.0,
            ..PowerConfig::default()
        };
        let m = link_metrics(&ch, &CMatrix::identity(1, 1), 1.0, &powers);
        assert!((m.gamma_s - 3.0).abs() < 1e-14);
        assert!((m.secrecy_rate - 1.0).abs() < 1e-14);
        let z = link_metrics(&ch, &CMatrix::identity(1, 1), 0.0, &powers);
        assert_eq!((z.interference_at_pu, z.secrecy_rate), (0.0, 0.0));
    }

    #[test]
    fn interference_is_linear_in_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = channels(6, &mut rng);
        let phi = haar_unitary(6, &mut rng);
        let p = PowerConfig::default();
        for ps in [0.1, 1.7, 33.0] {
            let a = link_metrics(&ch, &phi, ps, &p).interference_at_pu;
            let b = link_metrics(&ch, &phi, 2.0 * ps, &p).interference_at_pu;
            assert_eq!(b, 2.0 * a);
        }
    }

    #[test]
    fn phase_matrix_rejects_non_unitary() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = c(1e-3, 0.0);
        assert!(matches!(PhaseShiftMatrix::new(m), Err(Error::NotUnitary { .. })));
        let d = PhaseShiftMatrix::diagonal(&[0.1, 2.0, -1.0]);
        assert!(d.unitarity_error() < 1e-15);
    }

    #[test]
    fn power_config_validation() {
        assert!(PowerConfig::default().validate().is_ok());
        let bad = PowerConfig { i_th: 0.0, ..PowerConfig::default() };
        assert!(bad.validate().is_err());
    }
}
