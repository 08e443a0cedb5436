//! Rician channel synthesis.
//!
//! Every vector link is modeled as
//!
//! ```text
//! h = sqrt(ĥ / d²) · ( sqrt(K/(K+1)) · h_LoS + sqrt(1/(K+1)) · h_NLoS )
//! ```
//!
//! where `h_LoS` is the Kronecker product of two uniform-linear-array
//! responses (one per surface axis) and `h_NLoS` has i.i.d. `CN(0, 1)` entries.
//! The primary-transmitter links to the SU and Eve are the single-element
//! specialization of the same model, with a LoS component equal to 1.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::montecarlo::ScenarioConfig;
use crate::{Error, Result, C64, CVector};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Rician factors at or above this value are treated as pure line of sight.
pub const LOS_ONLY_K: f64 = 1e12;

/// Planar layout of the surface: `m_x` elements per column, `m_y` per row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayGeometry {
    pub m_x: usize,
    pub m_y: usize,
    #[serde(rename = "carrier_frequency_hz")]
    pub carrier_frequency: f64,
    #[serde(rename = "element_spacing_m")]
    pub element_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(m_x: usize, m_y: usize, carrier_frequency: f64, element_spacing: f64) -> Result<Self> {
        let geom = ArrayGeometry {
            m_x,
            m_y,
            carrier_frequency,
            element_spacing,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Geometry with half-wavelength spacing, for which the phase increment is exactly π.
    pub fn half_wavelength(m_x: usize, m_y: usize, carrier_frequency: f64) -> Result<Self> {
        Self::new(m_x, m_y, carrier_frequency, SPEED_OF_LIGHT / (2.0 * carrier_frequency))
    }

    /// Near-square layout for `m` elements: `m_x` is the largest divisor of `m` not above √m.
    pub fn for_elements(m: usize, carrier_frequency: f64, element_spacing: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("array.elements", "must be positive"));
        }
        let mut m_x = (m as f64).sqrt().floor() as usize;
        while m_x > 1 && m % m_x != 0 {
            m_x -= 1;
        }
        let m_x = m_x.max(1);
        Self::new(m_x, m / m_x, carrier_frequency, element_spacing)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_x == 0 {
            return Err(Error::invalid("array.m_x", "must be positive"));
        }
        if self.m_y == 0 {
            return Err(Error::invalid("array.m_y", "must be positive"));
        }
        if !(self.carrier_frequency > 0.0 && self.carrier_frequency.is_finite()) {
            return Err(Error::invalid("array.carrier_frequency_hz", "must be positive and finite"));
        }
        if !(self.element_spacing > 0.0 && self.element_spacing.is_finite()) {
            return Err(Error::invalid("array.element_spacing_m", "must be positive and finite"));
        }
        Ok(())
    }

    /// Total element count `M = m_x · m_y`.
    pub fn elements(&self) -> usize {
        self.m_x * self.m_y
    }

    /// Inter-element phase increment δ = 2π f_c q / c.
    pub fn phase_increment(&self) -> f64 {
        2.0 * PI * self.carrier_frequency * self.element_spacing / SPEED_OF_LIGHT
    }
}

/// Resolved geometry of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance: f64,
    pub rician_k: f64,
    pub power_gain: f64,
    pub elevation: f64,
    pub azimuth: f64,
}

impl LinkGeometry {
    pub fn new(distance: f64, rician_k: f64, power_gain: f64, elevation: f64, azimuth: f64) -> Result<Self> {
        let link = LinkGeometry {
            distance,
            rician_k,
            power_gain,
            elevation,
            azimuth,
        };
        link.validate()?;
        Ok(link)
    }

    /// Link without a LoS direction (used for the single-element PT links).
    pub fn scalar(distance: f64, rician_k: f64, power_gain: f64) -> Result<Self> {
        Self::new(distance, rician_k, power_gain, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0 && self.distance.is_finite()) {
            return Err(Error::invalid("distance", "must be positive and finite"));
        }
        if !(self.power_gain > 0.0 && self.power_gain.is_finite()) {
            return Err(Error::invalid("power_gain", "must be positive and finite"));
        }
        if !(self.rician_k >= 0.0) {
            return Err(Error::invalid("rician_k", "must be non-negative"));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.elevation) {
            return Err(Error::invalid("elevation", "must lie in [0, π/2]"));
        }
        if !(0.0..2.0 * PI).contains(&self.azimuth) {
            return Err(Error::invalid("azimuth", "must lie in [0, 2π)"));
        }
        Ok(())
    }

    /// Mean path gain ĥ / d².
    pub fn path_gain(&self) -> f64 {
        self.power_gain / (self.distance * self.distance)
    }

    /// (LoS, NLoS) amplitude weights.
    fn mixing_weights(&self) -> (f64, f64) {
        let k = self.rician_k;
        if k >= LOS_ONLY_K || k.is_infinite() {
            (1.0, 0.0)
        } else {
            ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
        }
    }
}

/// Configured link: LoS angles are drawn per trial unless pinned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(rename = "distance_m")]
    pub distance: f64,
    pub rician_k: f64,
    pub power_gain: f64,
    #[serde(rename = "elevation_rad", skip_serializing_if = "Option::is_none", default)]
    pub elevation: Option<f64>,
    #[serde(rename = "azimuth_rad", skip_serializing_if = "Option::is_none", default)]
    pub azimuth: Option<f64>,
}

impl LinkConfig {
    pub fn new(distance: f64, rician_k: f64) -> Self {
        LinkConfig {
            distance,
            rician_k,
            power_gain: 1.0,
            elevation: None,
            azimuth: None,
        }
    }

    pub fn pinned(mut self, elevation: f64, azimuth: f64) -> Self {
        self.elevation = Some(elevation);
        self.azimuth = Some(azimuth);
        self
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let (el, az) = (self.elevation.unwrap_or(0.0), self.azimuth.unwrap_or(0.0));
        if !self.rician_k.is_finite() {
            return Err(Error::config(format!("{path}.rician_k"), "must be finite (use ≥ 1e12 for pure LoS)"));
        }
        LinkGeometry::new(self.distance, self.rician_k, self.power_gain, el, az)
            .map(|_| ())
            .map_err(|e| match e {
                Error::InvalidParameter { field, reason } => Error::config(format!("{path}.{field}"), reason),
                other => other,
            })
    }

    /// Resolves the angles, drawing θ ~ U[0, π/2] and φ ~ U[0, 2π) when not pinned.
    /// Both angles are always drawn so the stream position does not depend on pinning.
    pub fn resolve<R: Rng + ?Sized>(&self, rng: &mut R) -> LinkGeometry {
        let theta = rng.random::<f64>() * FRAC_PI_2;
        let phi = rng.random::<f64>() * 2.0 * PI;
        LinkGeometry {
            distance: self.distance,
            rician_k: self.rician_k,
            power_gain: self.power_gain,
            elevation: self.elevation.unwrap_or(theta),
            azimuth: self.azimuth.unwrap_or(phi),
        }
    }
}

/// The five links of the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSet {
    /// ST → SU (secondary transmitter to secondary user).
    pub st_su: LinkConfig,
    /// ST → Eve.
    pub st_eve: LinkConfig,
    /// ST → PU (interference link to the primary user).
    pub st_pu: LinkConfig,
    /// PT → SU (primary interference at the SU).
    pub pt_su: LinkConfig,
    /// PT → Eve.
    pub pt_eve: LinkConfig,
}

impl Default for LinkSet {
    fn default() -> Self {
        LinkSet {
            st_su: LinkConfig::new(100.0, 10.0),
            st_eve: LinkConfig::new(110.0, 10.0),
            st_pu: LinkConfig::new(110.0, 10.0),
            pt_su: LinkConfig::new(1000.0, 5.0),
            pt_eve: LinkConfig::new(800.0, 5.0),
        }
    }
}

impl LinkSet {
    pub fn validate(&self) -> Result<()> {
        self.st_su.validate("links.st_su")?;
        self.st_eve.validate("links.st_eve")?;
        self.st_pu.validate("links.st_pu")?;
        self.pt_su.validate("links.pt_su")?;
        self.pt_eve.validate("links.pt_eve")
    }
}

/// One realization of every channel in the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// ST → SU.
    pub h_s: CVector,
    /// ST → Eve.
    pub h_e: CVector,
    /// ST → PU.
    pub g: CVector,
    /// PT → SU.
    pub f_s: C64,
    /// PT → Eve.
    pub f_e: C64,
}

impl ChannelSet {
    pub fn new(h_s: CVector, h_e: CVector, g: CVector, f_s: C64, f_e: C64) -> Result<Self> {
        let m = h_s.len();
        for v in [&h_e, &g] {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: v.len(),
                });
            }
        }
        let finite = h_s.iter().chain(h_e.iter()).chain(g.iter()).chain([&f_s, &f_e]).all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::invalid("channels", "entries must be finite"));
        }
        Ok(ChannelSet { h_s, h_e, g, f_s, f_e })
    }

    /// Number of surface elements `M`.
    pub fn elements(&self) -> usize {
        self.h_s.len()
    }
}

/// Kronecker LoS response of the planar surface for the given angles.
pub fn steering_vector(geom: &ArrayGeometry, elevation: f64, azimuth: f64) -> Result<CVector> {
    geom.validate()?;
    let delta = geom.phase_increment();
    let step_x = delta * elevation.sin() * azimuth.cos();
    let step_y = delta * elevation.sin() * azimuth.sin();
    let x: Vec<C64> = (0..geom.m_x).map(|i| C64::from_polar(1.0, -step_x * i as f64)).collect();
    let y: Vec<C64> = (0..geom.m_y).map(|j| C64::from_polar(1.0, -step_y * j as f64)).collect();
    Ok(CVector::from_iterator(
        geom.elements(),
        x.iter().flat_map(|xi| y.iter().map(move |yj| xi * yj)),
    ))
}

/// Standard circularly-symmetric complex Gaussian sample, `CN(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn draw_rician_vector<R: Rng + ?Sized>(link: &LinkGeometry, geom: &ArrayGeometry, rng: &mut R) -> Result<CVector> {
    let los = steering_vector(geom, link.elevation, link.azimuth)?;
    let (w_los, w_nlos) = link.mixing_weights();
    let scale = link.path_gain().sqrt();
    Ok(los.map(|l| scale * (w_los * l + w_nlos * complex_gaussian(rng))))
}

pub fn draw_rician_scalar<R: Rng + ?Sized>(link: &LinkGeometry, rng: &mut R) -> C64 {
    let (w_los, w_nlos) = link.mixing_weights();
    let n = complex_gaussian(rng);
    link.path_gain().sqrt() * (C64::new(w_los, 0.0) + w_nlos * n)
}

/// Draws every link from the given array and link configuration.
///
/// Stream order: (angles, NLoS) for ST→SU, ST→Eve, ST→PU, then the PT→SU and
/// PT→Eve scalars.
pub fn draw_links<R: Rng + ?Sized>(array: &ArrayGeometry, links: &LinkSet, rng: &mut R) -> Result<ChannelSet> {
    let vector = |cfg: &LinkConfig, rng: &mut R| {
        let link = cfg.resolve(rng);
        draw_rician_vector(&link, array, rng)
    };
    let h_s = vector(&links.st_su, rng)?;
    let h_e = vector(&links.st_eve, rng)?;
    let g = vector(&links.st_pu, rng)?;
    let scalar = |cfg: &LinkConfig, rng: &mut R| {
        LinkGeometry::scalar(cfg.distance, cfg.rician_k, cfg.power_gain).map(|l| draw_rician_scalar(&l, rng))
    };
    let f_s = scalar(&links.pt_su, rng)?;
    let f_e = scalar(&links.pt_eve, rng)?;
    ChannelSet::new(h_s, h_e, g, f_s, f_e)
}

/// One independent realization of all five channels for a Monte Carlo trial.
pub fn draw_channel_set<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<ChannelSet> {
    draw_links(&config.array, &config.links, rng)
}
