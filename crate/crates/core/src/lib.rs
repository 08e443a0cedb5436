//! Physical-layer secrecy optimization for a cognitive-radio non-terrestrial
//! network whose secondary transmitter carries a fully-connected beyond-diagonal
//! RIS (BD-RIS).
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: Rician channel synthesis with Kronecker LoS steering vectors.
//! - [`metrics`]: SINR, rates, secrecy rate and interference at the primary user.
//! - [`power`]: closed-form switch-based transmit power for a fixed phase matrix.
//! - [`manifold`]: Riemannian ascent over unitary phase-shift matrices.
//! - [`alternating`]: the outer power/phase alternating optimization.
//! - [`montecarlo`]: seeded trials, baselines, sweeps and aggregation.
//! - [`config`] and [`cli`]: JSON scenario files and the command-line front end.
//! - [`verify`]: self-contained oracle suites used by `bdris verify`.

pub mod alternating;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod manifold;
pub mod metrics;
pub mod montecarlo;
pub mod power;
pub mod verify;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Converts a power in dBm to linear milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Converts a linear power in milliwatts to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversions() {
        assert_eq!(dbm_to_mw(30.0), 1000.0);
        assert_eq!(dbm_to_mw(0.0), 1.0);
        assert!((dbm_to_mw(-20.0) - 0.01).abs() < 1e-18);
        assert!((mw_to_dbm(100.0) - 20.0).abs() < 1e-12);
    }
}
