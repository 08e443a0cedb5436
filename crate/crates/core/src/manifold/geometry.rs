//! Geometry of the unitary group `U(M)`: tangent projection, exponential
//! retraction, polar re-projection and Haar sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_gaussian, ChannelSet};
use crate::metrics::{effective_gain, unitarity_error, PhaseShiftMatrix, PowerConfig};
use crate::{Error, Result, C64, CMatrix, CVector};

use super::expm::{expm, expm_skew_small};

/// Unitarity drift that triggers a polar re-projection.
pub const REPOLARIZE_THRESHOLD: f64 = 1e-10;

/// Relative skew defect tolerated in a tangent direction.
pub const TANGENT_TOLERANCE: f64 = 1e-8;

/// How a Euclidean gradient is mapped onto the tangent space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    /// Orthogonal projection `G − Φ sym(ΦᴴG)`.
    #[default]
    Canonical,
    /// `G − Φ Gᴴ Φ`. For square unitary `Φ` this is exactly twice the canonical projection.
    PaperLiteral,
}

impl Projection {
    pub(crate) fn scale(self) -> f64 {
        match self {
            Projection::Canonical => 1.0,
            Projection::PaperLiteral => 2.0,
        }
    }
}

fn skew(x: &CMatrix) -> CMatrix {
    (x - x.adjoint()) * C64::new(0.5, 0.0)
}

/// Canonical projection onto the tangent space at `phi`: `Φ skew(ΦᴴG)`.
pub fn project_to_tangent(phi: &PhaseShiftMatrix, euclidean_grad: &CMatrix) -> CMatrix {
    project_to_tangent_with(phi, euclidean_grad, Projection::Canonical)
}

pub fn project_to_tangent_with(phi: &CMatrix, euclidean_grad: &CMatrix, projection: Projection) -> CMatrix {
    match projection {
        Projection::Canonical => phi * skew(&(phi.adjoint() * euclidean_grad)),
        Projection::PaperLiteral => euclidean_grad - phi * euclidean_grad.adjoint() * phi,
    }
}

/// `‖ΦᴴT + (ΦᴴT)ᴴ‖_F`, zero exactly for tangent directions.
pub fn tangent_defect(phi: &CMatrix, tangent: &CMatrix) -> f64 {
    let x = phi.adjoint() * tangent;
    (&x + x.adjoint()).norm()
}

/// Nearest unitary matrix in Frobenius norm (`U Vᴴ` from the SVD).
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    u * v_t
}

pub(crate) fn repolarize_if_drifted(phi: CMatrix) -> CMatrix {
    if unitarity_error(&phi) > REPOLARIZE_THRESHOLD {
        polar_unitary(&phi)
    } else {
        phi
    }
}

/// `Φ exp(η ΦᴴT)`.
pub fn retract(phi: &PhaseShiftMatrix, tangent: &CMatrix, eta: f64) -> Result<PhaseShiftMatrix> {
    if tangent.shape() != phi.shape() {
        return Err(Error::DimensionMismatch {
            expected: phi.nrows(),
            actual: tangent.nrows(),
        });
    }
    let defect = tangent_defect(phi, tangent);
    if defect > TANGENT_TOLERANCE * (1.0 + tangent.norm()) {
        return Err(Error::NotTangent { defect });
    }
    if eta == 0.0 {
        return Ok(phi.clone());
    }
    let generator = skew(&(phi.adjoint() * tangent)) * C64::new(eta, 0.0);
    let next = repolarize_if_drifted(phi.as_matrix() * expm(&generator));
    PhaseShiftMatrix::new(next)
}

/// Caps the step at `I_th / (|gᵀΦw|² P_s)`.
pub fn clamp_step(eta: f64, channels: &ChannelSet, phi: &CMatrix, p_s: f64, powers: &PowerConfig) -> f64 {
    let interference = effective_gain(&channels.g, phi).unwrap_or(0.0) * p_s;
    clamp_for_interference(eta, interference, powers.i_th)
}

pub(crate) fn clamp_for_interference(eta: f64, interference: f64, i_th: f64) -> f64 {
    if interference > 0.0 {
        eta.min(i_th / interference)
    } else {
        eta
    }
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian matrix,
/// with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> PhaseShiftMatrix {
    let z = CMatrix::from_fn(m, m, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (k, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        col *= phase;
    }
    PhaseShiftMatrix::from_unchecked(repolarize_if_drifted(q))
}

/// Geodesic `η ↦ Φ exp(η X)` for the rank-two skew generator
/// `X = s/2 · (a wᴴ − w aᴴ)` produced by a rank-one gradient `G = v wᴴ`
/// (with `a = Φᴴv`).
///
/// `X` vanishes outside `span{w, a}`, so with an orthonormal basis `Q` of that
/// span, `exp(ηX) = I + Q (exp(η S) − I) Qᴴ` where `S = QᴴXQ` is at most 2×2.
pub(crate) struct RankTwoGeodesic {
    phi: CMatrix,
    basis: CMatrix,
    phi_basis: CMatrix,
    generator: CMatrix,
    /// `ΦᴴG` expressed in the basis.
    gradient_coords: CMatrix,
}

impl RankTwoGeodesic {
    pub fn new(phi: &CMatrix, a: &CVector, w: &CVector, scale: f64) -> Self {
        let m = phi.nrows();
        let along = w.dotc(a);
        let residual = a - w * along;
        let residual_norm = residual.norm();
        let basis = if residual_norm > 1e-14 * a.norm() && residual_norm > 0.0 {
            let mut q = CMatrix::zeros(m, 2);
            q.set_column(0, w);
            q.set_column(1, &(residual / C64::new(residual_norm, 0.0)));
            q
        } else {
            CMatrix::from_columns(&[w.clone()])
        };
        let r = basis.ncols();
        let coords = basis.adjoint() * a;
        let mut gradient_coords = CMatrix::zeros(r, r);
        gradient_coords.set_column(0, &coords);
        let generator = skew(&gradient_coords) * C64::new(scale, 0.0);
        RankTwoGeodesic {
            phi: phi.clone(),
            phi_basis: phi * &basis,
            basis,
            generator,
            gradient_coords,
        }
    }

    /// `‖T‖_F` for the tangent `T = ΦX`.
    pub fn tangent_norm(&self) -> f64 {
        self.generator.norm()
    }

    /// Directional derivative `Re⟨G, T⟩`.
    pub fn slope(&self) -> f64 {
        super::gradient::real_inner(&self.gradient_coords, &self.generator)
    }

    fn increment(&self, eta: f64) -> CMatrix {
        let r = self.generator.nrows();
        expm_skew_small(&(&self.generator * C64::new(eta, 0.0))) - CMatrix::identity(r, r)
    }

    /// `Φ exp(ηX) w`, given the current `u = Φw`.
    pub fn direction(&self, eta: f64, u: &CVector) -> CVector {
        u + &self.phi_basis * self.increment(eta).column(0)
    }

    pub fn point(&self, eta: f64) -> CMatrix {
        &self.phi + &self.phi_basis * self.increment(eta) * self.basis.adjoint()
    }

    #[cfg(test)]
    pub fn tangent(&self) -> CMatrix {
        &self.phi_basis * &self.generator * self.basis.adjoint()
    }
}
