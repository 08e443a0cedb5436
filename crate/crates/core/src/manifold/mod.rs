//! Riemannian ascent of the phase-subproblem Lagrangian over the unitary group.

mod expm;
mod geometry;
mod gradient;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::metrics::{combined_direction, combining_vector, EffectiveGains, PhaseShiftMatrix, PowerConfig};
use crate::{Error, Result, CMatrix, CVector};

pub use expm::expm;
pub use geometry::{
    clamp_step, haar_unitary, polar_unitary, project_to_tangent, project_to_tangent_with, retract, tangent_defect,
    Projection,
};
pub use gradient::{euclidean_gradient, gradient_bundle, lagrangian, real_inner, GradientBundle};

pub(crate) use geometry::{clamp_for_interference, repolarize_if_drifted, RankTwoGeodesic};
pub(crate) use gradient::{gradient_factor, lagrangian_from_gains};

/// Smallest step tried before the line search gives up.
pub const MIN_STEP: f64 = 1e-12;

/// Relative slack allowed on the interference limit when accepting a step.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

const UNITARITY_CHECK_PERIOD: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldOptConfig {
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub armijo_coefficient: f64,
    pub max_inner_iterations: usize,
    pub gradient_tolerance: f64,
    pub lambda_init: f64,
    pub dual_step_rho: f64,
    pub projection: Projection,
}

impl Default for ManifoldOptConfig {
    fn default() -> Self {
        ManifoldOptConfig {
            initial_step: 0.1,
            backtrack_factor: 0.5,
            armijo_coefficient: 1e-4,
            max_inner_iterations: 100,
            gradient_tolerance: 1e-5,
            lambda_init: 0.0,
            dual_step_rho: 0.0,
            projection: Projection::Canonical,
        }
    }
}

impl ManifoldOptConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |name: &str, x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(Error::config(format!("ao.manifold.{name}"), format!("must lie in (0, 1), got {x}")))
            }
        };
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::config("ao.manifold.initial_step", "must be positive and finite"));
        }
        open_unit("backtrack_factor", self.backtrack_factor)?;
        open_unit("armijo_coefficient", self.armijo_coefficient)?;
        if self.max_inner_iterations == 0 {
            return Err(Error::config("ao.manifold.max_inner_iterations", "must be at least 1"));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::config("ao.manifold.gradient_tolerance", "must be positive"));
        }
        if !(self.lambda_init >= 0.0 && self.lambda_init.is_finite()) {
            return Err(Error::config("ao.manifold.lambda_init", "must be non-negative"));
        }
        if !(self.dual_step_rho >= 0.0 && self.dual_step_rho.is_finite()) {
            return Err(Error::config("ao.manifold.dual_step_rho", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseStatus {
    Converged,
    MaxIterations,
    /// The step shrank below [`MIN_STEP`]; the last accepted iterate is kept.
    LineSearchFailed,
}

/// One accepted inner step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerRecord {
    pub lagrangian: f64,
    pub step: f64,
    pub gradient_norm: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutcome {
    pub phi: PhaseShiftMatrix,
    /// Lagrangian at the starting point.
    pub initial_lagrangian: f64,
    pub records: Vec<InnerRecord>,
    pub status: PhaseStatus,
    pub accepted_steps: usize,
    pub lambda: f64,
}

/// State shared by the full and the diagonal ascent loops.
pub(crate) struct StepContext<'a> {
    pub channels: &'a ChannelSet,
    pub p_s: f64,
    pub powers: &'a PowerConfig,
    pub cfg: &'a ManifoldOptConfig,
}

pub(crate) struct Accepted<T> {
    pub point: T,
    pub gains: EffectiveGains,
    pub lagrangian: f64,
    pub step: f64,
}

impl StepContext<'_> {
    pub fn interference(&self, gains: &EffectiveGains) -> f64 {
        gains.a_g.norm_sqr() * self.p_s
    }

    pub fn lagrangian(&self, gains: &EffectiveGains, lambda: f64) -> f64 {
        lagrangian_from_gains(gains, self.channels, self.p_s, self.powers, lambda)
    }

    /// Armijo backtracking from the clamped initial step. `candidate(η)`
    /// returns the trial point and its combined direction `Φw`.
    pub fn line_search<T>(
        &self,
        current: &EffectiveGains,
        lambda: f64,
        slope: f64,
        mut candidate: impl FnMut(f64) -> (T, CVector),
    ) -> Option<Accepted<T>> {
        let base = self.lagrangian(current, lambda);
        let limit = self.powers.i_th * (1.0 + FEASIBILITY_SLACK);
        let mut eta = clamp_for_interference(self.cfg.initial_step, self.interference(current), self.powers.i_th);
        while eta >= MIN_STEP {
            let (point, u) = candidate(eta);
            let gains = EffectiveGains::from_direction(self.channels, &u);
            let value = self.lagrangian(&gains, lambda);
            if self.interference(&gains) <= limit && value >= base + self.cfg.armijo_coefficient * eta * slope {
                return Some(Accepted {
                    point,
                    gains,
                    lagrangian: value,
                    step: eta,
                });
            }
            eta *= self.cfg.backtrack_factor;
        }
        None
    }

    pub fn dual_update(&self, lambda: f64, gains: &EffectiveGains) -> f64 {
        if self.cfg.dual_step_rho > 0.0 {
            (lambda + self.cfg.dual_step_rho * (self.interference(gains) - self.powers.i_th)).max(0.0)
        } else {
            lambda
        }
    }
}

/// Projected-gradient ascent with Armijo backtracking and the exponential retraction.
///
/// The gradient is rank one, so each step moves `Φ` only inside a two-dimensional
/// subspace; the retraction is evaluated there in `O(M²)` instead of a dense `M×M`
/// exponential.
pub fn optimize_phase(
    channels: &ChannelSet,
    phi_init: &PhaseShiftMatrix,
    p_s: f64,
    powers: &PowerConfig,
    cfg: &ManifoldOptConfig,
) -> Result<PhaseOutcome> {
    let m = phi_init.dim();
    if channels.elements() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: channels.elements(),
        });
    }
    let ctx = StepContext {
        channels,
        p_s,
        powers,
        cfg,
    };
    let w = combining_vector(m);
    let scale = cfg.projection.scale();

    let mut phi: CMatrix = phi_init.as_matrix().clone();
    let mut u = combined_direction(&phi);
    let mut gains = EffectiveGains::from_direction(channels, &u);
    let mut lambda = cfg.lambda_init;
    let initial_lagrangian = ctx.lagrangian(&gains, lambda);
    let mut records = Vec::new();
    let mut status = PhaseStatus::MaxIterations;

    for _ in 0..cfg.max_inner_iterations {
        let v = gradient_factor(&gains, channels, p_s, powers, lambda);
        let a = phi.adjoint() * &v;
        let geodesic = RankTwoGeodesic::new(&phi, &a, &w, scale);
        let gradient_norm = geodesic.tangent_norm();
        if gradient_norm < cfg.gradient_tolerance {
            status = PhaseStatus::Converged;
            break;
        }
        let slope = geodesic.slope();
        let accepted = ctx.line_search(&gains, lambda, slope, |eta| ((), geodesic.direction(eta, &u)));
        let Some(step) = accepted else {
            status = PhaseStatus::LineSearchFailed;
            break;
        };
        phi = geodesic.point(step.step);
        if (records.len() + 1) % UNITARITY_CHECK_PERIOD == 0 {
            phi = repolarize_if_drifted(phi);
        }
        u = combined_direction(&phi);
        gains = EffectiveGains::from_direction(channels, &u);
        records.push(InnerRecord {
            lagrangian: step.lagrangian,
            step: step.step,
            gradient_norm,
            lambda,
        });
        lambda = ctx.dual_update(lambda, &gains);
    }

    let accepted_steps = records.len();
    Ok(PhaseOutcome {
        phi: PhaseShiftMatrix::new(repolarize_if_drifted(phi))?,
        initial_lagrangian,
        records,
        status,
        accepted_steps,
        lambda,
    })
}
