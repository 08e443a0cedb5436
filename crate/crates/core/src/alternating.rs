//! Alternating optimization of transmit power and phase matrix.
//!
//! Each outer iteration applies the closed-form power switch for the current
//! `Φ` and then, if the transmitter is active, runs the manifold ascent at that
//! power. The power step is exact and the phase step never lowers the rate gap
//! at fixed power, so the recorded secrecy rate is non-decreasing when the
//! multiplier is held at zero.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::manifold::{haar_unitary, optimize_phase, ManifoldOptConfig, PhaseOutcome, PhaseStatus};
use crate::metrics::{link_metrics, LinkMetrics, PhaseShiftMatrix, PowerConfig};
use crate::power::{optimal_power, PowerDecision};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoConfig {
    pub max_outer_iterations: usize,
    pub secrecy_tolerance: f64,
    /// Fresh random starts tried while the power switch stays silent.
    pub max_silent_redraws: usize,
    pub manifold: ManifoldOptConfig,
}

impl Default for AoConfig {
    fn default() -> Self {
        AoConfig {
            max_outer_iterations: 50,
            secrecy_tolerance: 1e-4,
            max_silent_redraws: 3,
            manifold: ManifoldOptConfig::default(),
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iterations == 0 {
            return Err(Error::config("ao.max_outer_iterations", "must be at least 1"));
        }
        if !(self.secrecy_tolerance > 0.0) {
            return Err(Error::config("ao.secrecy_tolerance", "must be positive"));
        }
        self.manifold.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub secrecy_rate: f64,
    pub p_s: f64,
    /// `I_th` minus the interference at the PU.
    pub interference_slack: f64,
    pub inner_iterations: usize,
    pub phase_status: PhaseStatus,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub initial_secrecy: f64,
    pub initial_p_s: f64,
    pub initial_slack: f64,
    pub silent_redraws: usize,
    pub records: Vec<OuterRecord>,
}

impl ConvergenceTrace {
    /// Secrecy after `k` outer iterations; iteration 0 is the starting point and
    /// the last value is held once the loop has stopped.
    pub fn secrecy_at(&self, k: usize) -> f64 {
        match k {
            0 => self.initial_secrecy,
            _ => self
                .records
                .get(k - 1)
                .or(self.records.last())
                .map_or(self.initial_secrecy, |r| r.secrecy_rate),
        }
    }

    pub fn final_secrecy(&self) -> f64 {
        self.records.last().map_or(self.initial_secrecy, |r| r.secrecy_rate)
    }

    pub fn outer_iterations(&self) -> usize {
        self.records.len()
    }

    /// `iteration,secrecy_rate,p_s_mw,interference_slack_mw`, starting at iteration 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,secrecy_rate,p_s_mw,interference_slack_mw\n");
        let _ = writeln!(out, "0,{},{},{}", self.initial_secrecy, self.initial_p_s, self.initial_slack);
        for (k, r) in self.records.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", k + 1, r.secrecy_rate, r.p_s, r.interference_slack);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// Every starting point tried left the SU weaker than Eve.
    Silent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub phi: PhaseShiftMatrix,
    pub decision: PowerDecision,
    pub metrics: LinkMetrics,
    pub trace: ConvergenceTrace,
    pub status: SolveStatus,
    /// Inner solves that ended on a failed line search.
    pub phase_warnings: usize,
}

pub fn solve<R: Rng + ?Sized>(channels: &ChannelSet, powers: &PowerConfig, cfg: &AoConfig, rng: &mut R) -> Result<Solution> {
    let m = channels.elements();
    let manifold = cfg.manifold;
    drive(
        channels,
        powers,
        cfg,
        || haar_unitary(m, rng),
        |phi, p| optimize_phase(channels, phi, p, powers, &manifold),
    )
}

/// Outer loop shared by the full BD-RIS and the diagonal baseline; they differ
/// only in how a starting point is drawn and how the phase step is taken.
pub(crate) fn drive(
    channels: &ChannelSet,
    powers: &PowerConfig,
    cfg: &AoConfig,
    mut draw_start: impl FnMut() -> PhaseShiftMatrix,
    mut phase_step: impl FnMut(&PhaseShiftMatrix, f64) -> Result<PhaseOutcome>,
) -> Result<Solution> {
    let mut phi = draw_start();
    let mut decision = optimal_power(channels, &phi, powers);
    let mut silent_redraws = 0;
    while decision.is_silent() && silent_redraws < cfg.max_silent_redraws {
        phi = draw_start();
        decision = optimal_power(channels, &phi, powers);
        silent_redraws += 1;
    }
    let start = link_metrics(channels, &phi, decision.p_star, powers);
    let mut trace = ConvergenceTrace {
        initial_secrecy: start.secrecy_rate,
        initial_p_s: decision.p_star,
        initial_slack: powers.i_th - start.interference_at_pu,
        silent_redraws,
        records: Vec::new(),
    };
    let mut status = SolveStatus::MaxIterations;
    let mut phase_warnings = 0;
    let mut previous = start.secrecy_rate;

    if decision.is_silent() {
        status = SolveStatus::Silent;
    } else {
        for _ in 0..cfg.max_outer_iterations {
            let clock = Instant::now();
            let outcome = phase_step(&phi, decision.p_star)?;
            if outcome.status == PhaseStatus::LineSearchFailed {
                phase_warnings += 1;
                log::debug!("phase step stopped on a failed line search");
            }
            phi = outcome.phi;
            decision = optimal_power(channels, &phi, powers);
            let m = link_metrics(channels, &phi, decision.p_star, powers);
            trace.records.push(OuterRecord {
                secrecy_rate: m.secrecy_rate,
                p_s: decision.p_star,
                interference_slack: powers.i_th - m.interference_at_pu,
                inner_iterations: outcome.accepted_steps,
                phase_status: outcome.status,
                wall_time_s: clock.elapsed().as_secs_f64(),
            });
            let delta = (m.secrecy_rate - previous).abs();
            previous = m.secrecy_rate;
            if decision.is_silent() || delta < cfg.secrecy_tolerance {
                status = SolveStatus::Converged;
                break;
            }
        }
    }

    let metrics = link_metrics(channels, &phi, decision.p_star, powers);
    Ok(Solution {
        phi,
        decision,
        metrics,
        trace,
        status,
        phase_warnings,
    })
}
