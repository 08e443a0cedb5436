//! Seeded Monte Carlo trials, baselines and parameter sweeps.
//!
//! Trial `t` of a run draws its channels from a ChaCha8 stream seeded with
//! `base_seed + t`; sweep point `j` offsets that by `j · trials`. Every method
//! consumes the stream identically (channels first, then the starting phase
//! matrix), so different methods on the same seed are paired.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alternating::{self, AoConfig, ConvergenceTrace, Solution, SolveStatus};
use crate::channel::{draw_channel_set, ArrayGeometry, ChannelSet, LinkSet};
use crate::manifold::{
    gradient_factor, haar_unitary, InnerRecord, ManifoldOptConfig, PhaseOutcome, PhaseStatus, StepContext,
};
use crate::metrics::{EffectiveGains, LinkMetrics, PhaseShiftMatrix, PowerConfig};
use crate::power::{optimal_power, PowerDecision};
use crate::{Error, Result, C64, CMatrix, CVector};

/// Default trial count for desk-scale runs.
pub const DESK_TRIALS: usize = 500;
/// Trial count of the full-scale campaign.
pub const PAPER_TRIALS: usize = 10_000;
/// Environment variable capping trial parallelism (0 or unset = all cores).
pub const THREADS_ENV: &str = "BDRIS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Full BD-RIS via alternating optimization.
    #[serde(rename = "optimized")]
    Optimized,
    /// One Haar-random phase matrix with the optimal power switch.
    #[serde(rename = "random", alias = "random_phase")]
    RandomPhase,
    /// Conventional diagonal RIS optimized on the product of circles.
    #[serde(rename = "diagonal", alias = "diagonal_ris")]
    DiagonalRis,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Optimized => "optimized",
            Method::RandomPhase => "random",
            Method::DiagonalRis => "diagonal",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimized" => Ok(Method::Optimized),
            "random" | "random_phase" => Ok(Method::RandomPhase),
            "diagonal" | "diagonal_ris" => Ok(Method::DiagonalRis),
            other => Err(Error::invalid("method", format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub array: ArrayGeometry,
    pub links: LinkSet,
    pub powers: PowerConfig,
    pub ao: AoConfig,
    pub trials: usize,
    pub base_seed: u64,
    pub method: Method,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            array: ArrayGeometry::half_wavelength(4, 8, 2e9).expect("default geometry is valid"),
            links: LinkSet::default(),
            powers: PowerConfig::default(),
            ao: AoConfig::default(),
            trials: DESK_TRIALS,
            base_seed: 0,
            method: Method::Optimized,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        self.array.validate().map_err(|e| match e {
            Error::InvalidParameter { field, reason } => Error::config(field, reason),
            other => other,
        })?;
        self.links.validate()?;
        self.powers.validate()?;
        self.ao.validate()
    }

    pub fn elements(&self) -> usize {
        self.array.elements()
    }

    /// Same scenario with a near-square array of `m` elements.
    pub fn with_elements(&self, m: usize) -> Result<Self> {
        let array = ArrayGeometry::for_elements(m, self.array.carrier_frequency, self.array.element_spacing)?;
        Ok(ScenarioConfig { array, ..*self })
    }

    pub fn trial_seed(&self, trial_index: usize) -> u64 {
        self.base_seed.wrapping_add(trial_index as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub channels: ChannelSet,
    pub phi: PhaseShiftMatrix,
    pub decision: PowerDecision,
    pub metrics: LinkMetrics,
    pub trace: ConvergenceTrace,
    pub status: SolveStatus,
    pub phase_warnings: usize,
}

impl TrialOutcome {
    fn from_solution(channels: ChannelSet, s: Solution) -> Self {
        TrialOutcome {
            channels,
            phi: s.phi,
            decision: s.decision,
            metrics: s.metrics,
            trace: s.trace,
            status: s.status,
            phase_warnings: s.phase_warnings,
        }
    }
}

pub fn run_trial(config: &ScenarioConfig, trial_index: usize) -> Result<TrialOutcome> {
    run_trial_with_seed(config, config.method, config.trial_seed(trial_index))
}

pub fn run_trial_with_seed(config: &ScenarioConfig, method: Method, seed: u64) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channels = draw_channel_set(config, &mut rng)?;
    let powers = &config.powers;
    let m = channels.elements();
    let solution = match method {
        Method::Optimized => alternating::solve(&channels, powers, &config.ao, &mut rng)?,
        Method::RandomPhase => random_phase(&channels, powers, haar_unitary(m, &mut rng)),
        Method::DiagonalRis => {
            let manifold = config.ao.manifold;
            alternating::drive(
                &channels,
                powers,
                &config.ao,
                || random_diagonal(m, &mut rng),
                |phi, p| optimize_diagonal(&channels, phi, p, powers, &manifold),
            )?
        }
    };
    Ok(TrialOutcome::from_solution(channels, solution))
}

fn random_phase(channels: &ChannelSet, powers: &PowerConfig, phi: PhaseShiftMatrix) -> Solution {
    let decision = optimal_power(channels, &phi, powers);
    let metrics = crate::metrics::link_metrics(channels, &phi, decision.p_star, powers);
    Solution {
        trace: ConvergenceTrace {
            initial_secrecy: metrics.secrecy_rate,
            initial_p_s: decision.p_star,
            initial_slack: powers.i_th - metrics.interference_at_pu,
            silent_redraws: 0,
            records: Vec::new(),
        },
        status: if decision.is_silent() { SolveStatus::Silent } else { SolveStatus::Converged },
        phi,
        decision,
        metrics,
        phase_warnings: 0,
    }
}

fn random_diagonal<R: Rng + ?Sized>(m: usize, rng: &mut R) -> PhaseShiftMatrix {
    let phases: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
    PhaseShiftMatrix::diagonal(&phases)
}

/// Projected-gradient ascent restricted to diagonal unit-modulus matrices.
///
/// The Euclidean gradient is masked to its diagonal and projected onto the
/// tangent of each circle; after the step every entry is scaled back to unit
/// modulus. Line search and feasibility handling are those of the full ascent.
pub fn optimize_diagonal(
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
    let full = phi_init.as_matrix();
    let off_diagonal = (0..m).any(|i| (0..m).any(|j| i != j && full[(i, j)] != C64::new(0.0, 0.0)));
    if off_diagonal {
        return Err(Error::invalid("phi_init", "must be diagonal"));
    }
    let ctx = StepContext {
        channels,
        p_s,
        powers,
        cfg,
    };
    let inv_sqrt_m = 1.0 / (m as f64).sqrt();
    let direction = |phases: &CVector| phases * C64::new(inv_sqrt_m, 0.0);

    let mut phases: CVector = phi_init.diagonal();
    let mut gains = EffectiveGains::from_direction(channels, &direction(&phases));
    let mut lambda = cfg.lambda_init;
    let initial_lagrangian = ctx.lagrangian(&gains, lambda);
    let mut records = Vec::new();
    let mut status = PhaseStatus::MaxIterations;

    for _ in 0..cfg.max_inner_iterations {
        let v = gradient_factor(&gains, channels, p_s, powers, lambda);
        // Diagonal of v wᴴ, projected onto the tangent line of each circle.
        let tangent = CVector::from_iterator(
            m,
            phases.iter().zip(v.iter()).map(|(z, vi)| {
                let d = vi * inv_sqrt_m;
                z * C64::new(0.0, (z.conj() * d).im)
            }),
        );
        let gradient_norm = tangent.norm();
        if gradient_norm < cfg.gradient_tolerance {
            status = PhaseStatus::Converged;
            break;
        }
        let slope = gradient_norm * gradient_norm;
        let accepted = ctx.line_search(&gains, lambda, slope, |eta| {
            let next = (&phases + &tangent * C64::new(eta, 0.0)).map(|z| z / z.norm());
            let u = direction(&next);
            (next, u)
        });
        let Some(step) = accepted else {
            status = PhaseStatus::LineSearchFailed;
            break;
        };
        phases = step.point;
        gains = step.gains;
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
        phi: PhaseShiftMatrix::new(CMatrix::from_diagonal(&phases))?,
        initial_lagrangian,
        records,
        status,
        accepted_steps,
        lambda,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Transmit budget in dBm.
    PMax,
    /// Interference threshold in dBm.
    ITh,
    /// Number of surface elements.
    M,
    /// Outer AO iteration count; read from a single run's traces.
    Iterations,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p_max" | "p-max" => Ok(SweepAxis::PMax),
            "i_th" | "i-th" => Ok(SweepAxis::ITh),
            "m" | "elements" => Ok(SweepAxis::M),
            "iterations" => Ok(SweepAxis::Iterations),
            other => Err(Error::invalid("axis", format!("unknown sweep axis `{other}`"))),
        }
    }
}

impl SweepAxis {
    fn configure(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut config = *base;
        match self {
            SweepAxis::PMax => config.powers.p_max = crate::dbm_to_mw(value),
            SweepAxis::ITh => config.powers.i_th = crate::dbm_to_mw(value),
            SweepAxis::M => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::invalid("points", format!("element count must be a positive integer, got {value}")));
                }
                config = base.with_elements(value as usize)?;
            }
            SweepAxis::Iterations => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(Error::invalid("points", format!("iteration index must be a non-negative integer, got {value}")));
                }
            }
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub method: Method,
    pub means: Vec<f64>,
    pub std_errs: Vec<f64>,
    pub trials: Vec<usize>,
    /// Per-trial final secrecy rates, ordered by trial index.
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<f64>,
    pub series: Vec<SweepSeries>,
    pub config: ScenarioConfig,
}

impl SweepResult {
    pub fn series(&self, method: Method) -> Option<&SweepSeries> {
        self.series.iter().find(|s| s.method == method)
    }

    /// `axis_value,method,mean_secrecy_bps_hz,std_err,trials`, one row per point and method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("axis_value,method,mean_secrecy_bps_hz,std_err,trials\n");
        for (j, x) in self.points.iter().enumerate() {
            for s in &self.series {
                let _ = writeln!(out, "{},{},{},{},{}", x, s.method.name(), s.means[j], s.std_errs[j], s.trials[j]);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Sample mean and standard error `s/√n` (unbiased `s`).
pub fn mean_and_std_err(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_mean_ci(samples: &[f64], level: f64, resamples: usize, seed: u64) -> (f64, f64) {
    let n = samples.len();
    assert!(n > 0, "bootstrap needs at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let pick = |q: f64| means[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    (pick(tail), pick(1.0 - tail))
}

/// Bootstrap interval for the mean of paired differences `a_i − b_i`.
pub fn paired_difference_ci(a: &[f64], b: &[f64], level: f64, resamples: usize, seed: u64) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    bootstrap_mean_ci(&diffs, level, resamples, seed)
}

/// Thread count from `BDRIS_THREADS`; 0 means one per core.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Final secrecy of `trials` consecutive seeds starting at `first_seed`.
pub fn run_trials(config: &ScenarioConfig, method: Method, first_seed: u64, trials: usize, threads: usize) -> Result<Vec<f64>> {
    in_pool(threads, || {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial_with_seed(config, method, first_seed.wrapping_add(t as u64)).map(|o| o.metrics.secrecy_rate))
            .collect::<Result<Vec<_>>>()
    })?
}

fn in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(job))
}

pub fn run_sweep(config: &ScenarioConfig, axis: SweepAxis, points: &[f64], methods: &[Method]) -> Result<SweepResult> {
    run_sweep_with_threads(config, axis, points, methods, threads_from_env())
}

/// Runs every (point, method, trial) job in parallel and reduces in trial order,
/// so the result does not depend on the thread count.
pub fn run_sweep_with_threads(
    config: &ScenarioConfig,
    axis: SweepAxis,
    points: &[f64],
    methods: &[Method],
    threads: usize,
) -> Result<SweepResult> {
    if points.is_empty() {
        return Err(Error::invalid("points", "must not be empty"));
    }
    if methods.is_empty() {
        return Err(Error::invalid("methods", "must not be empty"));
    }
    config.validate()?;
    let trials = config.trials;
    let configs: Vec<ScenarioConfig> = points.iter().map(|&x| axis.configure(config, x)).collect::<Result<_>>()?;

    // Iteration sweeps read every point from one set of runs.
    let runs = if axis == SweepAxis::Iterations { 1 } else { points.len() };
    let jobs: Vec<(usize, usize, usize)> = (0..runs)
        .flat_map(|j| (0..methods.len()).flat_map(move |k| (0..trials).map(move |t| (j, k, t))))
        .collect();
    let traces: Vec<ConvergenceTrace> = in_pool(threads, || {
        jobs.par_iter()
            .map(|&(j, k, t)| {
                let seed = config.base_seed.wrapping_add((j * trials + t) as u64);
                run_trial_with_seed(&configs[j], methods[k], seed).map(|o| o.trace)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let trace_of = |j: usize, k: usize, t: usize| &traces[(j * methods.len() + k) * trials + t];
    let series = methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let samples: Vec<Vec<f64>> = points
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    (0..trials)
                        .map(|t| match axis {
                            SweepAxis::Iterations => trace_of(0, k, t).secrecy_at(x as usize),
                            _ => trace_of(j, k, t).final_secrecy(),
                        })
                        .collect()
                })
                .collect();
            let (means, std_errs) = samples.iter().map(|s| mean_and_std_err(s)).unzip();
            SweepSeries {
                method,
                means,
                std_errs,
                trials: vec![trials; points.len()],
                samples,
            }
        })
        .collect();

    Ok(SweepResult {
        axis,
        points: points.to_vec(),
        series,
        config: *config,
    })
}
