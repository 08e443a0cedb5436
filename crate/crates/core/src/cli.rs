//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::alternating::SolveStatus;
use crate::config::{parse_config_str_with_overrides, to_json};
use crate::metrics::LinkMetrics;
use crate::montecarlo::{
    run_sweep_with_threads, run_trial_with_seed, threads_from_env, Method, ScenarioConfig, SweepAxis, PAPER_TRIALS,
};
use crate::power::PowerDecision;
use crate::{verify, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "bdris", version, about = "Secrecy-rate optimization for BD-RIS cognitive-radio NTN scenarios")]
pub struct CommandSpec {
    #[command(subcommand)]
    pub command: Command,
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one seeded trial and write trace.csv and summary.json.
    Solve(SolveArgs),
    /// Sweep one parameter and write sweep.csv and sweep.json.
    Sweep(SweepArgs),
    /// Run the oracle suites and report pass/fail per suite.
    Verify(VerifyArgs),
    /// Print the default scenario as JSON.
    Defaults,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// JSON scenario file; omitted fields take default values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dotted override such as `powers.p_max_dbm=30` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Base seed of the random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Use the full 10,000-trial campaign size.
    #[arg(long, conflicts_with = "trials")]
    pub paper_scale: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub method: Option<Method>,
    /// Trial index within the run; the stream seed is `seed + trial`.
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// p_max (dBm), i_th (dBm), m (elements) or iterations.
    #[arg(long)]
    pub axis: SweepAxis,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub points: Vec<f64>,
    /// Methods to compare (repeatable); defaults to optimized and random.
    #[arg(long = "method")]
    pub methods: Vec<Method>,
    /// Worker threads; overrides BDRIS_THREADS (0 = one per core).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
}

impl clap::ValueEnum for Method {
    fn value_variants<'a>() -> &'a [Self] {
        &[Method::Optimized, Method::RandomPhase, Method::DiagonalRis]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

impl clap::ValueEnum for SweepAxis {
    fn value_variants<'a>() -> &'a [Self] {
        &[SweepAxis::PMax, SweepAxis::ITh, SweepAxis::M, SweepAxis::Iterations]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        let name = match self {
            SweepAxis::PMax => "p_max",
            SweepAxis::ITh => "i_th",
            SweepAxis::M => "m",
            SweepAxis::Iterations => "iterations",
        };
        Some(clap::builder::PossibleValue::new(name))
    }
}

impl ScenarioArgs {
    fn resolve(&self, method: Option<Method>) -> Result<ScenarioConfig> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?,
            None => "{}".to_string(),
        };
        let mut config = parse_config_str_with_overrides(&text, &self.overrides)?;
        if let Some(seed) = self.seed {
            config.base_seed = seed;
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if self.paper_scale {
            config.trials = PAPER_TRIALS;
        }
        if let Some(method) = method {
            config.method = method;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Serialize)]
struct SolveSummary<'a> {
    config: &'a ScenarioConfig,
    trial: usize,
    seed: u64,
    status: SolveStatus,
    decision: PowerDecision,
    metrics: LinkMetrics,
    outer_iterations: usize,
    silent_redraws: usize,
    phase_warnings: usize,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    log::info!("wrote {}", dir.join(name).display());
    Ok(())
}

/// Executes a parsed command and returns the process exit code.
pub fn run(cmd: &CommandSpec) -> Result<i32> {
    match &cmd.command {
        Command::Defaults => {
            println!("{}", to_json(&ScenarioConfig::default())?);
            Ok(0)
        }
        Command::Solve(args) => {
            let config = args.scenario.resolve(args.method)?;
            let seed = config.trial_seed(args.trial);
            let outcome = run_trial_with_seed(&config, config.method, seed)?;
            write(&args.out, "trace.csv", &outcome.trace.to_csv())?;
            let summary = SolveSummary {
                config: &config,
                trial: args.trial,
                seed,
                status: outcome.status,
                decision: outcome.decision,
                metrics: outcome.metrics,
                outer_iterations: outcome.trace.outer_iterations(),
                silent_redraws: outcome.trace.silent_redraws,
                phase_warnings: outcome.phase_warnings,
            };
            write(&args.out, "summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            println!(
                "{} secrecy={} bit/s/Hz p_s={} mW outer_iterations={}",
                config.method.name(),
                outcome.metrics.secrecy_rate,
                outcome.decision.p_star,
                outcome.trace.outer_iterations()
            );
            Ok(0)
        }
        Command::Sweep(args) => {
            let config = args.scenario.resolve(None)?;
            let methods = if args.methods.is_empty() {
                vec![Method::Optimized, Method::RandomPhase]
            } else {
                args.methods.clone()
            };
            let threads = args.threads.unwrap_or_else(threads_from_env);
            let result = run_sweep_with_threads(&config, args.axis, &args.points, &methods, threads)?;
            let csv = result.to_csv();
            write(&args.out, "sweep.csv", &csv)?;
            write(&args.out, "sweep.json", &(result.to_json()? + "\n"))?;
            print!("{csv}");
            Ok(0)
        }
        Command::Verify(args) => {
            let reports = verify::run_all(args.seed)?;
            for r in &reports {
                println!("{r}");
            }
            Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
        }
    }
}
