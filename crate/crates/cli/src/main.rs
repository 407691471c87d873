use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qthresh::simulator::MeasureNoise;
use qthresh::{ChannelKind, LawFamily};
use serde::{Deserialize, Serialize};

mod commands;
mod config;
mod output;
mod svg;

use output::Format;

/// Redundancy bounds, noise thresholds and repetition-code simulation for
/// computation with classical inputs and outputs on noisy qubits.
#[derive(Debug, Parser)]
#[command(name = "qthresh", version)]
pub struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write the result to this file. Relative paths go under $QTHRESH_OUT_DIR when set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output file format; inferred from the --out extension when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Holevo information of a channel at noise p.
    Capacity(CapacityArgs),
    /// Minimum number of physical qubits at fixed noise.
    Bound(BoundArgs),
    /// Lower bound on the error probability as a function of redundancy.
    ErrorCurve(ErrorCurveArgs),
    /// Noise threshold for a scale-dependent law by bisection.
    Threshold(ThresholdArgs),
    /// Exact erasure threshold for the linear or power law.
    ClosedForm(ClosedFormArgs),
    /// Thresholds over an (alpha, gamma) grid for several channels.
    Sweep(SweepArgs),
    /// Monte Carlo of repetition-coded readout.
    Simulate(SimulateArgs),
    /// Closed-form and oracle cross-checks.
    Selfcheck(SelfcheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Capacity(_) => "capacity",
            Command::Bound(_) => "bound",
            Command::ErrorCurve(_) => "error-curve",
            Command::Threshold(_) => "threshold",
            Command::ClosedForm(_) => "closed-form",
            Command::Sweep(_) => "sweep",
            Command::Simulate(_) => "simulate",
            Command::Selfcheck(_) => "selfcheck",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct AccuracyArgs {
    /// Target error probability, in (0, 0.5). [default: 0.1]
    #[arg(long)]
    pub eps: Option<f64>,
    /// log2 of the number of distinct outputs, at most n. [default: 128]
    #[arg(long)]
    pub log2rf: Option<f64>,
    /// Number of input bits. [default: 128]
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    /// Bisection tolerance on p0. [default: 1e-4]
    #[arg(long)]
    pub delta_p0: Option<f64>,
    /// Accuracy of the inner minimisation. [default: 1e-6]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Bisection iteration cap. [default: 200]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Step cap per inner minimisation. [default: 1000000]
    #[arg(long)]
    pub max_inner_iters: Option<usize>,
    /// Grid oracle resolution per axis. [default: 2001]
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct CapacityArgs {
    #[arg(long)]
    pub channel: Option<ChannelKind>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub channel: Option<ChannelKind>,
    #[arg(long)]
    pub p: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub accuracy: AccuracyArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawArg {
    Constant,
    Polynomial,
    Exponential,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ErrorCurveArgs {
    /// [default: erasure]
    #[arg(long)]
    pub channel: Option<ChannelKind>,
    /// [default: constant]
    #[arg(long, value_enum)]
    pub law: Option<LawArg>,
    /// One curve per value, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p0: Option<Vec<f64>>,
    /// [default: 0]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub k_min: Option<f64>,
    /// [default: 1.2 x the largest finite k_max, or 20]
    #[arg(long)]
    pub k_max: Option<f64>,
    /// Points per curve. [default: 200]
    #[arg(long)]
    pub points: Option<usize>,
    /// [default: 128]
    #[arg(long)]
    pub log2rf: Option<f64>,
    /// [default: 128]
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub channel: Option<ChannelKind>,
    /// [default: polynomial]
    #[arg(long)]
    pub family: Option<LawFamily>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Include the bisection trace (p0, g*) in the output.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub trace: Option<bool>,
    #[command(flatten)]
    #[serde(flatten)]
    pub accuracy: AccuracyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedLaw {
    /// p0 (1 + alpha (k - 1))
    Linear,
    /// p0 k^gamma
    Power,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ClosedFormArgs {
    #[arg(long, value_enum)]
    pub law: Option<ClosedLaw>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Capacity cost; computed from eps, log2rf and n when omitted.
    #[arg(long)]
    pub c: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub accuracy: AccuracyArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// [default: all three]
    #[arg(long, value_delimiter = ',')]
    pub channels: Option<Vec<ChannelKind>>,
    /// [default: polynomial]
    #[arg(long)]
    pub family: Option<LawFamily>,
    /// [default: 0.1,0.2,...,2.0]
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// [default: 0.1,0.2,...,2.0]
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub accuracy: AccuracyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub noise: Option<MeasureNoise>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Phase bits. [default: 128]
    #[arg(long)]
    pub n: Option<u32>,
    /// Repetitions per bit; the sufficient count for --target-eps when omitted.
    #[arg(long, alias = "runs")]
    pub t: Option<u32>,
    /// [default: 0.01]
    #[arg(long)]
    pub target_eps: Option<f64>,
    /// [default: 100000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SelfcheckArgs {
    /// Grid oracle resolution used by the oracle checks. [default: 501]
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Internal(String),
}

impl From<qthresh::Error> for CliError {
    fn from(e: qthresh::Error) -> Self {
        match e {
            qthresh::Error::Domain(_) | qthresh::Error::ClampedRegion { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(flagged) => ExitCode::from(if flagged { 2 } else { 0 }),
        Err(e) => {
            let (code, msg) = match e {
                CliError::Usage(m) => (1, format!("usage error: {m}")),
                CliError::Domain(m) => (1, m),
                CliError::Internal(m) => (3, format!("internal error: {m}")),
            };
            eprintln!("qthresh: {msg}");
            ExitCode::from(code)
        }
    }
}
