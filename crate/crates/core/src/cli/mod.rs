//! Command-line front end: `solve`, `evaluate`, `sweep` and `pareto`.

mod commands;
mod grid;
mod manifest;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::gate_dynamics::PhaseTarget;
use crate::ion_physics::Mode;

pub use grid::{parse_grid, preset, Preset, PRESETS};
pub use manifest::{sha256_hex, ManifestBuilder, RunManifest, MANIFEST_SCHEMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BEST_EFFORT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

pub const SWEEP_SCHEMA: &str = "fastgate.sweep/1";
pub const PARETO_SCHEMA: &str = "fastgate.pareto/1";
pub const EVALUATION_SCHEMA: &str = "fastgate.evaluation/1";

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Usage(_) | Error::Domain(_) | Error::UnknownSpecies(_) | Error::Config(_) => {
                EXIT_USAGE
            }
            Error::SearchFailed(_) => EXIT_BEST_EFFORT,
            Error::Convergence(_) | Error::Io(_) | Error::Json(_) => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "fastgate",
    version,
    about = "Fast mixed-species trapped-ion gates from spin-dependent kicks"
)]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a gate sequence and write it as JSON.
    Solve(SolveArgs),
    /// Re-evaluate a stored or hand-built sequence and cross-check it against the oracle.
    Evaluate(EvaluateArgs),
    /// Error sweep under timing jitter or systematic drift, written as CSV.
    Sweep(SweepArgs),
    /// Gate-time / SDK-count frontier over a grid of gate times, written as CSV.
    Pareto(ParetoArgs),
    /// Compare analytic dynamics with the branch propagator on random sequences.
    #[command(hide = true)]
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TrapArgs {
    /// Built-in or table pair such as `ca43-sr88` (ion 1 first).
    #[arg(long)]
    pub pair: Option<String>,
    #[arg(long, conflicts_with = "pair", requires = "ion2")]
    pub ion1: Option<String>,
    #[arg(long, conflicts_with = "pair", requires = "ion1")]
    pub ion2: Option<String>,
    /// Axial trap frequency of ion 1 alone (Hz) [default: 1e6].
    #[arg(long)]
    pub trap_freq_hz: Option<f64>,
    /// Raman beam angle from the trap axis (rad) [default: π/4].
    #[arg(long)]
    pub tilt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseTargetArg {
    Plus,
    Minus,
    Either,
}

impl From<PhaseTargetArg> for PhaseTarget {
    fn from(p: PhaseTargetArg) -> Self {
        match p {
            PhaseTargetArg::Plus => PhaseTarget::Plus,
            PhaseTargetArg::Minus => PhaseTarget::Minus,
            PhaseTargetArg::Either => PhaseTarget::Either,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub trap: TrapArgs,
    /// Target gate time τ_G (s).
    #[arg(long)]
    pub gate_time: Option<f64>,
    /// Ceiling of the SDK-count cap 𝒩_max.
    #[arg(long)]
    pub nmax: Option<u32>,
    #[arg(long)]
    pub nmax_start: Option<u32>,
    /// Stage-1 group count.
    #[arg(long)]
    pub groups: Option<usize>,
    /// Random restarts per 𝒩_max level.
    #[arg(long)]
    pub ensemble: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Acceptance threshold on ε.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, value_enum)]
    pub phase_target: Option<PhaseTargetArg>,
    /// Mode occupancies n̄_ip,n̄_op.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub nbar: Option<Vec<f64>>,
    #[arg(long)]
    pub max_refine: Option<usize>,
    /// TOML search config; flags override its values. May also hold `pair` and `trap_freq_hz`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output JSON path (standard output when absent).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Solution JSON to re-evaluate.
    #[arg(long, conflicts_with_all = ["times", "directions"])]
    pub solution: Option<PathBuf>,
    #[command(flatten)]
    pub trap: TrapArgs,
    /// Hand-built sequence: comma-separated kick times (s).
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "directions"
    )]
    pub times: Option<Vec<f64>>,
    /// Hand-built sequence: comma-separated signed kick directions.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "times"
    )]
    pub directions: Option<Vec<i32>>,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub nbar: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub phase_target: Option<PhaseTargetArg>,
    /// Write the evaluation report as JSON.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Jitter,
    OpDrift,
    CommonDrift,
    Reprate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClampArg {
    Forward,
    Reject,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    /// `a:b:logN`, `a:b:linN` or a comma list; s for jitter, rad/s or fractions for drift.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Named preset: fig1e, fig1g, figS3 or figS4.
    #[arg(long)]
    pub preset: Option<String>,
    /// Interpret drift grid values as fractions of each mode frequency.
    #[arg(long)]
    pub fractional: bool,
    /// Jitter realizations per grid point.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "forward")]
    pub clamp: ClampArg,
    /// Minimum pulse separation enforced under jitter and used to find groups (s).
    #[arg(long, default_value_t = 5e-9)]
    pub min_separation: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ip,
    Op,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ip => Mode::Ip,
            ModeArg::Op => Mode::Op,
        }
    }
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    #[command(flatten)]
    pub trap: TrapArgs,
    /// Gate-time grid (s).
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 30)]
    pub nmax: u32,
    #[arg(long, default_value_t = 1)]
    pub nmax_start: u32,
    #[arg(long, default_value_t = 2000)]
    pub ensemble: usize,
    #[arg(long, default_value_t = 18)]
    pub groups: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub target: f64,
    /// Mode whose coupling sets η̄_eff in the rescaled coordinates.
    #[arg(long, value_enum, default_value = "ip")]
    pub mode: ModeArg,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub nmax: u32,
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            log::warn!("could not resize the worker pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Pareto(a) => commands::pareto(a),
        Command::OracleCheck(a) => commands::oracle_check(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
