mod commands;
mod table;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsearch::critical::{CriticalMode, CriticalSearch};
use qsearch::parallel::Strategy;
use qsearch::{Error, GateDepthTable};

use crate::table::Format;

/// Depth-optimized Grover-style search schedules.
#[derive(Debug, Parser)]
#[command(name = "qsearch", version, about)]
struct Cli {
    /// Toffoli depth table, one `width,depth` record per line.
    #[arg(long, global = true, env = "QSEARCH_TOFFOLI_TABLE", value_name = "PATH")]
    toffoli_table: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "md")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reference tables: Grover, one-stage and two-stage optima, critical ratios and depth curves.
    Tables(TablesArgs),
    /// Optimal schedule for one register size.
    Optimize(OptimizeArgs),
    /// Success probabilities and depth of a given sequence or two-stage plan.
    Simulate(SimulateArgs),
    /// Critical oracle-to-diffusion depth ratio.
    Critical(CriticalArgs),
    /// Plan a search across several machines.
    Parallel(ParallelArgs),
    /// Run the consistency checks; exits with 3 if any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    All,
    Grover,
    OneStage,
    TwoStage,
    Critical,
    /// Expected depth of each optimum against `n`.
    Curves,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, default_value_t = 4)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "all")]
    table: Which,
    /// Block cap for the optimizers (default `2n`).
    #[arg(long)]
    max_blocks: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptMode {
    Grover,
    OneStage,
    TwoStage,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "one-stage")]
    mode: OptMode,
    #[arg(long)]
    max_blocks: Option<usize>,
    /// Restrict two-stage plans to this stage-2 register width.
    #[arg(long)]
    stage2_width: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Reduced,
    Full,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `S_{n,m}(j_1,...,j_q)`, or two stages joined by `|`.
    #[arg(long)]
    sequence: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Target address as a bit string, most significant bit first (default all zeros).
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_enum, default_value = "reduced")]
    backend: Backend,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// Single register size; overrides `--n-min`/`--n-max`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 4)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, value_parser = parse_mode, default_value = "one-stage")]
    mode: CriticalMode,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Smallest ratio probed; below it the ratio is reported as NA.
    #[arg(long, default_value_t = 1.0)]
    floor: f64,
    #[arg(long)]
    max_blocks: Option<usize>,
    /// Stage-2 register width for two-stage schedules, or `any`.
    #[arg(long, default_value = "2")]
    stage2_width: String,
    #[arg(long, value_parser = parse_search, default_value = "exhaustive")]
    search: CriticalSearch,
}

#[derive(Debug, Args)]
pub struct ParallelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    machines: usize,
    #[arg(long, value_parser = parse_strategy, default_value = "replicated")]
    strategy: Strategy,
    /// Probability cap (replicated) or per-slice floor (partition; default `1 - 2^{-n/2}`).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    guess_bits: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// Random sequences per `(n, m)` pair in the simulator cross-check.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also run the scaling checks up to n = 14.
    #[arg(long)]
    extended: bool,
}

fn parse_mode(s: &str) -> Result<CriticalMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_search(s: &str) -> Result<CriticalSearch, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure modes of a command, mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit code 2.
    Usage(String),
    /// A verification check failed: exit code 3.
    Verification,
    /// Anything else: exit code 1.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidAlpha(_)
            | Error::InvalidBlockWidth { .. }
            | Error::InvalidSequence(_)
            | Error::InvalidTarget(_)
            | Error::InvalidArgument(_)
            | Error::InvalidTable(_)
            | Error::WidthMismatch(_)
            | Error::WidthOutOfRange { .. } => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// The depth table in effect: a user file, or the linear table (continued
/// with its last slope when a command needs widths above 10).
pub struct Tables {
    custom: Option<GateDepthTable>,
}

impl Tables {
    fn load(path: Option<&PathBuf>) -> Result<Self, Failure> {
        let custom = match path {
            Some(p) => Some(GateDepthTable::load(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?),
            None => None,
        };
        Ok(Self { custom })
    }

    pub fn for_width(&self, n: usize) -> GateDepthTable {
        match &self.custom {
            Some(t) => t.clone(),
            None if n <= GateDepthTable::linear().max_width() => GateDepthTable::linear(),
            None => GateDepthTable::linear_extended(n),
        }
    }

    pub fn is_custom(&self) -> bool {
        self.custom.is_some()
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let tables = Tables::load(cli.toffoli_table.as_ref())?;
    let mut out = std::io::stdout().lock();
    let format = cli.format;
    let emitted = match cli.command {
        Command::Tables(a) => commands::tables(&a, &tables)?,
        Command::Optimize(a) => vec![commands::optimize(&a, &tables)?],
        Command::Simulate(a) => vec![commands::simulate(&a, &tables)?],
        Command::Critical(a) => vec![commands::critical(&a, &tables)?],
        Command::Parallel(a) => vec![commands::parallel(&a, &tables)?],
        Command::Verify(a) => {
            let report = verify::run(&a, &tables)?;
            table::write_tables(&[report.table()], format, &mut out)?;
            return if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Verification)
            };
        }
    };
    table::write_tables(&emitted, format, &mut out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
