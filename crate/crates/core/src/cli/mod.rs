//! The `pricewell` command-line front-end.

mod config;
mod pipeline;

use std::fmt;
use std::io::Write as _;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, ErrorKind};

pub use config::{parse_config_file, RunArgs, RunConfig};
pub use pipeline::{run_evolve, run_forecast, run_spectrum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pricewell", version, about = "Thermal price distributions from a particle-in-a-well model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline and write distribution.csv and report.json.
    Forecast(RunArgs),
    /// Solve for the stationary states and write spectrum.csv.
    Spectrum(RunArgs),
    /// Evolve a superposition of stationary states and write evolution.csv.
    Evolve(EvolveArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Comma-separated amplitudes, each `re` or `re:im`, for states 1, 2, ...
    #[arg(long, allow_hyphen_values = true)]
    pub coefficients: String,

    /// Comma-separated times; the word `revival` stands for 2*pi*hbar/(E2-E1).
    #[arg(long)]
    pub times: String,
}

/// Pipeline stage a failure happened in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Walls,
    Potential,
    Temperature,
    Solve,
    Thermal,
    Distribution,
    Evolve,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Walls => "walls",
            Stage::Potential => "potential",
            Stage::Temperature => "temperature",
            Stage::Solve => "solve",
            Stage::Thermal => "thermal",
            Stage::Distribution => "distribution",
            Stage::Evolve => "evolve",
            Stage::Output => "output",
        };
        f.write_str(name)
    }
}

#[derive(Debug)]
pub struct CliError {
    pub stage: Stage,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            exit_code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(stage: Stage, message: impl Into<String>) -> Self {
        Self {
            stage,
            exit_code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn from_error(stage: Stage, err: Error) -> Self {
        let exit_code = match err.kind() {
            ErrorKind::Usage => EXIT_USAGE,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numeric => EXIT_NUMERIC,
        };
        Self {
            stage,
            exit_code,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

/// Tags library errors with the stage they came from.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, CliError>;
}

impl<T> StageExt<T> for Result<T, Error> {
    fn stage(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_error(stage, e))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Forecast(args) => run_forecast(&resolve(&args)?).map(drop),
        Command::Spectrum(args) => run_spectrum(&resolve(&args)?).map(drop),
        Command::Evolve(args) => {
            let config = resolve(&args.run)?;
            run_evolve(&config, &args.coefficients, &args.times).map(drop)
        }
    }
}

fn resolve(args: &RunArgs) -> Result<RunConfig, CliError> {
    RunConfig::resolve(args).map_err(|m| CliError::usage(Stage::Config, m))
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| writeln!(buf, "{}: {}", record.level().as_str().to_lowercase(), record.args()))
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            log::error!("{e}");
            e.exit_code
        }
    }
}
