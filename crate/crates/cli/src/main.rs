mod config;
mod construct;
mod criterion;
mod density;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, OutputFormat};

/// Exit-code contract: 0 success, 1 validation, 2 runtime/horizon
/// exhaustion, 3 verification failure.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) | CliError::Verification(m) => m,
        }
    }

    /// Core errors surfacing during execution (as opposed to config parsing)
    /// are runtime failures.
    pub fn runtime(e: shiftlab_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "shiftlab",
    about = "Weighted backward shift laboratory: density estimators, summability verdicts, \
             explicit vector constructions, and brute-force verification suites."
)]
struct Cli {
    /// TOML experiment description; flags below override its scalar fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    horizon: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Density traces and upper/lower estimates for configured rule sets.
    Density,
    /// Summability verdict for the configured weight family.
    Criterion,
    /// Build one of the explicit vectors and write its manifest.
    Construct,
    /// Run the brute-force verification suites.
    Verify,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref())?;
    if cli.horizon.is_some() {
        cfg.horizon = cli.horizon;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.out_dir.is_some() {
        cfg.out_dir = cli.out_dir;
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    cfg.validate()?;
    match cli.cmd {
        Cmd::Density => density::cmd_density(&cfg),
        Cmd::Criterion => criterion::cmd_criterion(&cfg),
        Cmd::Construct => construct::cmd_construct(&cfg),
        Cmd::Verify => verify::cmd_verify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
