//! Experiment runner for the index-modulation simulator.
//!
//! Exit codes: 0 success, 1 runtime numerical failure, 2 config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use imisac_cli::commands::{cmd_beampattern, cmd_ber, cmd_rate_table, cmd_roundtrip, cmd_se};
use imisac_cli::config::{CliError, Config};

#[derive(Parser)]
#[command(name = "imisac", about = "Index-modulation ISAC experiment runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Communication-rate table: nominal vs exactly enumerable bits
    RateTable(CommonArgs),
    /// Monte-Carlo bit-error-rate sweep for one scheme
    Ber(CommonArgs),
    /// Spectral-efficiency sweep (pattern mixture vs conventional)
    Se(CommonArgs),
    /// Normalized beampatterns over trade-off values
    Beampattern(CommonArgs),
    /// Noiseless round-trip check of every scheme
    Roundtrip(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config file (`key = value` lines, `#` comments)
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed; overrides the config `seed` key
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for Monte-Carlo runs (results do not depend on this)
    #[arg(long)]
    threads: Option<usize>,
}

impl CommonArgs {
    fn load_config(&self) -> Result<Config, CliError> {
        match &self.config {
            Some(path) => Config::from_path(path),
            None => Ok(Config::empty()),
        }
    }

    fn seed(&self, cfg: &Config) -> Result<u64, CliError> {
        match self.seed {
            Some(s) => Ok(s),
            None => cfg.get_u64("seed", 0),
        }
    }

    fn emit(&self, content: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, content).map_err(|e| {
                CliError::Runtime(format!("cannot write {}: {e}", path.display()))
            }),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let args = match &cli.command {
        Command::RateTable(a)
        | Command::Ber(a)
        | Command::Se(a)
        | Command::Beampattern(a)
        | Command::Roundtrip(a) => a,
    };
    let cfg = args.load_config()?;
    let seed = args.seed(&cfg)?;

    let work = || -> Result<bool, CliError> {
        match &cli.command {
            Command::RateTable(_) => {
                args.emit(&cmd_rate_table(&cfg)?)?;
                Ok(true)
            }
            Command::Ber(_) => {
                args.emit(&cmd_ber(&cfg, seed)?)?;
                Ok(true)
            }
            Command::Se(_) => {
                args.emit(&cmd_se(&cfg, seed)?)?;
                Ok(true)
            }
            Command::Beampattern(_) => {
                args.emit(&cmd_beampattern(&cfg)?)?;
                Ok(true)
            }
            Command::Roundtrip(_) => {
                let (report, ok) = cmd_roundtrip(&cfg, seed)?;
                args.emit(&report)?;
                Ok(ok)
            }
        }
    };

    match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(format!("cannot build thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e @ CliError::Runtime(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
