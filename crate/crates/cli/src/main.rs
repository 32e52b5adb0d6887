mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use invfree_core::parallel::with_workers;
use invfree_core::Error;

use config::RunConfig;

const EXIT_INPUT: u8 = 4;
const EXIT_PRECONDITION: u8 = 5;
const EXIT_USAGE: u8 = 64;
const EXIT_FAILURE: u8 = 1;

/// Misuse of the command line or of a config's `command`/`study` selector.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "invfree", version, about = "Inversion-free covariance parameter estimation for Gaussian random fields")]
struct Cli {
    /// Worker threads (default: one per available core). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a field on a perturbed lattice; writes CSV plus a JSON sidecar.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate (phi, theta) from a sample CSV; prints JSON.
    Estimate {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate G_n / sqrt(n) on a grid; prints CSV or writes it to --out.
    Sweep {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a replicated study; JSON to --out (CSV beside it) or stdout.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense small-n diagnostics: identifiability margin, eigenvalue bounds, KL bound.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Precondition(_)) => EXIT_PRECONDITION,
        Some(Error::AllExcluded(_)) => commands::EXIT_BOUNDARY,
        Some(Error::NonFinite { .. } | Error::LinearAlgebra(_) | Error::Overflow(_)) => EXIT_FAILURE,
        _ => EXIT_INPUT,
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let name = match &cli.command {
        Command::Simulate { .. } => "simulate",
        Command::Estimate { .. } => "estimate",
        Command::Sweep { .. } => "sweep",
        Command::Experiment { .. } => "experiment",
        Command::Check { .. } => "check",
    };
    let cfg_path = match &cli.command {
        Command::Simulate { config, .. }
        | Command::Estimate { config, .. }
        | Command::Sweep { config, .. }
        | Command::Experiment { config, .. }
        | Command::Check { config } => config.clone(),
    };
    let cfg = config::load(&cfg_path, name)?;
    with_workers(cli.workers, move || match (cli.command, cfg) {
        (Command::Simulate { out, .. }, RunConfig::Simulate(c)) => commands::simulate(c, &out),
        (Command::Estimate { sample, .. }, RunConfig::Estimate(c)) => commands::estimate_cmd(c, &sample),
        (Command::Sweep { sample, out, .. }, RunConfig::Sweep(c)) => commands::sweep(c, &sample, out.as_deref()),
        (Command::Experiment { out, .. }, RunConfig::Experiment(c)) => commands::experiment(c, out.as_deref()),
        (Command::Check { .. }, RunConfig::Check(c)) => commands::check(c),
        (_, other) => Err(UsageError(format!("config is for `{}`", other.command())).into()),
    })?
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
