//! `hankel-sigma`: batch analyses of Hankel kernels with JSON reports.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::{AnalysisConfig, Overrides};
use crate::error::CliError;

/// Environment variable capping worker threads.
const THREADS_VAR: &str = "HANKEL_SIGMA_THREADS";

#[derive(Parser)]
#[command(name = "hankel-sigma", version, about = "Sigma-function analyses of Hankel operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON analysis config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Spectral cutoff Xi of the regularized inversion.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Number of log-grid points (power of two).
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Single finite-section size, replacing the configured list.
    #[arg(long, global = true)]
    section_n: Option<usize>,
    /// Zero threshold for eigenvalue sign counts.
    #[arg(long, global = true)]
    tau: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sigma-function of the kernel: symbolic atoms and/or a numeric grid.
    Sigma,
    /// Predicted sign counts against finite-section spectra.
    Counts,
    /// Kernel-side against sigma-side Gram matrices.
    Verify,
    /// Reconstruct eta from Hausdorff moments.
    Moments,
    /// Eigenvalues of finite Hankel sections.
    Section,
    /// Moments against their large-n asymptotics.
    Asymptotics,
}

fn threads() -> Result<usize, CliError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_VAR}={v:?} must be a positive integer"))),
        },
        Err(std::env::VarError::NotPresent) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        Err(e) => Err(CliError::Config(format!("{THREADS_VAR}: {e}"))),
    }
}

fn load_config(common: &Common) -> Result<AnalysisConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            AnalysisConfig::from_json(&text)?
        }
        None => AnalysisConfig::default(),
    };
    config.apply(&Overrides {
        out: common.out.clone(),
        cutoff: common.cutoff,
        grid_size: common.grid_size,
        section_n: common.section_n,
        tau: common.tau,
    });
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let threads = threads()?;
    let config = load_config(&cli.common)?;
    let Outcome { report, csv, failure } = match cli.command {
        Command::Sigma => commands::sigma(&config)?,
        Command::Counts => commands::counts(&config, threads)?,
        Command::Verify => commands::verify(&config)?,
        Command::Moments => commands::moments(&config)?,
        Command::Section => commands::section(&config, threads)?,
        Command::Asymptotics => commands::asymptotics(&config)?,
    };
    output::emit(config.out.as_deref(), &report)?;
    if let (Some(path), Some(csv)) = (&config.csv, csv) {
        output::write_atomic(path, &csv)?;
    }
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hankel-sigma: {e}");
            e.exit_code()
        }
    }
}
