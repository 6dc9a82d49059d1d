//! Command-line front end for the layoff SIR model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod files;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::{CutoffRange, Overrides, RunConfig, ENV_PREFIX};
pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "layoff-sir",
    version,
    about = "Fit an SIR model with beta-binomial reporting to weekly event counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Count events per week and compute the 2021 baseline.
    Aggregate,
    /// Maximum-likelihood fit of a weekly series.
    Fit,
    /// Posterior draws starting from the fitted parameters.
    Sample,
    /// End-week point estimate, credible interval and histogram.
    Forecast,
    /// Predictive envelope and one synthetic series.
    Simulate,
    /// Repeat fit and sampling on truncated series.
    Sensitivity,
}

pub fn execute(command: Command, config: &RunConfig) -> Result<Vec<std::path::PathBuf>, CliError> {
    let outputs = match command {
        Command::Aggregate => commands::aggregate(config)?,
        Command::Fit => commands::fit(config)?,
        Command::Sample => commands::sample(config)?,
        Command::Forecast => commands::forecast(config)?,
        Command::Simulate => commands::simulate(config)?,
        Command::Sensitivity => commands::sensitivity(config)?,
    };
    outputs.commit()
}

/// Parse `args`, run, and map the outcome to an exit status.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::SUCCESS
            });
        }
    };
    let result = cli
        .overrides
        .resolve()
        .and_then(|config| execute(cli.command, &config));
    match result {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
