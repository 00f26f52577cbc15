//! `polar-ot` command-line front end.

mod args;
mod commands;
mod config;
mod error;
mod report;

use std::io::IsTerminal;
use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;

use crate::args::Cli;
use crate::config::FileConfig;
use crate::error::CliError;

/// Environment fallback for `--log-level`.
const LOG_ENV: &str = "OT_LOG";

fn init_logging(level: Option<&str>) -> Result<(), CliError> {
    let filter = match level {
        Some(l) => EnvFilter::try_new(l).map_err(|e| CliError::Usage(format!("log_level: {e}")))?,
        None => EnvFilter::try_from_env(LOG_ENV).unwrap_or_else(|_| EnvFilter::new("warn")),
    };
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_logging(cli.log_level.as_deref())?;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("threads: must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let file = FileConfig::load(cli.params.as_deref())?;
    commands::dispatch(&cli.command, &file)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
