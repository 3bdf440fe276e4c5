use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ladmpsap_cli::{emit_report, run_experiment, CliError, ExperimentConfig, Format};
use log::error;

/// Log verbosity, in `env_logger` filter syntax (for example `info`).
const LOG_ENV: &str = "LADMPSAP_LOG";

#[derive(Parser)]
#[command(
    name = "ladmpsap",
    version,
    about = "Run solver comparison experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Output format; overrides the config's `output.format`.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Output file; overrides `output.path`. Stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
}

fn run(
    path: PathBuf,
    format: Option<Format>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    max_iter: Option<usize>,
) -> Result<bool, CliError> {
    let mut config = ExperimentConfig::load(&path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(m) = max_iter {
        config.max_iter = m;
    }
    config.validate()?;
    let outcome = run_experiment(&config)?;
    let format = format.or(config.output.format).unwrap_or(Format::Table);
    let out = out.or(config.output.path.clone());
    if !outcome.report.rows.is_empty() {
        emit_report(&outcome.report, format, out.as_deref())?;
    }
    for (variant, message) in &outcome.failures {
        error!("no row for {variant}: {message}");
    }
    Ok(outcome.complete())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let Command::Run {
        config,
        format,
        out,
        seed,
        max_iter,
    } = Cli::parse().command;
    match run(config, format, out, seed, max_iter) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e @ CliError::Config(_)) => {
            eprintln!("ladmpsap: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("ladmpsap: {e}");
            ExitCode::FAILURE
        }
    }
}
