//! `aq` — command-line pipeline for low-cost PM2.5 sensor data.
//!
//! Exit codes: 0 success, 1 data error (unreadable or malformed inputs,
//! insufficient data), 2 usage error (bad flags or configuration).

mod commands;
mod config;
mod store;

use clap::{Parser, Subcommand, ValueEnum};
use config::{OutputFormat, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "aq",
    version,
    about = "Low-cost PM2.5 sensor correction, analytics, and forecasting pipeline"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "aq.toml")]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Override the configured output format.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Override the configured seed (training and synthesis).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic raw CSVs for sites with a [sites.synth] section.
    Synth {
        /// Restrict to one site label.
        #[arg(long)]
        site: Option<String>,
        /// Write to this path instead of the site's input path (single site).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse, quality-control, and normalize raw CSVs into per-site stores.
    Ingest {
        #[arg(long)]
        site: Option<String>,
    },
    /// Emit diurnal, daily, seasonal, annual, exceedance, comparison, and
    /// cross-site correlation outputs.
    Analyze,
    /// Train the recurrent forecaster and evaluate it against persistence.
    Forecast {
        #[arg(long)]
        site: Option<String>,
    },
    /// Print the version.
    Version,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if matches!(cli.command, Command::Version) {
        println!("aq {}", env!("CARGO_PKG_VERSION"));
        return Ok(());
    }
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(format) = cli.format {
        cfg.format = format.into();
    }
    match &cli.command {
        Command::Synth { site, out } => {
            commands::cmd_synth(&cfg, site.as_deref(), out.as_deref(), cli.seed)
        }
        Command::Ingest { site } => commands::cmd_ingest(&cfg, site.as_deref()),
        Command::Analyze => commands::cmd_analyze(&cfg),
        Command::Forecast { site } => commands::cmd_forecast(&cfg, site.as_deref(), cli.seed),
        Command::Version => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
