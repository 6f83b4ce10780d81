//! `jumpsync` command-line pipeline: simulate panels, rearrange sluggish
//! stock jumps around ETF jumps, and backtest minimum-variance portfolios.

mod commands;
mod config;
mod error;
mod panel_csv;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Overrides, RunConfig};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "jumpsync", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the simulator and the bootstrap.
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum backward shift per jump.
    #[arg(long)]
    budget: Option<usize>,
    /// Jump test significance level.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a panel with sluggish jumps and write it as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Output panel CSV.
        #[arg(long)]
        out: PathBuf,
        /// Also write the efficient-price panel.
        #[arg(long)]
        efficient: Option<PathBuf>,
    },
    /// Detect jumps, rearrange every event and write reports.
    Rearrange {
        /// Input panel CSV.
        panel: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare minimum-variance portfolios on raw and rearranged returns.
    Backtest {
        /// Raw panel CSV.
        panel: PathBuf,
        /// Rearranged panel CSV.
        rearranged: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Performance table, JSON if the extension is `.json`, CSV otherwise.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    cfg.apply(Overrides {
        seed: common.seed,
        budget: common.budget,
        alpha: common.alpha,
    })?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, out, efficient } => {
            commands::simulate(&load(&common)?, &out, efficient.as_deref())
        }
        Command::Rearrange { panel, common, out } => commands::rearrange(&panel, &load(&common)?, &out),
        Command::Backtest {
            panel,
            rearranged,
            common,
            out,
        } => commands::backtest(&panel, &rearranged, &load(&common)?, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
