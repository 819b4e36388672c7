//! Experiment runner for the time-varying integrator-chain controller:
//! closed-loop runs from config files, parameter sweeps, quantitative
//! verification reports, and plot-data reproduction.

mod config;
mod dump;
mod figs;
mod output;
mod run;
mod sweep;
mod verify;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "hypexp",
    version,
    about = "Closed-loop experiments for the gain-scheduled integrator-chain controller"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "runs/run")]
        out: PathBuf,
        /// Proceed despite gain-condition failures (also permits
        /// non-increasing gains and m < n).
        #[arg(long)]
        force: bool,
    },
    /// Run a grid of cells from a sweep config and aggregate a summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "runs/sweep")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check the quantitative claims and write machine-readable reports.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Reproduce the benchmark figure data (fig1.csv, fig2.csv).
    ReproduceFigs {
        #[arg(long, default_value = "runs/figs")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Print the synthesized forms and matrices for a config.
    DumpController {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Print the auxiliary-dynamics matrices M and L for a config.
    DumpSigmaSystem {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Integral decay bound on 20 random admissible parameter pairs.
    Lemma1 {
        #[arg(long, default_value = "runs/verify-lemma1")]
        out: PathBuf,
    },
    /// Explicit third-order state bounds vs simulation (gains (1, 2, 4)).
    Bounds {
        #[arg(long, default_value = "runs/verify-bounds")]
        out: PathBuf,
    },
    /// Benchmark tail residuals vs golden tolerances.
    Residuals {
        #[arg(long, default_value = "runs/verify-residuals")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Asymptotic one-step matrices vs the nilpotent limit.
    Limits {
        #[arg(long, default_value = "runs/verify-limits")]
        out: PathBuf,
        #[arg(long, default_value_t = 1e4)]
        t_probe: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run {
            config,
            seed,
            out,
            force,
        } => run::run_command(&config, seed, &out, force),
        Cmd::Sweep {
            config,
            out,
            workers,
        } => sweep::sweep(&config, &out, workers),
        Cmd::Verify { what } => match what {
            VerifyCmd::Lemma1 { out } => verify::lemma1(&out),
            VerifyCmd::Bounds { out } => verify::bounds(&out),
            VerifyCmd::Residuals { out, seed } => verify::residuals(&out, seed),
            VerifyCmd::Limits { out, t_probe, tol } => verify::limits(&out, t_probe, tol),
        },
        Cmd::ReproduceFigs { out, seed } => figs::reproduce_figs(&out, seed),
        Cmd::DumpController { config, force } => dump::dump_controller(&config, force),
        Cmd::DumpSigmaSystem { config, force } => dump::dump_sigma_system(&config, force),
    }
}
