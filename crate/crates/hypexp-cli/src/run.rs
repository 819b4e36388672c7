//! The `run` subcommand: one closed-loop experiment from a config file.

use anyhow::{bail, Context, Result};
use std::path::Path;

use hypexp::controller::{synthesize_with, validate_gains, SynthesisOptions};
use hypexp::ct::{simulate_ct, CtOptions};
use hypexp::dt::DtSystem;
use hypexp::{DisturbanceRealization, Trajectory};

use crate::config::{ExperimentConfig, Mode};
use crate::output::write_run_artifacts;

/// Synthesizes, validates and simulates; returns the trajectory and the
/// realized disturbance.
pub fn execute(
    config: &ExperimentConfig,
    force: bool,
) -> Result<(Trajectory, DisturbanceRealization)> {
    let spec = config.controller_spec()?;
    let report = validate_gains(&spec);
    if !report.all_ok() {
        if force {
            eprintln!("gain conditions overridden by --force:\n{report}");
        } else {
            bail!("gain conditions not satisfied (use --force to override):\n{report}");
        }
    }
    let ctrl = synthesize_with(
        &spec,
        SynthesisOptions {
            allow_nonincreasing_lambda: force,
            allow_small_m: force,
        },
    )?;
    let dist = config.disturbance_spec(config.seed).realize();

    let traj = match config.mode {
        Mode::Ct => {
            let opts = CtOptions {
                record_dt: config.record_dt(),
                ..CtOptions::default()
            };
            simulate_ct(&ctrl, &dist, &config.x0, config.t_final, &opts)?
        }
        Mode::Dt => {
            let h = config.h.context("dt mode requires h")?;
            let sys = DtSystem::new(ctrl, h)?;
            let k_max = (config.t_final / h).round() as usize;
            sys.simulate(&dist, &config.x0, k_max, 1)?
        }
    };
    Ok((traj, dist))
}

pub fn run_command(config_path: &Path, seed: Option<u64>, out: &Path, force: bool) -> Result<()> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let (traj, dist) = execute(&config, force)?;
    write_run_artifacts(out, &config, &traj, &dist)?;
    println!(
        "run complete: {} rows, {} steps, outputs in {}",
        traj.len(),
        traj.meta.steps,
        out.display()
    );
    Ok(())
}
