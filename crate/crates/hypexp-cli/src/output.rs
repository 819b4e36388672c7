//! Run artifacts: trajectory CSV, manifest, diagnostics.

use anyhow::{Context, Result};
use serde::Serialize;
use std::fs;
use std::path::Path;

use hypexp::analysis::steady_state_residuals;
use hypexp::{DisturbanceRealization, Trajectory};

use crate::config::ExperimentConfig;

#[derive(Serialize)]
struct RunSection {
    mode: String,
    seed: u64,
    uniform_draw: f64,
    code_version: String,
    spec_hash: String,
    steps: u64,
    min_step: f64,
    rows: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    run: RunSection,
    config: &'a ExperimentConfig,
}

/// Writes `trajectory.csv`, `manifest.toml` and `diagnostics.csv` into the
/// output directory. The manifest embeds the full configuration, so every
/// output is reproducible from the manifest alone.
pub fn write_run_artifacts(
    out_dir: &Path,
    config: &ExperimentConfig,
    traj: &Trajectory,
    dist: &DisturbanceRealization,
) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    fs::write(out_dir.join("trajectory.csv"), traj.to_csv_string())?;

    let manifest = Manifest {
        run: RunSection {
            mode: traj.meta.mode.as_str().to_string(),
            seed: traj.meta.seed,
            uniform_draw: traj.meta.uniform_draw,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            spec_hash: format!("{:016x}", traj.meta.spec_hash),
            steps: traj.meta.steps,
            min_step: traj.meta.min_step,
            rows: traj.len(),
        },
        config,
    };
    fs::write(out_dir.join("manifest.toml"), toml::to_string(&manifest)?)?;

    let mut diag = String::from("metric,value\n");
    let t_final = *traj.times.last().unwrap();
    let window = ((t_final - 2.0).max(0.0), t_final);
    let residuals = steady_state_residuals(traj, dist, window)?;
    for (i, r) in residuals.iter().enumerate() {
        diag.push_str(&format!("tail_residual_{},{}\n", i + 1, r));
    }
    let sup_x = traj.sup_norm_state();
    let sup_u = traj.controls.iter().fold(0.0f64, |m, u| m.max(u.abs()));
    diag.push_str(&format!("sup_state,{sup_x}\n"));
    diag.push_str(&format!("sup_control,{sup_u}\n"));
    if dist.spec.is_zero() && traj.n() >= 1 {
        let margin = hypexp::analysis::hyperexp_log_margin(traj, traj.meta.lambda[0], 1.0);
        diag.push_str(&format!("hyperexp_log_margin,{margin}\n"));
    }
    diag.push_str(&format!("window_start,{}\n", window.0));
    diag.push_str(&format!("window_end,{}\n", window.1));
    fs::write(out_dir.join("diagnostics.csv"), diag)?;
    Ok(())
}
