//! The `sweep` subcommand: a finite grid of independent cells (gain ratios,
//! saturation caps, step sizes), run concurrently, aggregated into one
//! summary CSV. Partial failures are recorded per cell and the sweep
//! continues.

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use hypexp::controller::{
    synthesize, synthesize_with, validate_gains, ControllerSpec, SynthesisOptions,
};
use hypexp::ct::{simulate_ct, CtOptions};
use hypexp::disturbance::{ChannelSignal, DisturbanceSpec};
use hypexp::dt::DtSystem;
use hypexp::GainSchedule;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CellSpec {
    /// Second-order loop with gains `(1, ratio)`; checks the ratio
    /// condition and measures the disturbed tail.
    LambdaRatio { ratio: f64 },
    /// Saturated second-order loop; measures boundedness and the tail level
    /// of the first state. Omit `cap` for the unsaturated baseline.
    Cap {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<f64>,
    },
    /// Implicit-Euler step cell: error against a fine continuous reference
    /// on [0, 2] for the third-order unit-gain benchmark loop.
    HConsistency { h: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub cell: Vec<CellSpec>,
}

#[derive(Debug, Serialize)]
struct CellOutcome {
    cell: usize,
    kind: String,
    param: String,
    status: String,
    detail: String,
}

fn run_lambda_ratio(ratio: f64, seed: u64, dir: &Path) -> Result<(String, String)> {
    let spec = ControllerSpec::new(2, vec![1.0, ratio], 2, GainSchedule::affine())?;
    let report = validate_gains(&spec);
    let flagged = !report.all_ok();
    let ctrl = synthesize_with(
        &spec,
        SynthesisOptions {
            allow_nonincreasing_lambda: true,
            ..Default::default()
        },
    )?;
    let dist = DisturbanceSpec::new(
        vec![ChannelSignal::sin(0.5, 3.0), ChannelSignal::zero()],
        seed,
    )
    .realize();
    let traj = simulate_ct(&ctrl, &dist, &[1.0, 0.0], 6.0, &CtOptions::default())?;
    fs::write(dir.join("trajectory.csv"), traj.to_csv_string())?;
    let (lo, hi) = traj.window_indices(4.0, 6.0)?;
    let tail: f64 = (lo..=hi)
        .map(|k| traj.states[k][0].abs())
        .fold(0.0, f64::max);
    let status = if flagged { "flagged" } else { "pass" };
    Ok((
        status.into(),
        format!(
            "tail_x1={tail:.5};ratio_condition={}",
            if flagged { "violated" } else { "met" }
        ),
    ))
}

fn run_cap(cap: Option<f64>, seed: u64, dir: &Path) -> Result<(String, String)> {
    let schedule = match cap {
        Some(c) => GainSchedule::affine().with_cap(c)?,
        None => GainSchedule::affine(),
    };
    let spec = ControllerSpec::new(2, vec![1.0, 2.0], 2, schedule)?;
    let ctrl = synthesize(&spec)?;
    let dist = DisturbanceSpec::new(
        vec![ChannelSignal::sin(0.7, 5.0), ChannelSignal::cos(0.7, 3.0)],
        seed,
    )
    .realize();
    let traj = simulate_ct(&ctrl, &dist, &[1.0, 1.0], 50.0, &CtOptions::default())?;
    fs::write(dir.join("trajectory.csv"), traj.to_csv_string())?;
    let sup_x = traj.sup_norm_state();
    let half = traj.len() / 2;
    let max_first: f64 = traj.states[..half]
        .iter()
        .flat_map(|x| x.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let stabilized = sup_x <= max_first * 1.05;
    let (lo, hi) = traj.window_indices(40.0, 50.0)?;
    let tail: f64 = (lo..=hi)
        .map(|k| traj.states[k][0].abs())
        .fold(0.0, f64::max);
    let status = if sup_x.is_finite() && stabilized {
        "pass"
    } else {
        "fail"
    };
    Ok((
        status.into(),
        format!("sup_state={sup_x:.4};tail_x1={tail:.5};stabilized={stabilized}"),
    ))
}

fn unit_gain3() -> Result<hypexp::SynthesizedController> {
    let spec = ControllerSpec::new(3, vec![1.0; 3], 3, GainSchedule::affine())?;
    Ok(synthesize_with(
        &spec,
        SynthesisOptions {
            allow_nonincreasing_lambda: true,
            ..Default::default()
        },
    )?)
}

fn run_h_consistency(h: f64, seed: u64, dir: &Path) -> Result<(String, String)> {
    let sys = DtSystem::new(unit_gain3()?, h)?;
    let dist = DisturbanceSpec::bench3(seed).realize();
    let k_max = (2.0 / h).round() as usize;
    let dt_traj = sys.simulate(&dist, &[1.0, 1.0, 1.0], k_max, 1)?;
    fs::write(dir.join("trajectory.csv"), dt_traj.to_csv_string())?;
    let ct_opts = CtOptions {
        h_max: 1e-4,
        c_stab: 0.5,
        record_dt: h,
    };
    let ct_traj = simulate_ct(&unit_gain3()?, &dist, &[1.0, 1.0, 1.0], 2.0, &ct_opts)?;
    let mut err = 0.0f64;
    for k in 0..dt_traj.len() {
        for j in 0..3 {
            err = err.max((dt_traj.states[k][j] - ct_traj.states[k][j]).abs());
        }
    }
    Ok(("pass".into(), format!("max_error={err:.6}")))
}

pub fn sweep(config_path: &Path, out: &Path, workers: Option<usize>) -> Result<()> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading sweep config {}", config_path.display()))?;
    let config: SweepConfig = toml::from_str(&text)
        .with_context(|| format!("parsing sweep config {}", config_path.display()))?;
    fs::create_dir_all(out)?;

    let n_workers = workers
        .or(config.workers)
        .unwrap_or_else(|| config.cell.len().clamp(1, 4));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n_workers)
        .build()
        .context("building worker pool")?;

    let cells: Vec<(usize, CellSpec, PathBuf)> = config
        .cell
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let kind = match c {
                CellSpec::LambdaRatio { .. } => "lambda-ratio",
                CellSpec::Cap { .. } => "cap",
                CellSpec::HConsistency { .. } => "h-consistency",
            };
            (i, c.clone(), out.join(format!("cell-{i:02}-{kind}")))
        })
        .collect();

    let seed = config.seed;
    let mut outcomes: Vec<CellOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|(i, spec, dir)| {
                if let Err(e) = fs::create_dir_all(dir) {
                    return CellOutcome {
                        cell: *i,
                        kind: "unknown".into(),
                        param: String::new(),
                        status: "error".into(),
                        detail: e.to_string(),
                    };
                }
                let (kind, param, result) = match spec {
                    CellSpec::LambdaRatio { ratio } => (
                        "lambda-ratio",
                        format!("{ratio}"),
                        run_lambda_ratio(*ratio, seed, dir),
                    ),
                    CellSpec::Cap { cap } => (
                        "cap",
                        cap.map(|c| c.to_string()).unwrap_or_else(|| "inf".into()),
                        run_cap(*cap, seed, dir),
                    ),
                    CellSpec::HConsistency { h } => (
                        "h-consistency",
                        format!("{h}"),
                        run_h_consistency(*h, seed, dir),
                    ),
                };
                match result {
                    Ok((status, detail)) => CellOutcome {
                        cell: *i,
                        kind: kind.into(),
                        param,
                        status,
                        detail,
                    },
                    Err(e) => CellOutcome {
                        cell: *i,
                        kind: kind.into(),
                        param,
                        status: "error".into(),
                        detail: e.to_string().replace(['\n', ','], ";"),
                    },
                }
            })
            .collect()
    });
    outcomes.sort_by_key(|o| o.cell);

    // first-order check across consecutive step cells
    let h_cells: Vec<(f64, f64)> = outcomes
        .iter()
        .filter(|o| o.kind == "h-consistency" && o.status == "pass")
        .filter_map(|o| {
            let h: f64 = o.param.parse().ok()?;
            let err: f64 = o.detail.strip_prefix("max_error=")?.parse().ok()?;
            Some((h, err))
        })
        .collect();

    let mut csv = String::from("cell,kind,param,status,detail\n");
    for o in &outcomes {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            o.cell, o.kind, o.param, o.status, o.detail
        ));
    }
    for w in h_cells.windows(2) {
        let ratio = w[1].1 / w[0].1;
        csv.push_str(&format!(
            "-,error-ratio,{}/{},info,ratio={ratio:.4}\n",
            w[1].0, w[0].0
        ));
    }
    fs::write(out.join("summary.csv"), &csv)?;

    let errors = outcomes.iter().filter(|o| o.status == "error").count();
    println!(
        "sweep complete: {} cells ({errors} errors); summary in {}",
        outcomes.len(),
        out.join("summary.csv").display()
    );
    if errors > 0 {
        anyhow::bail!("{errors} sweep cells errored; see summary.csv");
    }
    Ok(())
}
