//! The `verify` subcommand family: machine-readable pass/fail reports plus
//! margin CSVs for the quantitative claims.

use anyhow::{bail, Result};
use serde::Serialize;
use std::fs;
use std::path::Path;

use hypexp::analysis::{lemma1_check, steady_state_residuals, ThirdOrderBounds};
use hypexp::controller::{synthesize, synthesize_with, ControllerSpec, SynthesisOptions};
use hypexp::ct::{simulate_ct, CtOptions};
use hypexp::disturbance::{ChannelSignal, DisturbanceSpec};
use hypexp::dt::DtSystem;
use hypexp::GainSchedule;

struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

fn unit_gain3() -> hypexp::SynthesizedController {
    let spec = ControllerSpec::new(3, vec![1.0; 3], 3, GainSchedule::affine()).unwrap();
    synthesize_with(
        &spec,
        SynthesisOptions {
            allow_nonincreasing_lambda: true,
            ..Default::default()
        },
    )
    .unwrap()
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    pass: bool,
    checks: Vec<T>,
}

fn write_report<T: Serialize>(out: &Path, name: &str, report: &Report<T>) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), toml::to_string(report)?)?;
    Ok(())
}

#[derive(Serialize)]
struct Lemma1Check {
    a: f64,
    alpha: f64,
    max_violation: f64,
    pass: bool,
}

pub fn lemma1(out: &Path) -> Result<()> {
    let mut rng = Lcg(0xa1fa);
    let tau_grid: Vec<f64> = (0..500).map(|k| 50.0 * k as f64 / 499.0).collect();
    let mut checks = Vec::new();
    let mut csv = String::from("a,alpha,max_violation\n");
    while checks.len() < 20 {
        let a = rng.range(0.5, 5.0);
        let alpha = rng.range(0.25, 4.0);
        if a * alpha <= 1.05 {
            continue;
        }
        let violation = lemma1_check(a, alpha, &tau_grid)?;
        csv.push_str(&format!("{a},{alpha},{violation}\n"));
        checks.push(Lemma1Check {
            a,
            alpha,
            max_violation: violation,
            pass: violation <= 1e-9,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = Report { pass, checks };
    write_report(out, "lemma1_report.toml", &report)?;
    fs::write(out.join("lemma1_margins.csv"), csv)?;
    println!(
        "lemma1: {} (20 admissible pairs, 500-point tau grids); reports in {}",
        if pass { "pass" } else { "FAIL" },
        out.display()
    );
    if !pass {
        bail!("integral bound violated; see lemma1_report.toml");
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundCheck {
    instance: u64,
    status: String,
    margin: f64,
    pass: bool,
}

pub fn bounds(out: &Path) -> Result<()> {
    let lambda = [1.0, 2.0, 4.0];
    let ev = ThirdOrderBounds::new(lambda)?;
    let flagged: Vec<String> = ev
        .inadmissible()
        .iter()
        .map(|r| format!("{} (a*alpha = {:.3})", r.label, r.a * r.alpha))
        .collect();
    if ev.advisory() {
        println!(
            "bounds: gains (1, 2, 4) make {} r constants inadmissible; bounds are advisory \
             and the domination check is skipped per instance:",
            flagged.len()
        );
        for f in &flagged {
            println!("  {f}");
        }
    }
    let spec = ControllerSpec::new(3, lambda.to_vec(), 4, GainSchedule::affine())?;
    let ctrl = synthesize(&spec)?;
    let mut rng = Lcg(0xb0b);
    let mut checks = Vec::new();
    let mut csv = String::from("instance,status,margin\n");
    for instance in 0..10u64 {
        let x0 = [
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
        ];
        let amp = rng.range(0.1, 0.57);
        let dist = DisturbanceSpec::new(
            vec![
                ChannelSignal::sin(amp, rng.range(0.5, 6.0)),
                ChannelSignal::cos(amp, rng.range(0.5, 6.0)),
                ChannelSignal::sin(amp, rng.range(0.5, 6.0)),
            ],
            instance,
        )
        .realize();
        let traj = simulate_ct(&ctrl, &dist, &x0, 8.0, &CtOptions::default())?;
        let s0 = ctrl.eval_sigma(0.0, &x0);
        let dn = dist.sup_bounds();
        let d_norms = [dn[0], dn[1], dn[2]];
        let mut margin = f64::NEG_INFINITY;
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let b1 = ev.x1_bound(*t, x0[0], s0[1], s0[2], d_norms);
            let b2 = ev.x2_bound(*t, x0[0], s0[1], s0[2], d_norms);
            margin = margin.max(x[0].abs() - b1).max(x[1].abs() - b2);
        }
        let (status, pass) = if ev.advisory() {
            ("skipped-advisory".to_string(), true)
        } else {
            ("checked".to_string(), margin <= 0.0)
        };
        csv.push_str(&format!("{instance},{status},{margin}\n"));
        checks.push(BoundCheck {
            instance,
            status,
            margin,
            pass,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = Report { pass, checks };
    write_report(out, "bounds_report.toml", &report)?;
    fs::write(out.join("bounds_margins.csv"), csv)?;
    println!(
        "bounds: {}; margins in {}",
        if pass { "pass" } else { "FAIL" },
        out.display()
    );
    if !pass {
        bail!("bound domination violated; see bounds_report.toml");
    }
    Ok(())
}

#[derive(Serialize)]
struct ResidualCheck {
    channel: usize,
    sup: f64,
    golden: f64,
    pass: bool,
}

/// Golden tail tolerances for the benchmark fixture, frozen from the
/// h = 5e-4, t_final = 20 reference run.
pub const RESIDUAL_GOLDEN: [f64; 3] = [0.12, 0.60, 3.0];

pub fn residuals(out: &Path, seed: u64) -> Result<()> {
    let sys = DtSystem::new(unit_gain3(), 0.001)?;
    let dist = DisturbanceSpec::bench3(seed).realize();
    let traj = sys.simulate(&dist, &[1.0, 1.0, 1.0], 10_000, 1)?;
    let sups = steady_state_residuals(&traj, &dist, (8.0, 10.0))?;
    let checks: Vec<ResidualCheck> = sups
        .iter()
        .zip(RESIDUAL_GOLDEN)
        .enumerate()
        .map(|(i, (s, g))| ResidualCheck {
            channel: i + 1,
            sup: *s,
            golden: g,
            pass: *s < g,
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    let mut csv = String::from("channel,sup,golden\n");
    for c in &checks {
        csv.push_str(&format!("{},{},{}\n", c.channel, c.sup, c.golden));
    }
    let report = Report { pass, checks };
    write_report(out, "residuals_report.toml", &report)?;
    fs::write(out.join("residuals.csv"), csv)?;
    println!(
        "residuals: {} (sup over [8, 10] = {:.4}, {:.4}, {:.4} vs golden {:?}); reports in {}",
        if pass { "pass" } else { "FAIL" },
        sups[0],
        sups[1],
        sups[2],
        RESIDUAL_GOLDEN,
        out.display()
    );
    if !pass {
        bail!("tail residuals exceed golden tolerances");
    }
    Ok(())
}

#[derive(Serialize)]
struct LimitCheck {
    n: usize,
    h: f64,
    dev_szs: f64,
    dev_szl: f64,
    pass: bool,
}

pub fn limits(out: &Path, t_probe: f64, tol: f64) -> Result<()> {
    let mut checks = Vec::new();
    let mut csv = String::new();
    for n in [3usize, 4] {
        for h in [1e-3, 1e-2] {
            let spec = ControllerSpec::new(n, vec![1.0; n], n as u32, GainSchedule::affine())?;
            let ctrl = synthesize_with(
                &spec,
                SynthesisOptions {
                    allow_nonincreasing_lambda: true,
                    ..Default::default()
                },
            )?;
            let sys = DtSystem::new(ctrl, h)?;
            let lm = sys.limit_matrices(t_probe);
            for (label, m) in [
                ("SinvZS", &lm.szs),
                ("SinvZL", &lm.szl),
                ("expected", &lm.expected),
            ] {
                csv.push_str(&format!("# n={n} h={h} {label}\n"));
                for i in 1..=n {
                    let row: Vec<String> = (1..=n).map(|j| format!("{}", m.get(i, j))).collect();
                    csv.push_str(&row.join(","));
                    csv.push('\n');
                }
            }
            checks.push(LimitCheck {
                n,
                h,
                dev_szs: lm.dev_szs,
                dev_szl: lm.dev_szl,
                pass: lm.dev_szs < tol && lm.dev_szl < tol,
            });
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!(
            "limits: n={} h={}: dev(S^-1 Z S) = {:.3e}, dev(S^-1 Z L) = {:.3e} [{}]",
            c.n,
            c.h,
            c.dev_szs,
            c.dev_szl,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    let report = Report { pass, checks };
    write_report(out, "limits_report.toml", &report)?;
    fs::write(out.join("limits_matrices.csv"), csv)?;
    println!(
        "limits: {} at t_probe = {t_probe:e}, tolerance {tol:e}; matrices in {}",
        if pass { "pass" } else { "FAIL" },
        out.display()
    );
    if !pass {
        bail!(
            "limit-matrix deviation exceeds {tol:e} at t_probe = {t_probe:e}; the deviation \
             scales like 1/(h*psi(t)), so deeper probes (e.g. --t-probe 1e7) tighten it"
        );
    }
    Ok(())
}
