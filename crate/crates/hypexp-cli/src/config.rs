//! Experiment configuration: a flat TOML file that round-trips losslessly
//! and fully determines a run together with its seed.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

use hypexp::{ChannelSignal, ControllerSpec, DisturbanceSpec, GainSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ct,
    Dt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerBlock {
    pub n: usize,
    pub lambda: Vec<f64>,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainBlock {
    /// "affine" for `1 + t`, "exp" for `a * exp(alpha t)`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinBlock {
    pub amp: f64,
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBlock {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sins: Vec<SinBlock>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub constant: f64,
    /// Multiplier of the per-run uniform draw U ~ [0, 1).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub uniform: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub t_final: f64,
    /// Discrete step (dt mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Recording grid (ct mode); defaults to 0.01.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_dt: Option<f64>,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub controller: ControllerBlock,
    pub gain: GainBlock,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disturbance: Vec<ChannelBlock>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate_shape()?;
        Ok(cfg)
    }

    pub fn validate_shape(&self) -> Result<()> {
        let n = self.controller.n;
        if self.controller.lambda.len() != n {
            bail!(
                "controller.lambda has {} entries, expected n = {n}",
                self.controller.lambda.len()
            );
        }
        if self.x0.len() != n {
            bail!("x0 has {} entries, expected n = {n}", self.x0.len());
        }
        if !self.disturbance.is_empty() && self.disturbance.len() != n {
            bail!(
                "disturbance has {} channels, expected 0 or n = {n}",
                self.disturbance.len()
            );
        }
        if self.mode == Mode::Dt && self.h.is_none() {
            bail!("dt mode requires the step key h");
        }
        if self.t_final.is_nan() || self.t_final <= 0.0 {
            bail!("t_final must be positive");
        }
        Ok(())
    }

    pub fn gain_schedule(&self) -> Result<GainSchedule> {
        let base = match self.gain.kind.as_str() {
            "affine" => GainSchedule::affine(),
            "exp" => {
                let a = self.gain.a.context("gain.kind = \"exp\" requires gain.a")?;
                let alpha = self
                    .gain
                    .alpha
                    .context("gain.kind = \"exp\" requires gain.alpha")?;
                GainSchedule::exponential(a, alpha)?
            }
            other => bail!("unknown gain.kind {other:?} (expected \"affine\" or \"exp\")"),
        };
        Ok(match self.gain.cap {
            Some(cap) => base.with_cap(cap)?,
            None => base,
        })
    }

    pub fn controller_spec(&self) -> Result<ControllerSpec> {
        Ok(ControllerSpec::new(
            self.controller.n,
            self.controller.lambda.clone(),
            self.controller.m,
            self.gain_schedule()?,
        )?)
    }

    pub fn disturbance_spec(&self, seed: u64) -> DisturbanceSpec {
        let channels: Vec<ChannelSignal> = if self.disturbance.is_empty() {
            vec![ChannelSignal::zero(); self.controller.n]
        } else {
            self.disturbance
                .iter()
                .map(|c| ChannelSignal {
                    sins: c
                        .sins
                        .iter()
                        .map(|s| hypexp::disturbance::SinTerm {
                            amp: s.amp,
                            freq: s.freq,
                            phase: s.phase,
                        })
                        .collect(),
                    constant: c.constant,
                    uniform_coeff: c.uniform,
                })
                .collect()
        };
        DisturbanceSpec::new(channels, seed)
    }

    pub fn record_dt(&self) -> f64 {
        self.record_dt.unwrap_or(0.01)
    }
}
