//! Bounded disturbance signals with analytic derivatives.
//!
//! Each channel is a finite sum of sinusoids plus a fixed constant plus a
//! seeded uniform constant drawn once per run, so every realization is
//! essentially bounded and reproducible from its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

/// One sinusoidal term `amp * sin(freq * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinTerm {
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
}

/// A single disturbance channel
/// `sum_k amp_k sin(freq_k t + phase_k) + constant + uniform_coeff * U`,
/// where `U ~ Uniform[0,1)` is drawn once per run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelSignal {
    pub sins: Vec<SinTerm>,
    pub constant: f64,
    pub uniform_coeff: f64,
}

impl ChannelSignal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn sin(amp: f64, freq: f64) -> Self {
        Self {
            sins: vec![SinTerm {
                amp,
                freq,
                phase: 0.0,
            }],
            ..Default::default()
        }
    }

    pub fn cos(amp: f64, freq: f64) -> Self {
        Self {
            sins: vec![SinTerm {
                amp,
                freq,
                phase: FRAC_PI_2,
            }],
            ..Default::default()
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Default::default()
        }
    }

    pub fn with_uniform(mut self, coeff: f64) -> Self {
        self.uniform_coeff = coeff;
        self
    }

    /// `order`-th time derivative at `t` for the given uniform draw
    /// (`order = 0` is the value itself).
    pub fn eval_deriv(&self, t: f64, u: f64, order: u32) -> f64 {
        let mut acc = if order == 0 {
            self.constant + self.uniform_coeff * u
        } else {
            0.0
        };
        for s in &self.sins {
            acc += s.amp
                * s.freq.powi(order as i32)
                * (s.freq * t + s.phase + order as f64 * FRAC_PI_2).sin();
        }
        acc
    }

    /// Analytic bound `sum |amp| + |constant| + |uniform_coeff|` on the
    /// channel magnitude.
    pub fn sup_bound(&self) -> f64 {
        self.sins.iter().map(|s| s.amp.abs()).sum::<f64>()
            + self.constant.abs()
            + self.uniform_coeff.abs()
    }

    pub fn is_zero(&self) -> bool {
        self.sins.iter().all(|s| s.amp == 0.0) && self.constant == 0.0 && self.uniform_coeff == 0.0
    }
}

/// Per-channel disturbance description plus the seed for the uniform draw.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSpec {
    pub channels: Vec<ChannelSignal>,
    pub seed: u64,
}

impl DisturbanceSpec {
    pub fn zero(n: usize) -> Self {
        Self {
            channels: vec![ChannelSignal::zero(); n],
            seed: 0,
        }
    }

    pub fn new(channels: Vec<ChannelSignal>, seed: u64) -> Self {
        Self { channels, seed }
    }

    /// The worked-simulation disturbance for a third-order chain:
    /// `d_1 = sin 5t`, `d_2 = sin 7t`, `d_3 = cos 3t - U`.
    pub fn bench3(seed: u64) -> Self {
        Self {
            channels: vec![
                ChannelSignal::sin(1.0, 5.0),
                ChannelSignal::sin(1.0, 7.0),
                ChannelSignal::cos(1.0, 3.0).with_uniform(-1.0),
            ],
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.channels.len()
    }

    pub fn is_zero(&self) -> bool {
        self.channels.iter().all(|c| c.is_zero())
    }

    /// Draws the per-run uniform constant and returns the realized signal.
    pub fn realize(&self) -> DisturbanceRealization {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let uniform_draw: f64 = rng.random();
        DisturbanceRealization {
            spec: self.clone(),
            uniform_draw,
        }
    }
}

/// A disturbance with its uniform constant fixed; evaluation is pure.
#[derive(Debug, Clone)]
pub struct DisturbanceRealization {
    pub spec: DisturbanceSpec,
    pub uniform_draw: f64,
}

impl DisturbanceRealization {
    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// Channel values at `t`.
    pub fn value(&self, t: f64) -> Vec<f64> {
        self.spec
            .channels
            .iter()
            .map(|c| c.eval_deriv(t, self.uniform_draw, 0))
            .collect()
    }

    /// `(d(t), d'(t))` channel-wise.
    pub fn value_and_derivative(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.value(t);
        let ddot = self
            .spec
            .channels
            .iter()
            .map(|c| c.eval_deriv(t, self.uniform_draw, 1))
            .collect();
        (d, ddot)
    }

    pub fn derivative_of_order(&self, channel: usize, t: f64, order: u32) -> f64 {
        self.spec.channels[channel].eval_deriv(t, self.uniform_draw, order)
    }

    /// Per-channel analytic sup bounds.
    pub fn sup_bounds(&self) -> Vec<f64> {
        self.spec.channels.iter().map(|c| c.sup_bound()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_channel_value_and_slope() {
        let d = DisturbanceSpec::new(vec![ChannelSignal::sin(1.0, 5.0)], 0).realize();
        let (v, dv) = d.value_and_derivative(0.0);
        assert!(v[0].abs() < 1e-15);
        assert!((dv[0] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_with_uniform_offset() {
        let spec = DisturbanceSpec::bench3(7);
        let d = spec.realize();
        let u = d.uniform_draw;
        assert!((0.0..1.0).contains(&u));
        let (v, dv) = d.value_and_derivative(0.0);
        assert!((v[2] - (1.0 - u)).abs() < 1e-12);
        assert!(dv[2].abs() < 1e-12);
        // same seed, same draw
        assert_eq!(spec.realize().uniform_draw, u);
        assert_ne!(DisturbanceSpec::bench3(8).realize().uniform_draw, u);
    }

    #[test]
    fn zero_spec() {
        let d = DisturbanceSpec::zero(3).realize();
        let (v, dv) = d.value_and_derivative(2.3);
        assert_eq!(v, vec![0.0; 3]);
        assert_eq!(dv, vec![0.0; 3]);
        assert!(d.spec.is_zero());
    }

    #[test]
    fn bounded_by_sup_bound() {
        let spec = DisturbanceSpec::bench3(42);
        let d = spec.realize();
        let bounds = d.sup_bounds();
        for k in 0..2000 {
            let t = k as f64 * 0.01;
            for (v, b) in d.value(t).iter().zip(&bounds) {
                assert!(v.abs() <= *b + 1e-12);
            }
        }
    }

    #[test]
    fn higher_derivatives_match_differentiated_sines() {
        let d = DisturbanceSpec::new(vec![ChannelSignal::sin(0.5, 3.0)], 1).realize();
        // second derivative of 0.5 sin 3t is -4.5 sin 3t
        let t = 0.37;
        assert!((d.derivative_of_order(0, t, 2) + 4.5 * (3.0 * t).sin()).abs() < 1e-12);
    }
}
