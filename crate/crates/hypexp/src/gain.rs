//! The monotone time-varying gain `psi(t)`, its derivative closure, and the
//! saturated variant used for the bounded-control / ISS mode.

use crate::error::{Error, Result};

/// Shape of the gain schedule.
///
/// Only schedules whose derivative is affine in the gain itself
/// (`dpsi/dt = c0 + c1*psi`) are admitted, so that differentiating a
/// polynomial in `psi` stays polynomial. Gains of the form `b*t^t` or
/// `psi0/(T - t)` are outside this class and are not supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainKind {
    /// `psi(t) = 1 + t`
    AffineTime,
    /// `psi(t) = a * exp(alpha * t)`, `a > 0`, `alpha > 0`
    Exponential { a: f64, alpha: f64 },
}

/// Gain schedule with an optional saturation cap.
///
/// Saturation is value substitution only: the synthesized polynomial
/// expressions are evaluated at `min(psi(t), cap)`. All derivative-of-gain
/// dependence inside the controller is baked into the polynomials at
/// synthesis time under the unclamped closure; the reported derivative drops
/// to zero past the clamp point for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSchedule {
    kind: GainKind,
    cap: Option<f64>,
}

impl GainSchedule {
    /// The default schedule `psi(t) = 1 + t`.
    pub fn affine() -> Self {
        Self {
            kind: GainKind::AffineTime,
            cap: None,
        }
    }

    pub fn exponential(a: f64, alpha: f64) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::GainSchedule(format!("a must be positive, got {a}")));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::GainSchedule(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        Ok(Self {
            kind: GainKind::Exponential { a, alpha },
            cap: None,
        })
    }

    /// Returns a copy with the saturation cap `min(psi(t), cap)` installed.
    pub fn with_cap(self, cap: f64) -> Result<Self> {
        if !cap.is_finite() || cap <= 0.0 {
            return Err(Error::GainSchedule(format!(
                "cap must be positive, got {cap}"
            )));
        }
        Ok(Self {
            kind: self.kind,
            cap: Some(cap),
        })
    }

    pub fn kind(&self) -> GainKind {
        self.kind
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    /// Unclamped gain value.
    pub fn raw_value(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match self.kind {
            GainKind::AffineTime => 1.0 + t,
            GainKind::Exponential { a, alpha } => a * (alpha * t).exp(),
        }
    }

    /// Effective gain `min(psi(t), cap)`.
    pub fn value(&self, t: f64) -> f64 {
        let v = self.raw_value(t);
        match self.cap {
            Some(cap) => v.min(cap),
            None => v,
        }
    }

    /// Closure coefficients `(c0, c1)` with `dpsi/dt = c0 + c1*psi`.
    pub fn closure(&self) -> (f64, f64) {
        match self.kind {
            GainKind::AffineTime => (1.0, 0.0),
            GainKind::Exponential { alpha, .. } => (0.0, alpha),
        }
    }

    /// Derivative of the effective gain: `c0 + c1*psi(t)` below the cap,
    /// zero once the unclamped value exceeds it.
    pub fn derivative(&self, t: f64) -> f64 {
        let raw = self.raw_value(t);
        if let Some(cap) = self.cap {
            if raw > cap {
                return 0.0;
            }
        }
        let (c0, c1) = self.closure();
        c0 + c1 * raw
    }
}
