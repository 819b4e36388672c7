use thiserror::Error;

/// Errors produced by synthesis, simulation and verification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not unit lower triangular")]
    NotUnitTriangular,

    #[error("invalid gain schedule: {0}")]
    GainSchedule(String),

    #[error("invalid controller spec: {0}")]
    Spec(String),

    #[error("closed-loop residual check failed: {0}")]
    SynthesisResidual(String),

    #[error("integration step underflow at t = {t} (h = {h:e}); the gain has made the loop too stiff for the horizon")]
    StepUnderflow { t: f64, h: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("r constant requires a*alpha > 1, got a = {a}, alpha = {alpha}")]
    Inadmissible { a: f64, alpha: f64 },

    #[error("gain conditions violated: {0}")]
    GainConditions(String),

    #[error("window [{a}, {b}] is outside the trajectory span")]
    WindowOutOfRange { a: f64, b: f64 },

    #[error("trajectory was generated with a nonzero disturbance")]
    DisturbedTrajectory,
}

pub type Result<T> = std::result::Result<T, Error>;
