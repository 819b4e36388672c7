//! Time-varying state feedback for a chain of integrators with matched and
//! unmatched disturbances.
//!
//! The crate synthesizes the recursive controller
//! `u = -Omega(t, x) - lambda_n * sigma_n * psi^m` for an n-th order
//! integrator chain driven by a monotone gain `psi(t)`, builds the closed-loop
//! dynamics of the auxiliary variables `sigma = S(t) x`, and provides
//!
//! * a stiffness-aware continuous-time simulator,
//! * the implicit-Euler discrete-time closed loop with its closed-form
//!   resolvent, and
//! * a verification layer for the quantitative decay and robustness bounds
//!   (integral lemma constants, explicit third-order state bounds, decay
//!   envelopes, steady-state residuals).
//!
//! All symbolic objects are polynomials in the gain symbol `psi`; the small
//! computer-algebra layer lives in [`algebra`].

pub mod algebra;
pub mod analysis;
pub mod controller;
pub mod ct;
pub mod disturbance;
pub mod dt;
mod error;
pub mod gain;
pub mod quad;
pub mod sigma;
pub mod trajectory;

pub use algebra::form::StateLinearForm;
pub use algebra::matrix::PolyMatrix;
pub use algebra::poly::PsiPoly;
pub use controller::{ControllerSpec, SynthesizedController};
pub use disturbance::{ChannelSignal, DisturbanceRealization, DisturbanceSpec};
pub use error::{Error, Result};
pub use gain::{GainKind, GainSchedule};
pub use sigma::SigmaSystem;
pub use trajectory::Trajectory;
