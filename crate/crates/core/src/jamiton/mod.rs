//! Exact traveling-wave solutions ("jamitons").
//!
//! A jamiton is a shock followed by a smooth relaxation zone that passes
//! through a sonic point, where vehicles move relative to the wave at the
//! local sound speed. Requiring the wave ODE to stay regular there selects
//! the wave speed, in the same way the Chapman–Jouguet condition selects the
//! speed of a self-sustained detonation.

use thiserror::Error;

use crate::model::ModelError;

pub mod cj;
pub mod frame;
pub mod profile;
pub mod shock;
pub mod solution;
pub mod sweep;

pub use cj::{cj_closed_form, cj_construct, sonic_slope};
pub use frame::{ode_rhs, SonicState, WaveFrame};
pub use profile::{
    eta_between, integrate_profile, ProfileSample, UpperStop, DEFAULT_SONIC_OFFSET,
    EQUILIBRIUM_TOL,
};
pub use shock::{rh_jump, rh_residual, ShockJump};
pub use solution::{
    matched_periodic_train, periodic_train, solitary_jamiton, solitary_jamiton_with_offset,
    FlowState, JamitonSolution, WaveKind,
};
pub use sweep::{sweep_existence, ExistencePoint, SweepReport, WaveMetrics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JamitonError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid wave frame (s = {s}, m = {m})")]
    InvalidFrame { s: f64, m: f64 },
    #[error("speed u = {u} does not lie on the wave (s = {s}, m = {m})")]
    OutsideWave { u: f64, s: f64, m: f64 },
    #[error("wave ODE denominator vanishes at u = {u} while the numerator does not")]
    SonicSingularity { u: f64 },
    #[error("no jamiton for rho_minus = {rho_minus}: {reason}")]
    NoJamiton { rho_minus: f64, reason: String },
    #[error("convergence failure: {detail}")]
    ConvergenceFailure { detail: String },
    #[error("no shock partner for u_pre = {u_pre} below the jam density")]
    NoJumpRoot { u_pre: f64 },
    #[error("degenerate sonic point at u_s = {u_s}")]
    DegenerateSonic { u_s: f64 },
    #[error("could not leave the sonic point with offset eps = {eps}")]
    SonicEscapeFailure { eps: f64 },
    #[error("profile integration left the admissible range at u = {u}, eta = {eta}")]
    IntegrationOutOfRange { u: f64, eta: f64 },
    #[error("wavelength {requested} (in eta) infeasible; solitary extent is {max}")]
    WavelengthInfeasible { requested: f64, max: f64 },
}
