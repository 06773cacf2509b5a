//! Jamitons: self-sustained traveling waves in second-order traffic flow.
//!
//! The crate has two independent routes to the same waves:
//!
//! * [`jamiton`] constructs exact traveling-wave solutions of the
//!   mass/momentum system with relaxation, selecting the wave speed by
//!   regularity at the sonic point and closing the wave with a shock.
//! * [`particle`] evolves the full PDE on a ring road with a mesh-free
//!   Lagrangian particle method, from which trains of such waves emerge.
//!
//! [`analysis`] measures the simulated waves and compares them with the exact
//! ones. Numerical code is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below fix `f64`, which the stated tolerances assume.

pub mod analysis;
pub mod jamiton;
pub mod model;
pub mod numerics;
pub mod particle;
pub mod scalar;

pub use model::{ModelError, PAPER_FIG1};
pub use scalar::Scalar;

pub type ModelParams = model::ModelParams<f64>;
pub type EquilibriumState = model::EquilibriumState<f64>;
pub type WaveFrame = jamiton::WaveFrame<f64>;
pub type SonicState = jamiton::SonicState<f64>;
pub type JamitonSolution = jamiton::JamitonSolution<f64>;
pub type ProfileSample = jamiton::ProfileSample<f64>;
pub type SimConfig = particle::SimConfig<f64>;
pub type ParticleState = particle::ParticleState<f64>;
pub type FieldSnapshot = particle::FieldSnapshot<f64>;
