//! Lagrangian particle simulation of the traffic PDE on a ring road.
//!
//! Each particle carries a fixed number of vehicles `μ`. The pressure force is
//! written in conservative form over the cells between neighbours, so total
//! momentum changes only through relaxation. Shocks are captured with a
//! von Neumann–Richtmyer viscosity, quadratic plus a linear sound-speed
//! term, active in compression.

mod config;
mod dynamics;
mod state;

use thiserror::Error;

use crate::model::ModelError;

pub use config::{Perturbation, SimConfig, Viscosity, MAX_PARTICLES, MIN_PARTICLES, PARTICLES_PER_VEHICLE};
pub use dynamics::{accel, run, stable_dt, Simulation};
pub use state::{density_estimate, init_uniform_perturbed, kernel_density_estimate, FieldSnapshot, ParticleState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid simulation setting `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("perturbation amplitude {amplitude} would reorder particles")]
    InvalidPerturbation { amplitude: f64 },
    #[error("particles {index} and its neighbour coincide or crossed")]
    DegenerateSpacing { index: usize },
    #[error("density {rho} at cell {index} reached the jam density")]
    DensityOverflow { index: usize, rho: f64 },
    #[error("non-finite value at particle {index}")]
    NonFinite { index: usize },
    #[error("step at t = {t} failed after {retries} halvings")]
    StepFailed {
        t: f64,
        retries: usize,
        #[source]
        cause: Box<SimError>,
    },
}
