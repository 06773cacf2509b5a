//! Measurements on simulated and exact fields: shock detection and
//! tracking, vehicle trajectories, and theory-vs-simulation error metrics.
//!
//! These routines work in `f64` only.

mod compare;
mod detect;
mod field;
mod trajectories;

use thiserror::Error;

use crate::jamiton::JamitonError;

pub use compare::{compare_fields, compare_profiles, CompareOptions, FieldComparison, ProfileComparison};
pub use detect::{detect_jamitons, shock_candidates, DetectedWave, ShockCandidate};
pub use field::{RingField, TheoryTrain};
pub use trajectories::{trajectories_analytic, trajectories_sim, Trajectory, TrajectorySample};

/// Default shock threshold, in multiples of the ring-mean `|ρ_x|`.
pub const DEFAULT_THRESHOLD: f64 = 5.0;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Jamiton(#[from] JamitonError),
    #[error("no jamiton detected; nothing to compare")]
    NothingToCompare,
    #[error("need at least {needed} snapshots, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },
    #[error("snapshot interval {interval}: tracers move up to {displacement} m, more than one {cell} m cell")]
    InsufficientOutputRate { interval: usize, displacement: f64, cell: f64 },
    #[error("exact solution is not a periodic train")]
    NotPeriodic,
    #[error("ring of {ring_length} m does not hold a whole number of {wavelength} m wavelengths")]
    RingMismatch { ring_length: f64, wavelength: f64 },
    #[error("trajectory integration failed: {0}")]
    Integration(String),
    #[error("{0}")]
    InvalidInput(String),
}
