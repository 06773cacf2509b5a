use crate::model::ModelParams;
use crate::particle::SimError;
use crate::scalar::{lit, Scalar};

/// Validated particle-count range.
pub const MIN_PARTICLES: usize = 1_000;
pub const MAX_PARTICLES: usize = 100_000;
/// Particles must outnumber the vehicles they represent by this factor.
pub const PARTICLES_PER_VEHICLE: f64 = 100.0;

/// Artificial viscosity `q = ρ(C₂Δu² + C₁c|Δu|)`, applied to compressing cells.
///
/// The linear part grows with the sound speed and keeps neighbours from
/// closing up near the jam density, where the pressure barrier alone holds
/// only finite energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viscosity<T> {
    pub quadratic: T,
    pub linear: T,
}

impl<T: Scalar> Default for Viscosity<T> {
    fn default() -> Self {
        Self {
            quadratic: lit(2.0),
            linear: lit(0.5),
        }
    }
}

/// Sinusoidal density perturbation of the initial uniform state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation<T> {
    /// Number of wavelengths around the ring.
    pub mode: usize,
    /// Relative density amplitude.
    pub amplitude: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    pub n_particles: usize,
    /// Ring circumference, m.
    pub ring_length: T,
    /// Vehicles represented by one particle.
    pub mass_per_particle: T,
    /// Courant factor. Values above about 0.85 leave the highest particle
    /// mode undamped by the time integrator.
    pub cfl: T,
    pub viscosity: Viscosity<T>,
    pub perturbation: Perturbation<T>,
    /// End time, s.
    pub t_end: T,
    /// Snapshot interval, s.
    pub output_every: T,
}

impl<T: Scalar> SimConfig<T> {
    /// Ring of `n_particles` at mean density `rho0` with default numerics
    /// (CFL 0.5, default viscosity) and no perturbation.
    pub fn for_density(n_particles: usize, ring_length: T, rho0: T) -> Self {
        Self {
            n_particles,
            ring_length,
            mass_per_particle: rho0 * ring_length / T::of_usize(n_particles),
            cfl: lit(0.5),
            viscosity: Viscosity::default(),
            perturbation: Perturbation {
                mode: 1,
                amplitude: T::zero(),
            },
            t_end: T::zero(),
            output_every: T::one(),
        }
    }

    /// Largest ring that keeps `PARTICLES_PER_VEHICLE` particles per vehicle.
    pub fn max_ring_length(n_particles: usize, rho0: T) -> T {
        T::of_usize(n_particles) / (lit::<T>(PARTICLES_PER_VEHICLE) * rho0)
    }

    pub fn total_vehicles(&self) -> T {
        T::of_usize(self.n_particles) * self.mass_per_particle
    }

    pub fn base_density(&self) -> T {
        self.total_vehicles() / self.ring_length
    }

    pub fn validate(&self, params: &ModelParams<T>) -> Result<(), SimError> {
        params.validate()?;
        let bad = |field: &'static str, reason: String| Err(SimError::InvalidConfig { field, reason });
        if !(MIN_PARTICLES..=MAX_PARTICLES).contains(&self.n_particles) {
            return bad(
                "n_particles",
                format!("{} outside [{MIN_PARTICLES}, {MAX_PARTICLES}]", self.n_particles),
            );
        }
        if !(self.ring_length > T::zero() && self.ring_length.is_finite()) {
            return bad("ring_length", format!("{} must be positive", self.ring_length));
        }
        if !(self.mass_per_particle > T::zero() && self.mass_per_particle.is_finite()) {
            return bad(
                "mass_per_particle",
                format!("{} must be positive", self.mass_per_particle),
            );
        }
        let vehicles = self.total_vehicles();
        // slack for ring lengths computed from `max_ring_length`
        let needed = lit::<T>(PARTICLES_PER_VEHICLE) * vehicles * (T::one() - lit(1e-9));
        if T::of_usize(self.n_particles) < needed {
            return bad(
                "n_particles",
                format!(
                    "{} particles for {} vehicles; need at least {PARTICLES_PER_VEHICLE} per vehicle",
                    self.n_particles, vehicles
                ),
            );
        }
        if !(self.base_density() < params.rho_max) {
            return bad(
                "mass_per_particle",
                format!("base density {} not below rho_max", self.base_density()),
            );
        }
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return bad("cfl", format!("{} outside (0, 1]", self.cfl));
        }
        let v = self.viscosity;
        if !(v.quadratic >= T::zero() && v.quadratic.is_finite()) {
            return bad("viscosity.quadratic", format!("{} must be non-negative", v.quadratic));
        }
        if !(v.linear >= T::zero() && v.linear.is_finite()) {
            return bad("viscosity.linear", format!("{} must be non-negative", v.linear));
        }
        let pert = self.perturbation;
        if !(pert.amplitude >= T::zero() && pert.amplitude.is_finite()) {
            return bad("perturbation.amplitude", format!("{} must be non-negative", pert.amplitude));
        }
        if pert.mode == 0 || 4 * pert.mode > self.n_particles {
            return bad(
                "perturbation.mode",
                format!("{} outside [1, n_particles/4]", pert.mode),
            );
        }
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            return bad("t_end", format!("{} must be non-negative", self.t_end));
        }
        if !(self.output_every > T::zero() && self.output_every.is_finite()) {
            return bad("output_every", format!("{} must be positive", self.output_every));
        }
        Ok(())
    }
}
