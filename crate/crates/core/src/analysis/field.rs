use crate::analysis::AnalysisError;
use crate::jamiton::{JamitonSolution, WaveKind};
use crate::numerics::interp::ring_linear;
use crate::particle::FieldSnapshot;

/// A density and speed field on a ring road at one instant.
pub trait RingField {
    fn ring_length(&self) -> f64;
    fn density_at(&self, x: f64) -> f64;
    fn speed_at(&self, x: f64) -> f64;
    /// Shock positions in `[0, L)`.
    fn shocks(&self) -> Vec<f64>;
}

impl RingField for FieldSnapshot<f64> {
    fn ring_length(&self) -> f64 {
        self.ring_length
    }

    fn density_at(&self, x: f64) -> f64 {
        ring_linear(&self.x, &self.rho, self.ring_length, x)
    }

    fn speed_at(&self, x: f64) -> f64 {
        ring_linear(&self.x, &self.u, self.ring_length, x)
    }

    fn shocks(&self) -> Vec<f64> {
        crate::analysis::detect::shock_candidates(self, crate::analysis::DEFAULT_THRESHOLD)
            .into_iter()
            .map(|c| c.position)
            .collect()
    }
}

/// An exact periodic train laid around a ring, seen at time `t`.
#[derive(Debug, Clone)]
pub struct TheoryTrain<'a> {
    pub solution: &'a JamitonSolution<f64>,
    pub ring_length: f64,
    pub t: f64,
    waves: usize,
}

impl<'a> TheoryTrain<'a> {
    /// The ring must hold a whole number of wavelengths.
    pub fn new(solution: &'a JamitonSolution<f64>, ring_length: f64, t: f64) -> Result<Self, AnalysisError> {
        let WaveKind::Periodic { wavelength_eta } = solution.kind else {
            return Err(AnalysisError::NotPeriodic);
        };
        let wavelength = wavelength_eta * solution.params.tau;
        let count = (ring_length / wavelength).round();
        if count < 1.0 || (count * wavelength - ring_length).abs() > 1e-9 * ring_length {
            return Err(AnalysisError::RingMismatch {
                ring_length,
                wavelength,
            });
        }
        Ok(Self {
            solution,
            ring_length,
            t,
            waves: count as usize,
        })
    }

    pub fn wave_count(&self) -> usize {
        self.waves
    }

    pub fn at_time(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    fn eta(&self, x: f64) -> f64 {
        self.solution.eta_of(x, self.t)
    }

    /// The field sampled at `n` equally spaced points, as a simulation would
    /// report it.
    pub fn to_snapshot(&self, n: usize) -> FieldSnapshot<f64> {
        let l = self.ring_length;
        let x: Vec<f64> = (0..n).map(|i| i as f64 * l / n as f64).collect();
        let u: Vec<f64> = x.iter().map(|&x| self.speed_at(x)).collect();
        let rho = u.iter().map(|&u| self.solution.frame.density(u)).collect();
        FieldSnapshot {
            t: self.t,
            ring_length: l,
            x,
            u,
            rho,
        }
    }
}

impl RingField for TheoryTrain<'_> {
    fn ring_length(&self) -> f64 {
        self.ring_length
    }

    fn density_at(&self, x: f64) -> f64 {
        self.solution.rho_at(self.eta(x))
    }

    fn speed_at(&self, x: f64) -> f64 {
        self.solution.u_at(self.eta(x))
    }

    fn shocks(&self) -> Vec<f64> {
        let l = self.ring_length;
        let spacing = l / self.waves as f64;
        let first = self.solution.x_of(0.0, self.t).rem_euclid(spacing);
        let mut out: Vec<f64> = (0..self.waves).map(|k| (first + k as f64 * spacing).rem_euclid(l)).collect();
        out.sort_by(f64::total_cmp);
        out
    }
}
