//! Existence map of jamitons over a grid of far-field densities.

use rayon::prelude::*;

use crate::jamiton::cj::cj_construct;
use crate::jamiton::shock::rh_jump;
use crate::jamiton::JamitonError;
use crate::model::ModelParams;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveMetrics<T> {
    pub s: T,
    pub m: T,
    /// Speed drop across the shock, `u₋ − u₊`.
    pub amplitude: T,
    /// Density jump across the shock, `ρ₊ − ρ₋`.
    pub density_jump: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistencePoint<T> {
    pub rho_minus: T,
    /// Metrics, or the reason no jamiton exists at this density.
    pub outcome: Result<WaveMetrics<T>, String>,
}

impl<T> ExistencePoint<T> {
    pub fn exists(&self) -> bool {
        self.outcome.is_ok()
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport<T> {
    pub points: Vec<ExistencePoint<T>>,
    /// Smallest and largest grid densities with a jamiton.
    pub existence_range: Option<(T, T)>,
    /// Linear-instability band, when there is one.
    pub critical: Option<(T, T)>,
    /// Whether the wave speed decreases monotonically across existing points.
    pub speed_monotone_decreasing: bool,
}

fn metrics<T: Scalar>(params: &ModelParams<T>, rho_minus: T) -> Result<WaveMetrics<T>, JamitonError> {
    let (frame, _) = cj_construct(params, rho_minus)?;
    let u_far = params.desired_speed(rho_minus)?;
    let jump = rh_jump(params, &frame, u_far)?;
    Ok(WaveMetrics {
        s: frame.s,
        m: frame.m,
        amplitude: u_far - jump.u_post,
        density_jump: frame.density(jump.u_post) - rho_minus,
    })
}

/// Evaluates jamiton existence at every grid density, in parallel.
pub fn sweep_existence<T: Scalar>(params: &ModelParams<T>, grid: &[T]) -> SweepReport<T> {
    let points: Vec<ExistencePoint<T>> = grid
        .par_iter()
        .map(|&rho_minus| ExistencePoint {
            rho_minus,
            outcome: metrics(params, rho_minus).map_err(|e| e.to_string()),
        })
        .collect();

    let existing: Vec<(T, T)> = points
        .iter()
        .filter_map(|p| p.outcome.as_ref().ok().map(|m| (p.rho_minus, m.s)))
        .collect();
    let existence_range = if existing.is_empty() {
        None
    } else {
        let lo = existing.iter().map(|e| e.0).fold(T::infinity(), T::min);
        let hi = existing.iter().map(|e| e.0).fold(T::neg_infinity(), T::max);
        Some((lo, hi))
    };
    let mut sorted = existing;
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let speed_monotone_decreasing = sorted.windows(2).all(|w| w[1].1 < w[0].1);

    SweepReport {
        points,
        existence_range,
        critical: params.critical_densities().ok(),
        speed_monotone_decreasing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_grid_all_exist() {
        let p = ModelParams::<f64>::paper_fig1();
        let grid: Vec<f64> = [0.1, 0.2, 0.3, 0.4, 0.5].iter().map(|f| f * 0.2).collect();
        let report = sweep_existence(&p, &grid);
        assert!(report.points.iter().all(|pt| pt.exists()));
        assert!(report.speed_monotone_decreasing);
    }

    #[test]
    fn below_band_does_not_exist() {
        let p = ModelParams::<f64>::paper_fig1();
        let (lo, hi) = p.critical_densities().unwrap();
        let report = sweep_existence(&p, &[0.5 * lo, 0.05, 0.5 * (hi + 0.2)]);
        assert!(!report.points[0].exists());
        assert!(report.points[1].exists());
        assert!(!report.points[2].exists());
        assert_eq!(report.existence_range, Some((0.05, 0.05)));
        assert_eq!(report.critical, Some((lo, hi)));
    }
}
