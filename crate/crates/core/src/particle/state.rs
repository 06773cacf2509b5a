use crate::model::ModelParams;
use crate::particle::{SimConfig, SimError};
use crate::scalar::{lit, Scalar};

/// Particle positions and velocities on a ring.
///
/// Positions are kept unwrapped and strictly increasing, with
/// `x[0] ∈ [0, L)` and `x[n−1] − x[0] < L`. Each particle carries `mu` vehicles.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState<T> {
    pub t: T,
    pub x: Vec<T>,
    pub u: Vec<T>,
    pub mu: T,
    pub ring_length: T,
}

impl<T: Scalar> ParticleState<T> {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Distance from particle `i` to its downstream neighbour.
    #[inline]
    pub fn gap(&self, i: usize) -> T {
        gap(&self.x, self.ring_length, i)
    }

    pub(crate) fn rewrap(&mut self) {
        let l = self.ring_length;
        if self.x[0] >= l {
            self.x.iter_mut().for_each(|x| *x = *x - l);
        } else if self.x[0] < T::zero() {
            self.x.iter_mut().for_each(|x| *x = *x + l);
        }
    }

    pub fn total_vehicles(&self) -> T {
        T::of_usize(self.len()) * self.mu
    }
}

#[inline]
pub(crate) fn gap<T: Scalar>(x: &[T], ring_length: T, i: usize) -> T {
    let n = x.len();
    if i + 1 < n {
        x[i + 1] - x[i]
    } else {
        x[0] + ring_length - x[n - 1]
    }
}

/// Density at each particle from its two neighbours: `ρ_i = 2μ/(x_{i+1} − x_{i−1})`.
pub fn density_estimate<T: Scalar>(state: &ParticleState<T>) -> Result<Vec<T>, SimError> {
    let n = state.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let left = state.gap((i + n - 1) % n);
        let right = state.gap(i);
        if !(left > T::zero() && right > T::zero()) {
            return Err(SimError::DegenerateSpacing {
                index: if left > T::zero() { i } else { (i + n - 1) % n },
            });
        }
        out.push(lit::<T>(2.0) * state.mu / (left + right));
    }
    Ok(out)
}

/// Kernel-sum density with a cubic B-spline of smoothing length `h`.
/// A cross-check for [`density_estimate`] in smooth regions.
pub fn kernel_density_estimate<T: Scalar>(state: &ParticleState<T>, h: T) -> Vec<T> {
    let n = state.len();
    let l = state.ring_length;
    let norm = lit::<T>(2.0 / 3.0) / h;
    let w = |r: T| {
        let q = (r / h).abs();
        if q < T::one() {
            norm * (T::one() - lit::<T>(1.5) * q * q + lit::<T>(0.75) * q * q * q)
        } else if q < lit(2.0) {
            let t = lit::<T>(2.0) - q;
            norm * lit::<T>(0.25) * t * t * t
        } else {
            T::zero()
        }
    };
    let reach = lit::<T>(2.0) * h;
    (0..n)
        .map(|i| {
            let mut sum = w(T::zero());
            for dir in [1isize, -1] {
                let mut k = 1usize;
                while k < n {
                    let j = (i as isize + dir * k as isize).rem_euclid(n as isize) as usize;
                    let mut d = state.x[j] - state.x[i];
                    if dir > 0 && j < i {
                        d = d + l;
                    }
                    if dir < 0 && j > i {
                        d = d - l;
                    }
                    if d.abs() >= reach {
                        break;
                    }
                    sum = sum + w(d);
                    k += 1;
                }
            }
            state.mu * sum
        })
        .collect()
}

/// Uniform ring with a sinusoidal density perturbation of relative amplitude
/// `a` and mode `k`, at rest relative to the equilibrium speed of the local
/// density.
pub fn init_uniform_perturbed<T: Scalar>(
    config: &SimConfig<T>,
    params: &ModelParams<T>,
) -> Result<ParticleState<T>, SimError> {
    config.validate(params)?;
    let n = config.n_particles;
    let l = config.ring_length;
    let a = config.perturbation.amplitude;
    if a >= T::one() {
        return Err(SimError::InvalidPerturbation {
            amplitude: a.as_f64(),
        });
    }
    let k = T::of_usize(config.perturbation.mode);
    let two_pi = T::TAU();
    // x = X − a L/(2πk) sin(2πk X/L) gives ρ = ρ0/(1 − a cos(2πk X/L))
    let x: Vec<T> = (0..n)
        .map(|j| {
            let xl = T::of_usize(j) * l / T::of_usize(n);
            xl - a * l / (two_pi * k) * (two_pi * k * xl / l).sin()
        })
        .collect();
    let mut state = ParticleState {
        t: T::zero(),
        x,
        u: vec![T::zero(); n],
        mu: config.mass_per_particle,
        ring_length: l,
    };
    let rho = density_estimate(&state).map_err(|_| SimError::InvalidPerturbation {
        amplitude: a.as_f64(),
    })?;
    for (i, r) in rho.iter().enumerate() {
        if !(*r < params.rho_max) {
            return Err(SimError::DensityOverflow {
                index: i,
                rho: r.as_f64(),
            });
        }
        state.u[i] = params.desired_speed_unchecked(*r);
    }
    Ok(state)
}

/// Fields on the ring at one instant, with positions wrapped into `[0, L)`
/// and sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot<T> {
    pub t: T,
    pub ring_length: T,
    pub x: Vec<T>,
    pub u: Vec<T>,
    pub rho: Vec<T>,
}

impl<T: Scalar> FieldSnapshot<T> {
    pub fn from_state(state: &ParticleState<T>) -> Result<Self, SimError> {
        let rho = density_estimate(state)?;
        let l = state.ring_length;
        let n = state.len();
        let wrapped: Vec<T> = state.x.iter().map(|&x| if x >= l { x - l } else { x }).collect();
        // rotation so that the smallest wrapped position comes first
        let start = (0..n).find(|&i| state.x[i] >= l).unwrap_or(0);
        let rot = |v: &[T]| v[start..].iter().chain(&v[..start]).copied().collect::<Vec<T>>();
        Ok(Self {
            t: state.t,
            ring_length: l,
            x: rot(&wrapped),
            u: rot(&state.u),
            rho: rot(&rho),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Largest minus smallest density.
    pub fn density_range(&self) -> T {
        let (lo, hi) = self
            .rho
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particle::Perturbation;

    fn ring(n: usize, l: f64, rho0: f64) -> ParticleState<f64> {
        ParticleState {
            t: 0.0,
            x: (0..n).map(|i| i as f64 * l / n as f64).collect(),
            u: vec![0.0; n],
            mu: rho0 * l / n as f64,
            ring_length: l,
        }
    }

    #[test]
    fn uniform_density_is_exact() {
        let s = ring(50, 10.0, 0.05);
        for r in density_estimate(&s).unwrap() {
            assert!((r - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_agrees_in_smooth_regions() {
        let p = ModelParams::<f64>::paper_fig1();
        let mut c = SimConfig::for_density(2_000, 400.0, 0.05);
        c.perturbation = Perturbation {
            mode: 2,
            amplitude: 0.1,
        };
        let s: ParticleState<f64> = init_uniform_perturbed(&c, &p).unwrap();
        let a = density_estimate(&s).unwrap();
        let b = kernel_density_estimate(&s, 4.0 * 400.0 / 2_000.0);
        let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs() / x).fold(0.0, f64::max);
        assert!(worst < 2e-3, "{worst}");
    }

    #[test]
    fn perturbation_shape_and_mass() {
        let p = ModelParams::<f64>::paper_fig1();
        let mut c = SimConfig::for_density(4_000, 600.0, 0.04);
        c.perturbation = Perturbation {
            mode: 3,
            amplitude: 0.05,
        };
        let s: ParticleState<f64> = init_uniform_perturbed(&c, &p).unwrap();
        assert!((s.total_vehicles() - 24.0).abs() < 1e-12);
        let rho = density_estimate(&s).unwrap();
        for (i, r) in rho.iter().enumerate() {
            let xl = i as f64 * 600.0 / 4_000.0;
            let want = 0.04 / (1.0 - 0.05 * (std::f64::consts::TAU * 3.0 * xl / 600.0).cos());
            assert!((r - want).abs() < 1e-5 * want);
            assert!((s.u[i] - p.desired_speed(*r).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn snapshot_wraps_and_rotates() {
        let mut s = ring(10, 10.0, 0.05);
        s.x.iter_mut().for_each(|x| *x += 5.5);
        s.u = (0..10).map(|i| i as f64).collect();
        let snap = FieldSnapshot::from_state(&s).unwrap();
        assert!(snap.x.windows(2).all(|w| w[0] < w[1]));
        assert!((snap.x[0] - 0.5).abs() < 1e-12);
        assert_eq!(snap.u[0], 5.0);
    }

    #[test]
    fn collapsed_gap_detected() {
        let mut s = ring(10, 10.0, 0.05);
        s.x[4] = s.x[3];
        assert!(matches!(density_estimate(&s), Err(SimError::DegenerateSpacing { .. })));
    }
}
