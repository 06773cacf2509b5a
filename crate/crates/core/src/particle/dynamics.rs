use rayon::prelude::*;

use crate::model::ModelParams;
use crate::particle::{FieldSnapshot, ParticleState, SimConfig, SimError, Viscosity};
use crate::scalar::{lit, Scalar};

const PAR_CHUNK: usize = 2_048;
const MAX_RETRIES: usize = 10;

fn fill_gaps<T: Scalar>(x: &[T], l: T, g: &mut [T]) {
    let n = x.len();
    for i in 0..n - 1 {
        g[i] = x[i + 1] - x[i];
    }
    g[n - 1] = x[0] + l - x[n - 1];
}

/// Pressure plus artificial viscosity on the cell between particles `i` and `i+1`.
#[inline]
fn cell_pressure<T: Scalar>(
    params: &ModelParams<T>,
    mu: T,
    visc: &Viscosity<T>,
    g: T,
    du: T,
    i: usize,
) -> Result<T, SimError> {
    if !(g > T::zero()) {
        return Err(SimError::DegenerateSpacing { index: i });
    }
    let rho = mu / g;
    if !(rho < params.rho_max) {
        return Err(SimError::DensityOverflow {
            index: i,
            rho: rho.as_f64(),
        });
    }
    let q = if du < T::zero() {
        let c = params.sound_speed_sq_unchecked(rho).sqrt();
        rho * (visc.quadratic * du * du - visc.linear * c * du)
    } else {
        T::zero()
    };
    Ok(params.pressure_unchecked(rho) + q)
}

/// Accelerations into `a`, using `g` and `p` as scratch.
#[allow(clippy::too_many_arguments)]
fn eval_accel<T: Scalar>(
    x: &[T],
    u: &[T],
    mu: T,
    l: T,
    params: &ModelParams<T>,
    visc: &Viscosity<T>,
    g: &mut [T],
    p: &mut [T],
    a: &mut [T],
) -> Result<(), SimError> {
    let n = x.len();
    fill_gaps(x, l, g);
    let g = &*g;
    p.par_iter_mut().enumerate().with_min_len(PAR_CHUNK).try_for_each(|(i, pi)| {
        let next = if i + 1 == n { 0 } else { i + 1 };
        *pi = cell_pressure(params, mu, visc, g[i], u[next] - u[i], i)?;
        Ok::<_, SimError>(())
    })?;
    let p = &*p;
    let inv_tau = params.tau.recip();
    let inv_mu = mu.recip();
    let two_mu = lit::<T>(2.0) * mu;
    a.par_iter_mut().enumerate().with_min_len(PAR_CHUNK).try_for_each(|(i, ai)| {
        let left = if i == 0 { n - 1 } else { i - 1 };
        let rho = two_mu / (g[left] + g[i]);
        let v = -(p[i] - p[left]) * inv_mu + (params.desired_speed_unchecked(rho) - u[i]) * inv_tau;
        if !v.is_finite() {
            return Err(SimError::NonFinite { index: i });
        }
        *ai = v;
        Ok(())
    })
}

/// Particle accelerations: the pressure difference across each particle plus
/// relaxation towards the desired speed of its local density.
pub fn accel<T: Scalar>(
    state: &ParticleState<T>,
    params: &ModelParams<T>,
    visc: &Viscosity<T>,
) -> Result<Vec<T>, SimError> {
    let n = state.len();
    let (mut g, mut p, mut a) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    eval_accel(
        &state.x,
        &state.u,
        state.mu,
        state.ring_length,
        params,
        visc,
        &mut g,
        &mut p,
        &mut a,
    )?;
    Ok(a)
}

/// Largest stable step:
/// `cfl · min_i Δx_i / (|u_i − ū_i| + (1 + 2C₁)c_i + 2C₂|Δu_i| + floor)`,
/// with `c_i` taken from the denser of the two neighbouring cells.
pub fn stable_dt<T: Scalar>(state: &ParticleState<T>, params: &ModelParams<T>, cfl: T, visc: &Viscosity<T>) -> T {
    let n = state.len();
    let mut g = vec![T::zero(); n];
    fill_gaps(&state.x, state.ring_length, &mut g);
    let u = &state.u;
    let floor = lit::<T>(1e-12) * params.u0;
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let wave = T::one() + two * visc.linear;
    let dt = (0..n)
        .into_par_iter()
        .with_min_len(PAR_CHUNK)
        .map(|i| {
            let left = if i == 0 { n - 1 } else { i - 1 };
            let next = if i + 1 == n { 0 } else { i + 1 };
            let spacing = half * (g[left] + g[i]);
            let c = params.sound_speed_sq_unchecked(state.mu / g[left].min(g[i])).max(T::zero()).sqrt();
            let ubar = half * (u[left] + u[next]);
            let comp = (u[left] - u[i]).max(u[i] - u[next]).max(T::zero());
            spacing / ((u[i] - ubar).abs() + wave * c + two * visc.quadratic * comp + floor)
        })
        .reduce(T::infinity, T::min);
    cfl * dt
}

#[derive(Debug, Clone)]
struct Scratch<T> {
    g: Vec<T>,
    p: Vec<T>,
    a: Vec<T>,
    x1: Vec<T>,
    u1: Vec<T>,
    x2: Vec<T>,
    u2: Vec<T>,
}

impl<T: Scalar> Scratch<T> {
    fn new(n: usize) -> Self {
        let z = vec![T::zero(); n];
        Self {
            g: z.clone(),
            p: z.clone(),
            a: z.clone(),
            x1: z.clone(),
            u1: z.clone(),
            x2: z.clone(),
            u2: z,
        }
    }
}

/// Mesh-free Lagrangian simulation of the ring road.
///
/// Time integration is the three-stage strong-stability-preserving
/// Runge–Kutta scheme. A step that produces crossed particles, a density at
/// or above `ρ_M`, or a non-finite value is retried at half the step, up to
/// ten times.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    pub params: ModelParams<T>,
    pub config: SimConfig<T>,
    state: ParticleState<T>,
    steps: usize,
    scratch: Scratch<T>,
}

impl<T: Scalar> Simulation<T> {
    /// Starts from the perturbed uniform state described by `config`.
    pub fn new(config: SimConfig<T>, params: ModelParams<T>) -> Result<Self, SimError> {
        let state = crate::particle::init_uniform_perturbed(&config, &params)?;
        Ok(Self {
            params,
            config,
            scratch: Scratch::new(state.len()),
            state,
            steps: 0,
        })
    }

    /// Starts from an arbitrary state; `config` supplies only the numerics.
    pub fn from_state(config: SimConfig<T>, params: ModelParams<T>, state: ParticleState<T>) -> Result<Self, SimError> {
        params.validate()?;
        if state.x.len() != state.u.len() || state.len() < 3 {
            return Err(SimError::InvalidConfig {
                field: "state",
                reason: "need at least three particles with matching x and u".into(),
            });
        }
        crate::particle::density_estimate(&state)?;
        Ok(Self {
            params,
            config,
            scratch: Scratch::new(state.len()),
            state,
            steps: 0,
        })
    }

    pub fn state(&self) -> &ParticleState<T> {
        &self.state
    }

    pub fn time(&self) -> T {
        self.state.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn snapshot(&self) -> Result<FieldSnapshot<T>, SimError> {
        FieldSnapshot::from_state(&self.state)
    }

    /// One step, no longer than `max_dt`. Returns the step taken.
    pub fn step_limited(&mut self, max_dt: T) -> Result<T, SimError> {
        let mut dt = stable_dt(&self.state, &self.params, self.config.cfl, &self.config.viscosity).min(max_dt);
        let mut last = None;
        for _ in 0..=MAX_RETRIES {
            match self.try_step(dt) {
                Ok(()) => {
                    std::mem::swap(&mut self.state.x, &mut self.scratch.x1);
                    std::mem::swap(&mut self.state.u, &mut self.scratch.u1);
                    self.state.t = self.state.t + dt;
                    self.state.rewrap();
                    self.steps += 1;
                    return Ok(dt);
                }
                Err(e) => {
                    last = Some(e);
                    dt = dt * lit(0.5);
                }
            }
        }
        Err(SimError::StepFailed {
            t: self.state.t.as_f64(),
            retries: MAX_RETRIES,
            cause: Box::new(last.expect("at least one attempt")),
        })
    }

    pub fn step(&mut self) -> Result<T, SimError> {
        self.step_limited(T::infinity())
    }

    /// Steps until `t`, landing on it exactly.
    pub fn advance_to(&mut self, t: T) -> Result<(), SimError> {
        let eps = lit::<T>(1e-12) * t.abs().max(T::one());
        while t - self.state.t > eps {
            self.step_limited(t - self.state.t)?;
        }
        self.state.t = self.state.t.max(t);
        Ok(())
    }

    /// Runs to `config.t_end`, handing each snapshot (at `t = 0`, every
    /// `output_every`, and at the end) to `sink`. `sink` returns `false` to
    /// stop early.
    pub fn run_with<F>(&mut self, mut sink: F) -> Result<(), SimError>
    where
        F: FnMut(&FieldSnapshot<T>) -> bool,
    {
        let t_end = self.config.t_end;
        let every = self.config.output_every;
        let mut k = 0usize;
        loop {
            let t_out = (T::of_usize(k) * every).min(t_end);
            self.advance_to(t_out)?;
            if !sink(&self.snapshot()?) || t_out >= t_end {
                return Ok(());
            }
            k += 1;
        }
    }

    /// One SSP-RK3 step into the scratch buffers; on success `x1`, `u1` hold
    /// the new state.
    fn try_step(&mut self, dt: T) -> Result<(), SimError> {
        let s0 = &self.state;
        let sc = &mut self.scratch;
        let (mu, l, visc, params) = (s0.mu, s0.ring_length, &self.config.viscosity, &self.params);
        let n = s0.len();

        eval_accel(&s0.x, &s0.u, mu, l, params, visc, &mut sc.g, &mut sc.p, &mut sc.a)?;
        for i in 0..n {
            sc.x1[i] = s0.x[i] + dt * s0.u[i];
            sc.u1[i] = s0.u[i] + dt * sc.a[i];
        }
        eval_accel(&sc.x1, &sc.u1, mu, l, params, visc, &mut sc.g, &mut sc.p, &mut sc.a)?;
        let (q3, q1) = (lit::<T>(0.75), lit::<T>(0.25));
        for i in 0..n {
            sc.x2[i] = q3 * s0.x[i] + q1 * (sc.x1[i] + dt * sc.u1[i]);
            sc.u2[i] = q3 * s0.u[i] + q1 * (sc.u1[i] + dt * sc.a[i]);
        }
        eval_accel(&sc.x2, &sc.u2, mu, l, params, visc, &mut sc.g, &mut sc.p, &mut sc.a)?;
        let (t1, t2) = (lit::<T>(1.0 / 3.0), lit::<T>(2.0 / 3.0));
        for i in 0..n {
            sc.x1[i] = t1 * s0.x[i] + t2 * (sc.x2[i] + dt * sc.u2[i]);
            sc.u1[i] = t1 * s0.u[i] + t2 * (sc.u2[i] + dt * sc.a[i]);
        }

        fill_gaps(&sc.x1, l, &mut sc.g);
        for i in 0..n {
            if !(sc.x1[i].is_finite() && sc.u1[i].is_finite()) {
                return Err(SimError::NonFinite { index: i });
            }
            if !(sc.g[i] > T::zero()) {
                return Err(SimError::DegenerateSpacing { index: i });
            }
            let rho = mu / sc.g[i];
            if !(rho < params.rho_max) {
                return Err(SimError::DensityOverflow {
                    index: i,
                    rho: rho.as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// Runs `config` from its perturbed uniform start and collects all snapshots.
pub fn run<T: Scalar>(config: &SimConfig<T>, params: &ModelParams<T>) -> Result<Vec<FieldSnapshot<T>>, SimError> {
    let mut sim = Simulation::new(*config, *params)?;
    let mut out = Vec::new();
    sim.run_with(|s| {
        out.push(s.clone());
        true
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particle::{density_estimate, Perturbation};

    fn canon() -> ModelParams<f64> {
        ModelParams::paper_fig1()
    }

    #[test]
    fn uniform_equilibrium_is_steady() {
        let p = canon();
        let c = SimConfig::for_density(1_000, 1_000.0, 0.01);
        let mut sim = Simulation::new(c, p).unwrap();
        let a = accel(sim.state(), &p, &Viscosity::default()).unwrap();
        assert!(a.iter().all(|v| v.abs() < 1e-12));
        sim.advance_to(5.0).unwrap();
        let u = p.desired_speed(0.01).unwrap();
        assert!(sim.state().u.iter().all(|v| (v - u).abs() < 1e-10));
        assert!((sim.time() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mass_and_ordering_preserved() {
        let p = canon();
        let mut c = SimConfig::for_density(2_000, 1_000.0, 0.02);
        c.perturbation = Perturbation {
            mode: 2,
            amplitude: 0.2,
        };
        c.t_end = 20.0;
        c.output_every = 5.0;
        let snaps = run(&c, &p).unwrap();
        assert_eq!(snaps.len(), 5);
        for s in &snaps {
            assert!(s.x.windows(2).all(|w| w[0] < w[1]));
            assert!(s.x[0] >= 0.0 && *s.x.last().unwrap() < 1_000.0);
            assert!(s.rho.iter().all(|r| *r > 0.0 && *r < p.rho_max));
        }
        assert_eq!(snaps.last().unwrap().t, 20.0);
    }

    #[test]
    fn f32_runs() {
        let p = ModelParams::<f32>::new(0.5, 0.2, 20.0, 5.0).unwrap();
        let mut c = SimConfig::<f32>::for_density(1_000, 1_000.0, 0.01);
        c.perturbation.amplitude = 0.01;
        let mut sim = Simulation::new(c, p).unwrap();
        sim.advance_to(2.0).unwrap();
        assert!(density_estimate(sim.state()).is_ok());
    }

    #[test]
    fn crossed_particles_fail_cleanly() {
        let p = canon();
        let c = SimConfig::for_density(1_000, 1_000.0, 0.01);
        let mut state = Simulation::new(c, p).unwrap().state().clone();
        state.x[10] = state.x[11];
        assert!(Simulation::from_state(c, p, state).is_err());
    }
}
