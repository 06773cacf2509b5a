use rayon::prelude::*;

use crate::analysis::AnalysisError;
use crate::jamiton::JamitonSolution;
use crate::numerics::interp::ring_linear;
use crate::numerics::ode::{Dopri5, StopReason};
use crate::particle::FieldSnapshot;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    /// Position, unwrapped (keeps increasing around the ring).
    pub x: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub vehicle_id: usize,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    /// Sample pairs at equal times where the speed drops: shock crossings.
    pub fn shock_crossings(&self) -> Vec<(TrajectorySample, TrajectorySample)> {
        self.samples
            .windows(2)
            .filter(|w| w[0].t == w[1].t && w[1].u < w[0].u)
            .map(|w| (w[0], w[1]))
            .collect()
    }
}

/// Samples per trajectory aimed for between shock crossings.
const SAMPLES_PER_SPAN: f64 = 400.0;

/// Vehicle paths `dx/dt = u((x − st)/τ)` through an exact wave, starting at
/// positions `x0` at `t_span.0`.
///
/// Integration runs in the wave frame `ξ = x − st`, one smooth branch at a
/// time. Each shock crossing appears as two samples at the same time and
/// place, carrying the pre- and post-shock speeds.
pub fn trajectories_analytic(
    solution: &JamitonSolution<f64>,
    x0: &[f64],
    t_span: (f64, f64),
) -> Result<Vec<Trajectory>, AnalysisError> {
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(AnalysisError::InvalidInput(format!("empty time span ({t0}, {t1})")));
    }
    x0.par_iter()
        .enumerate()
        .map(|(id, &x)| single_analytic(solution, id, x, t0, t1))
        .collect()
}

fn single_analytic(
    sol: &JamitonSolution<f64>,
    vehicle_id: usize,
    x_start: f64,
    t0: f64,
    t1: f64,
) -> Result<Trajectory, AnalysisError> {
    let s = sol.frame.s;
    let tau = sol.params.tau;
    let period = sol.wavelength_eta().map(|l| l * tau);
    let ode = Dopri5 {
        h_max: Some((t1 - t0) / SAMPLES_PER_SPAN),
        ..Dopri5::default()
    };
    let sample = |t: f64, xi: f64, u: f64| TrajectorySample { t, x: xi + s * t, u };

    let mut t = t0;
    let mut xi = x_start - s * t0;
    let mut out = Vec::new();

    // position of the shock that starts the current smooth branch
    let mut branch = match period {
        Some(p) => (xi / p).floor() * p,
        None if xi < 0.0 => {
            // uniform far field ahead of a solitary wave: straight line
            let u = sol.far.u;
            out.push(sample(t, xi, u));
            let hit = t + -xi / (u - s);
            if hit >= t1 {
                out.push(sample(t1, xi + (u - s) * (t1 - t), u));
                return Ok(Trajectory {
                    vehicle_id,
                    samples: out,
                });
            }
            out.push(sample(hit, 0.0, u));
            t = hit;
            xi = 0.0;
            0.0
        }
        None => 0.0,
    };

    loop {
        let u_here = sol.u_smooth((xi - branch) / tau);
        if out.last().map_or(true, |p: &TrajectorySample| p.t != t || p.u != u_here) {
            out.push(sample(t, xi, u_here));
        }
        let target = period.map(|p| branch + p);
        let rhs = |_t: f64, xi: f64| Some(sol.u_smooth((xi - branch) / tau) - s);
        let h0 = ((t1 - t0) / SAMPLES_PER_SPAN).min(t1 - t);
        let trace = ode
            .integrate(rhs, t, xi, t1 - t, h0, target)
            .map_err(|e| AnalysisError::Integration(e.to_string()))?;
        for k in 1..trace.len() {
            let xi_k = trace.y[k];
            out.push(sample(trace.t[k], xi_k, sol.u_smooth((xi_k - branch) / tau)));
        }
        let (t_end, xi_end) = trace.last();
        match (trace.reason, period) {
            (StopReason::TargetReached, Some(p)) => {
                // crossing: the last sample holds the pre-shock speed
                branch += p;
                t = t_end;
                xi = xi_end.max(branch);
                out.push(sample(t, xi, sol.u_smooth(0.0)));
                if t >= t1 {
                    break;
                }
            }
            _ => break,
        }
    }
    Ok(Trajectory {
        vehicle_id,
        samples: out,
    })
}

/// Tracer paths through simulated snapshots, starting at positions `seeds`
/// at the first snapshot's time.
///
/// The speed field is linear in `x` between snapshot particles and linear
/// in `t` between snapshots. The snapshot cadence must keep every tracer
/// within one cell of a `cells`-point ring grid per interval.
pub fn trajectories_sim(
    snapshots: &[FieldSnapshot<f64>],
    seeds: &[f64],
    cells: usize,
) -> Result<Vec<Trajectory>, AnalysisError> {
    if snapshots.len() < 2 {
        return Err(AnalysisError::InsufficientSnapshots {
            needed: 2,
            got: snapshots.len(),
        });
    }
    if cells == 0 {
        return Err(AnalysisError::InvalidInput("cells must be positive".into()));
    }
    let l = snapshots[0].ring_length;
    let cell = l / cells as f64;
    for (k, w) in snapshots.windows(2).enumerate() {
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) {
            return Err(AnalysisError::InvalidInput(format!(
                "snapshot times not increasing at index {}",
                k + 1
            )));
        }
        let umax = w[0].u.iter().chain(&w[1].u).fold(0.0_f64, |m, v| m.max(v.abs()));
        if umax * dt >= cell {
            return Err(AnalysisError::InsufficientOutputRate {
                interval: k,
                displacement: umax * dt,
                cell,
            });
        }
    }

    let speed = |snap: &FieldSnapshot<f64>, x: f64| ring_linear(&snap.x, &snap.u, l, x);
    Ok(seeds
        .par_iter()
        .enumerate()
        .map(|(vehicle_id, &seed)| {
            let mut x = seed;
            let mut samples = Vec::with_capacity(snapshots.len());
            samples.push(TrajectorySample {
                t: snapshots[0].t,
                x,
                u: speed(&snapshots[0], x),
            });
            for w in snapshots.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let h = b.t - a.t;
                let field = |dt: f64, x: f64| {
                    let th = dt / h;
                    (1.0 - th) * speed(a, x) + th * speed(b, x)
                };
                // classical RK4 over the interval
                let k1 = field(0.0, x);
                let k2 = field(0.5 * h, x + 0.5 * h * k1);
                let k3 = field(0.5 * h, x + 0.5 * h * k2);
                let k4 = field(h, x + h * k3);
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                samples.push(TrajectorySample {
                    t: b.t,
                    x,
                    u: speed(b, x),
                });
            }
            Trajectory { vehicle_id, samples }
        })
        .collect())
}
