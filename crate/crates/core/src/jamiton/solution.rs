//! Assembled jamitons: solitary waves and periodic trains.

use crate::jamiton::cj::cj_construct;
use crate::jamiton::frame::{SonicState, WaveFrame};
use crate::jamiton::profile::{
    eta_between, integrate_profile, weighted_integral, ProfileSample, UpperStop,
    DEFAULT_SONIC_OFFSET, EQUILIBRIUM_TOL,
};
use crate::jamiton::shock::rh_jump;
use crate::jamiton::JamitonError;
use crate::model::{EquilibriumState, ModelParams};
use crate::numerics::interp::hermite;
use crate::numerics::roots::{brent_with_values, scan_for_sign_change};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveKind<T> {
    Solitary,
    Periodic { wavelength_eta: T },
}

/// A (ρ, u) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState<T> {
    pub rho: T,
    pub u: T,
}

#[derive(Debug, Clone)]
pub struct JamitonSolution<T> {
    pub params: ModelParams<T>,
    pub frame: WaveFrame<T>,
    /// Far-field equilibrium of the CJ frame (upper equilibrium root).
    pub far: EquilibriumState<T>,
    /// State just ahead of the shock: the far state for a solitary wave, the
    /// end of the previous period for a train.
    pub pre_shock: FlowState<T>,
    pub post_shock: FlowState<T>,
    pub sonic: SonicState<T>,
    /// Samples on `[0, η_end]`, shock at η = 0.
    pub profile: Vec<ProfileSample<T>>,
    pub kind: WaveKind<T>,
    /// Exponential rate `dF/du` at the far state; the solitary tail decays
    /// like `exp(tail_rate·η)`.
    pub tail_rate: T,
}

fn tail_rate<T: Scalar>(params: &ModelParams<T>, frame: &WaveFrame<T>, u_far: T) -> Result<T, JamitonError> {
    // N(u_far) = 0, so d(N/D)/du = N'/D there
    let dn = frame.numerator_slope(params, u_far)?;
    let d = frame.denominator(params, u_far)?;
    Ok(dn / d)
}

/// Solitary jamiton with far-field density `rho_minus`.
pub fn solitary_jamiton<T: Scalar>(
    params: &ModelParams<T>,
    rho_minus: T,
) -> Result<JamitonSolution<T>, JamitonError> {
    solitary_jamiton_with_offset(params, rho_minus, lit(DEFAULT_SONIC_OFFSET))
}

pub fn solitary_jamiton_with_offset<T: Scalar>(
    params: &ModelParams<T>,
    rho_minus: T,
    eps: T,
) -> Result<JamitonSolution<T>, JamitonError> {
    let (frame, sonic) = cj_construct(params, rho_minus)?;
    let far = EquilibriumState::new(params, rho_minus)?;
    let jump = rh_jump(params, &frame, far.u)?;
    let profile = integrate_profile(
        params,
        &frame,
        &sonic,
        jump.u_post,
        UpperStop::Equilibrium,
        eps,
    )?;
    Ok(JamitonSolution {
        params: *params,
        frame,
        far,
        pre_shock: FlowState {
            rho: far.rho,
            u: far.u,
        },
        post_shock: FlowState {
            rho: frame.density(jump.u_post),
            u: jump.u_post,
        },
        sonic,
        profile,
        kind: WaveKind::Solitary,
        tail_rate: tail_rate(params, &frame, far.u)?,
    })
}

/// Sonic state of a frame that is assumed to be CJ.
fn sonic_of_frame<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
) -> Result<(SonicState<T>, T), JamitonError> {
    let w_s = frame.sonic_relative_speed(params)?;
    let (lo, hi) = frame.equilibrium_roots(params).ok_or(JamitonError::InvalidFrame {
        s: frame.s.as_f64(),
        m: frame.m.as_f64(),
    })?;
    let u_s = frame.s + w_s;
    if (lo - u_s).abs() > lit::<T>(1e-8) * params.u0 || !(hi > u_s) {
        return Err(JamitonError::InvalidFrame {
            s: frame.s.as_f64(),
            m: frame.m.as_f64(),
        });
    }
    let mut sonic = SonicState {
        u_s,
        rho_s: frame.m / w_s,
        slope: T::zero(),
    };
    sonic.slope = crate::jamiton::cj::sonic_slope(params, frame, &sonic)?;
    Ok((sonic, hi))
}

/// Smooth-branch length of one period whose shock starts from `u1`.
fn period_length<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    sonic: &SonicState<T>,
    u1: T,
    eps: T,
) -> Result<(T, T), JamitonError> {
    let u_post = rh_jump(params, frame, u1)?.u_post;
    let len = eta_between(params, frame, sonic, u_post, u1, eps)?;
    Ok((len, u_post))
}

/// Pre- and post-shock speeds of the train with period `wavelength_eta`.
fn train_shock<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    sonic: &SonicState<T>,
    u_far: T,
    wavelength_eta: T,
    eps: T,
) -> Result<(T, T), JamitonError> {
    let infeasible = |max: T| JamitonError::WavelengthInfeasible {
        requested: wavelength_eta.as_f64(),
        max: max.as_f64(),
    };
    let u1_max = u_far - lit::<T>(EQUILIBRIUM_TOL) * params.u0;
    let u1_min = sonic.u_s + lit::<T>(1e-4) * (u_far - sonic.u_s);
    let (len_max, _) = period_length(params, frame, sonic, u1_max, eps)?;
    if !(wavelength_eta > T::zero() && wavelength_eta < len_max) {
        return Err(infeasible(len_max));
    }
    let (len_min, _) = period_length(params, frame, sonic, u1_min, eps)?;
    if wavelength_eta <= len_min {
        return Err(infeasible(len_max));
    }

    let root = brent_with_values(
        |u1| match period_length(params, frame, sonic, u1, eps) {
            Ok((len, _)) => len - wavelength_eta,
            Err(_) => T::nan(),
        },
        u1_min,
        len_min - wavelength_eta,
        u1_max,
        len_max - wavelength_eta,
        lit::<T>(1e-13) * params.u0,
    )
    .map_err(|e| JamitonError::ConvergenceFailure {
        detail: format!("periodic train pre-shock speed: {e}"),
    })?;
    let u1 = root.x;
    Ok((u1, rh_jump(params, frame, u1)?.u_post))
}

/// Periodic jamiton train in a CJ `frame` with period `wavelength_eta`
/// (road wavelength `τ·wavelength_eta`).
pub fn periodic_train<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    wavelength_eta: T,
) -> Result<JamitonSolution<T>, JamitonError> {
    let eps = lit::<T>(DEFAULT_SONIC_OFFSET);
    let (sonic, u_far) = sonic_of_frame(params, frame)?;
    let (u1, u_post) = train_shock(params, frame, &sonic, u_far, wavelength_eta, eps)?;
    let profile = integrate_profile(params, frame, &sonic, u_post, UpperStop::Target(u1), eps)?;
    let far = EquilibriumState {
        rho: frame.density(u_far),
        u: u_far,
    };
    Ok(JamitonSolution {
        params: *params,
        frame: *frame,
        far,
        pre_shock: FlowState {
            rho: frame.density(u1),
            u: u1,
        },
        post_shock: FlowState {
            rho: frame.density(u_post),
            u: u_post,
        },
        sonic,
        profile,
        kind: WaveKind::Periodic { wavelength_eta },
        tail_rate: tail_rate(params, frame, u_far)?,
    })
}

/// Mean density over one period of the CJ train with far density
/// `rho_minus` and period `wavelength_eta`, by quadrature in `u`.
fn train_mean_density<T: Scalar>(params: &ModelParams<T>, rho_minus: T, wavelength_eta: T) -> Option<T> {
    let eps = lit::<T>(DEFAULT_SONIC_OFFSET);
    let (frame, sonic) = cj_construct(params, rho_minus).ok()?;
    let u_far = params.desired_speed_unchecked(rho_minus);
    let (u1, u_post) = train_shock(params, &frame, &sonic, u_far, wavelength_eta, eps).ok()?;
    let mass = weighted_integral(params, &frame, &sonic, u_post, u1, eps, |u| frame.density(u)).ok()?;
    Some(mass / wavelength_eta)
}

/// Periodic train with wavelength `wavelength_eta` whose mean density is
/// `rho_mean`; this is the saturated state a ring of that density and
/// wave count settles into.
pub fn matched_periodic_train<T: Scalar>(
    params: &ModelParams<T>,
    rho_mean: T,
    wavelength_eta: T,
) -> Result<JamitonSolution<T>, JamitonError> {
    let (rho_lo, _) = params.critical_densities()?;
    let no = |reason: &str| JamitonError::NoJamiton {
        rho_minus: rho_mean.as_f64(),
        reason: reason.to_string(),
    };
    if !(rho_mean > rho_lo && rho_mean < params.rho_max) {
        return Err(no("mean density outside the unstable band"));
    }
    let objective = |rho_minus: T| train_mean_density(params, rho_minus, wavelength_eta).map(|v| v - rho_mean);
    let top = rho_mean * (T::one() - lit(1e-9));
    let step = -(rho_mean - rho_lo) * lit(0.02);
    let (a, fa, b, fb) = scan_for_sign_change(objective, top, step, rho_lo)
        .ok_or_else(|| no("no periodic train with this mean density and wavelength"))?;
    let root = brent_with_values(
        |r| objective(r).unwrap_or(T::nan()),
        a,
        fa,
        b,
        fb,
        lit::<T>(1e-14) * params.rho_max,
    )
    .map_err(|e| JamitonError::ConvergenceFailure {
        detail: format!("matched train far density: {e}"),
    })?;
    let (frame, _) = cj_construct(params, root.x)?;
    periodic_train(params, &frame, wavelength_eta)
}

impl<T: Scalar> JamitonSolution<T> {
    /// η at the downstream end of the sampled profile.
    pub fn eta_end(&self) -> T {
        self.profile[self.profile.len() - 1].eta
    }

    pub fn wavelength_eta(&self) -> Option<T> {
        match self.kind {
            WaveKind::Periodic { wavelength_eta } => Some(wavelength_eta),
            WaveKind::Solitary => None,
        }
    }

    /// Speed at wave coordinate η. At the shock itself the post-shock value
    /// is returned.
    pub fn u_at(&self, eta: T) -> T {
        let eta = match self.kind {
            WaveKind::Solitary => {
                if eta < T::zero() {
                    return self.far.u;
                }
                let end = self.eta_end();
                if eta > end {
                    let last = self.profile[self.profile.len() - 1];
                    return self.far.u - (self.far.u - last.u) * (self.tail_rate * (eta - end)).exp();
                }
                eta
            }
            WaveKind::Periodic { wavelength_eta } => {
                let e = eta - (eta / wavelength_eta).floor() * wavelength_eta;
                e.min(self.eta_end())
            }
        };
        self.interpolate(eta)
    }

    /// Speed on the smooth branch that starts at the shock, `η ≥ 0`, without
    /// periodic wrapping. A train is clamped to its pre-shock speed beyond
    /// one period; a solitary wave follows its exponential tail.
    pub fn u_smooth(&self, eta: T) -> T {
        let eta = eta.max(T::zero());
        match self.kind {
            WaveKind::Periodic { .. } => self.interpolate(eta.min(self.eta_end())),
            WaveKind::Solitary => self.u_at(eta),
        }
    }

    pub fn rho_at(&self, eta: T) -> T {
        self.frame.density(self.u_at(eta))
    }

    fn interpolate(&self, eta: T) -> T {
        let i = self.find(eta);
        let a = &self.profile[i];
        let b = &self.profile[i + 1];
        hermite(a.eta, a.u, a.du_deta, b.eta, b.u, b.du_deta, eta)
    }

    fn find(&self, eta: T) -> usize {
        let n = self.profile.len();
        let i = self.profile.partition_point(|s| s.eta <= eta);
        i.clamp(1, n - 1) - 1
    }

    /// Road position of wave coordinate η at time `t`: `x = τη + st`.
    pub fn x_of(&self, eta: T, t: T) -> T {
        self.params.tau * eta + self.frame.s * t
    }

    pub fn eta_of(&self, x: T, t: T) -> T {
        (x - self.frame.s * t) / self.params.tau
    }

    /// Mean density over one period (periodic) or over the sampled profile
    /// (solitary), by quadrature in `u`.
    pub fn mean_density(&self) -> Result<T, JamitonError> {
        let eps = lit::<T>(DEFAULT_SONIC_OFFSET);
        let first = self.profile[0].u;
        let last = self.profile[self.profile.len() - 1].u;
        let frame = self.frame;
        let mass = weighted_integral(&self.params, &frame, &self.sonic, first, last, eps, |u| {
            frame.density(u)
        })?;
        let len = match self.kind {
            WaveKind::Periodic { wavelength_eta } => wavelength_eta,
            WaveKind::Solitary => self.eta_end(),
        };
        Ok(mass / len)
    }

    /// Speed drop across the shock.
    pub fn shock_strength(&self) -> T {
        self.pre_shock.u - self.post_shock.u
    }

    /// Index of the sonic sample.
    pub fn sonic_index(&self) -> usize {
        self.profile.iter().position(|s| s.sonic).unwrap_or(0)
    }
}
