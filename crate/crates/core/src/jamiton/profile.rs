//! Integration of the smooth part of a jamiton away from its sonic point.
//!
//! The wave ODE is singular at the sonic point, so integration starts a small
//! offset `eps·ũ₀` to either side of it, using the L'Hôpital slope to place the
//! starting points in η. The lower branch runs towards decreasing η until the
//! post-shock speed is reached; the upper branch runs towards increasing η.
//! The shock is placed at η = 0.

use crate::jamiton::frame::{SonicState, WaveFrame};
use crate::jamiton::JamitonError;
use crate::model::ModelParams;
use crate::numerics::ode::{Dopri5, OdeError, StopReason, Trace};
use crate::scalar::{lit, Scalar};

/// Default sonic escape offset, relative to ũ₀.
pub const DEFAULT_SONIC_OFFSET: f64 = 1e-6;
/// Downstream truncation: stop within this distance of the far speed (× ũ₀).
pub const EQUILIBRIUM_TOL: f64 = 1e-6;
/// Relative tolerance of the profile integration.
pub const PROFILE_RTOL: f64 = 1e-10;

/// One point of a wave profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T> {
    /// Wave coordinate η = (x − st)/τ, m/s.
    pub eta: T,
    pub u: T,
    pub rho: T,
    /// du/dη at this sample.
    pub du_deta: T,
    pub sonic: bool,
    pub shock: bool,
}

/// Where the increasing-η branch ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperStop<T> {
    /// Within [`EQUILIBRIUM_TOL`]·ũ₀ of the upper equilibrium root.
    Equilibrium,
    /// At a prescribed speed below the upper equilibrium root.
    Target(T),
    /// After covering this much η beyond the sonic point.
    EtaSpan(T),
}

fn solver<T: Scalar>(params: &ModelParams<T>) -> Dopri5<T> {
    Dopri5 {
        rtol: lit(PROFILE_RTOL),
        atol: lit::<T>(1e-13) * params.u0,
        h_min: lit::<T>(1e-13) * params.u0,
        h_max: None,
        max_steps: 200_000,
    }
}

fn check_offset<T: Scalar>(params: &ModelParams<T>, sonic: &SonicState<T>, eps: T) -> Result<T, JamitonError> {
    let offset = eps * params.u0;
    let floor = lit::<T>(1e3) * T::epsilon() * params.u0.max(sonic.u_s.abs());
    if !(offset > floor) {
        return Err(JamitonError::SonicEscapeFailure { eps: eps.as_f64() });
    }
    Ok(offset)
}

/// Integrates the smooth profile between the post-shock speed `u_low` and the
/// chosen upper stop. Samples are ordered by increasing η with the shock at
/// η = 0 and include the sonic point itself.
pub fn integrate_profile<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    sonic: &SonicState<T>,
    u_low: T,
    upper: UpperStop<T>,
    eps: T,
) -> Result<Vec<ProfileSample<T>>, JamitonError> {
    let offset = check_offset(params, sonic, eps)?;
    let u_s = sonic.u_s;
    let slope = sonic.slope;
    if !(slope > T::zero() && slope.is_finite()) {
        return Err(JamitonError::DegenerateSonic { u_s: u_s.as_f64() });
    }
    let (_, u_far) = frame.equilibrium_roots(params).ok_or(JamitonError::InvalidFrame {
        s: frame.s.as_f64(),
        m: frame.m.as_f64(),
    })?;
    if !(u_low < u_s - offset) {
        return Err(JamitonError::IntegrationOutOfRange {
            u: u_low.as_f64(),
            eta: 0.0,
        });
    }

    let rhs = |_eta: T, u: T| -> Option<T> {
        if !frame.admissible(params, u) || u > u_far {
            return None;
        }
        frame.ode_rhs(params, u).ok().filter(|v| v.is_finite())
    };
    let ode = solver(params);
    let long = lit::<T>(1e4) * params.u0;
    let h0 = offset / slope;

    let map_err = |e: OdeError, near: T| match e {
        OdeError::StepSizeUnderflow { t, y, .. } => {
            if (y - near.as_f64()).abs() < 1e2 * offset.as_f64() {
                JamitonError::SonicEscapeFailure { eps: eps.as_f64() }
            } else {
                JamitonError::IntegrationOutOfRange { u: y, eta: t }
            }
        }
        OdeError::UndefinedStart { y, t } => JamitonError::IntegrationOutOfRange { u: y, eta: t },
        OdeError::MaxSteps(_) => JamitonError::ConvergenceFailure {
            detail: "profile integration exceeded step budget".into(),
        },
    };

    // decreasing-η branch, sonic point at η = 0 for now
    let lower = ode
        .integrate(rhs, -offset / slope, u_s - offset, -long, h0, Some(u_low))
        .map_err(|e| map_err(e, u_s))?;
    if lower.reason != StopReason::TargetReached {
        let (eta, u) = lower.last();
        return Err(JamitonError::IntegrationOutOfRange {
            u: u.as_f64(),
            eta: eta.as_f64(),
        });
    }

    let (span, target) = match upper {
        UpperStop::Equilibrium => (long, Some(u_far - lit::<T>(EQUILIBRIUM_TOL) * params.u0)),
        UpperStop::Target(u) => {
            if !(u > u_s + offset && u < u_far) {
                return Err(JamitonError::IntegrationOutOfRange {
                    u: u.as_f64(),
                    eta: 0.0,
                });
            }
            (long, Some(u))
        }
        UpperStop::EtaSpan(span) => (span - offset / slope, None),
    };
    let upper_trace = ode
        .integrate(rhs, offset / slope, u_s + offset, span, h0, target)
        .map_err(|e| map_err(e, u_s))?;
    if target.is_some() && upper_trace.reason != StopReason::TargetReached {
        let (eta, u) = upper_trace.last();
        return Err(JamitonError::IntegrationOutOfRange {
            u: u.as_f64(),
            eta: eta.as_f64(),
        });
    }

    Ok(assemble(frame, sonic, &lower, &upper_trace))
}

fn assemble<T: Scalar>(
    frame: &WaveFrame<T>,
    sonic: &SonicState<T>,
    lower: &Trace<T>,
    upper: &Trace<T>,
) -> Vec<ProfileSample<T>> {
    let (eta_shock, _) = lower.last();
    let sample = |eta: T, u: T, du: T| ProfileSample {
        eta: eta - eta_shock,
        u,
        rho: frame.density(u),
        du_deta: du,
        sonic: false,
        shock: false,
    };
    let mut out = Vec::with_capacity(lower.len() + upper.len() + 1);
    for i in (0..lower.len()).rev() {
        out.push(sample(lower.t[i], lower.y[i], lower.dy[i]));
    }
    out[0].eta = T::zero();
    out[0].shock = true;
    out.push(ProfileSample {
        sonic: true,
        ..sample(T::zero(), sonic.u_s, sonic.slope)
    });
    for i in 0..upper.len() {
        out.push(sample(upper.t[i], upper.y[i], upper.dy[i]));
    }
    out
}

/// η-extent between two speeds on the smooth branch, computed with `u` as the
/// independent variable (`dη/du = D/N`). Used as an independent cross-check
/// of [`integrate_profile`] and to size periodic trains.
pub fn eta_between<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    sonic: &SonicState<T>,
    u_a: T,
    u_b: T,
    eps: T,
) -> Result<T, JamitonError> {
    weighted_integral(params, frame, sonic, u_a, u_b, eps, |_| T::one())
}

/// `∫ g(u) dη` over the smooth branch between `u_a < u_b`.
pub fn weighted_integral<T: Scalar, G>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    sonic: &SonicState<T>,
    u_a: T,
    u_b: T,
    eps: T,
    weight: G,
) -> Result<T, JamitonError>
where
    G: Fn(T) -> T,
{
    let offset = check_offset(params, sonic, eps)?;
    let u_s = sonic.u_s;
    let ode = solver(params);
    let rhs = |u: T, _: T| frame.deta_du(params, u).map(|d| d * weight(u));
    let piece = |from: T, to: T| -> Result<T, JamitonError> {
        if to <= from {
            return Ok(T::zero());
        }
        let h0 = (to - from) * lit(1e-3);
        ode.integrate(rhs, from, T::zero(), to - from, h0, None)
            .map(|tr| tr.last().1)
            .map_err(|e| JamitonError::ConvergenceFailure {
                detail: format!("eta quadrature: {e}"),
            })
    };
    if u_b <= u_s - offset || u_a >= u_s + offset {
        return piece(u_a, u_b);
    }
    // bridge over the sonic point, where dη/du → 1/slope
    let (lo, hi) = (u_a.max(u_s - offset), u_b.min(u_s + offset));
    let below = piece(u_a, lo)?;
    let above = piece(hi, u_b)?;
    let middle = (weight(lo) + weight(hi)) * lit::<T>(0.5) * (hi - lo) / sonic.slope;
    Ok(below + middle + above)
}
