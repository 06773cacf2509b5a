//! Chapman–Jouguet selection of the wave speed.
//!
//! A jamiton must pass smoothly through its sonic point, so there the
//! numerator and denominator of the wave ODE vanish together. For a given
//! far-field density this fixes `(s, m)`: for each trial `s` the mass flux
//! follows from the far state, the sonic relative speed from a cubic, and the
//! residual `ũ(ρ_s) − u_s` is driven to zero by a bracketed 1-D search.

use crate::jamiton::frame::{SonicState, WaveFrame, SINGULAR_TOL};
use crate::jamiton::JamitonError;
use crate::model::{EquilibriumState, ModelParams};
use crate::numerics::roots::{brent_with_values, scan_for_sign_change};
use crate::scalar::{lit, Scalar};

/// Step of the downward scan in `s`, relative to ũ₀.
const SCAN_STEP: f64 = 1e-2;
/// Final bracket width in `s`, relative to ũ₀.
const S_TOL: f64 = 1e-12;
/// Sonic residual bound, relative to ũ₀².
const CJ_RESIDUAL: f64 = 1e-10;

/// Sonic residual `ũ(m/w_s) − (s + w_s)` for trial speed `s`.
fn sonic_residual<T: Scalar>(params: &ModelParams<T>, far: &EquilibriumState<T>, s: T) -> Option<T> {
    let m = far.rho * (far.u - s);
    if !(m > T::zero()) {
        return None;
    }
    let frame = WaveFrame { s, m };
    let w = frame.sonic_relative_speed(params).ok()?;
    let rho_s = m / w;
    if !(rho_s < params.rho_max) {
        return None;
    }
    Some(params.desired_speed_unchecked(rho_s) - (s + w))
}

/// Constructs the CJ frame and sonic state of the jamiton whose far field is
/// the equilibrium at `rho_minus`.
pub fn cj_construct<T: Scalar>(
    params: &ModelParams<T>,
    rho_minus: T,
) -> Result<(WaveFrame<T>, SonicState<T>), JamitonError> {
    let far = EquilibriumState::new(params, rho_minus)?;
    let c_far = params.sound_speed(rho_minus)?;
    let u0 = params.u0;

    // s = u₋ − c₋ is the trivial root where the far state itself is sonic;
    // admissible waves have a supersonic far state, so scan below it.
    let s_top = far.u - c_far;
    let start = s_top - lit::<T>(1e-9) * u0;
    let limit = far.u - lit::<T>(20.0) * u0;
    let step = -lit::<T>(SCAN_STEP) * u0;
    let residual = |s: T| sonic_residual(params, &far, s);

    let no_jamiton = |reason: &str| JamitonError::NoJamiton {
        rho_minus: rho_minus.as_f64(),
        reason: reason.to_string(),
    };

    let (a, fa, b, fb) = scan_for_sign_change(residual, start, step, limit)
        .ok_or_else(|| no_jamiton("no sonic root below the Lax bound"))?;
    let root = brent_with_values(
        |s| residual(s).unwrap_or(T::nan()),
        a,
        fa,
        b,
        fb,
        lit::<T>(S_TOL) * u0,
    )
    .map_err(|e| JamitonError::ConvergenceFailure {
        detail: format!("CJ speed search for rho_minus = {}: {e}", rho_minus.as_f64()),
    })?;

    let s = root.x;
    let frame = WaveFrame::new(s, far.rho * (far.u - s))?;
    let w_s = frame.sonic_relative_speed(params)?;
    let u_s = s + w_s;
    let rho_s = frame.m / w_s;

    if !(u_s < far.u) {
        return Err(no_jamiton("sonic point above far state (stable background)"));
    }
    if !(far.u - s > c_far) {
        return Err(no_jamiton("far state not supersonic in the wave frame"));
    }

    // the stated bound, or what the precision of T allows if that is coarser
    let bound = lit::<T>(CJ_RESIDUAL).max(lit::<T>(100.0) * T::epsilon()) * u0 * u0;
    let n = frame.numerator_w(params, w_s);
    let d = frame.denominator_w(params, w_s);
    if n.abs() > bound || d.abs() > bound {
        return Err(JamitonError::ConvergenceFailure {
            detail: format!(
                "CJ residuals too large: N = {}, D = {}",
                n.as_f64(),
                d.as_f64()
            ),
        });
    }

    let mut sonic = SonicState {
        u_s,
        rho_s,
        slope: T::zero(),
    };
    sonic.slope = sonic_slope(params, &frame, &sonic)?;
    Ok((frame, sonic))
}

/// `du/dη` at the sonic point by L'Hôpital: `N'(u_s)/D'(u_s)`.
pub fn sonic_slope<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    sonic: &SonicState<T>,
) -> Result<T, JamitonError> {
    let dn = frame.numerator_slope(params, sonic.u_s)?;
    let dd = frame.denominator_slope(params, sonic.u_s)?;
    if dd.abs() <= lit::<T>(SINGULAR_TOL) * params.u0 {
        return Err(JamitonError::DegenerateSonic {
            u_s: sonic.u_s.as_f64(),
        });
    }
    let slope = dn / dd;
    if !slope.is_finite() {
        return Err(JamitonError::DegenerateSonic {
            u_s: sonic.u_s.as_f64(),
        });
    }
    Ok(slope)
}

/// Closed-form CJ frame, used to cross-check the search.
///
/// On the CJ wave the sonic point and the far state are the two roots of the
/// equilibrium quadratic, which forces `w_s = ũ₀ − u₋ = ũ₀ρ₋/ρ_M` and then
/// `m = ρ_M w_s³/(w_s² + β)`.
pub fn cj_closed_form<T: Scalar>(params: &ModelParams<T>, rho_minus: T) -> (T, T) {
    let u_far = params.desired_speed_unchecked(rho_minus);
    let w_s = params.u0 * rho_minus / params.rho_max;
    let m = params.rho_max * w_s * w_s * w_s / (w_s * w_s + params.beta);
    (u_far - m / rho_minus, m)
}
