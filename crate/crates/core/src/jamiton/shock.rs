//! Rankine–Hugoniot shock matching in the wave frame.
//!
//! Across a shock moving at `s`, mass flux `m` and momentum flux
//! `m·u + p(ρ)` are continuous. With `ρ = m/(u − s)` the momentum flux is a
//! convex function of `w = u − s` with its minimum at the sonic speed, so
//! every non-sonic state has exactly one partner on the other side.

use crate::jamiton::frame::WaveFrame;
use crate::jamiton::JamitonError;
use crate::model::ModelParams;
use crate::numerics::roots::brent;
use crate::scalar::{lit, Scalar};

/// Relative distance from the sonic speed below which a shock has zero strength.
const ZERO_STRENGTH_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockJump<T> {
    pub u_post: T,
    /// The two roots merged at the sonic speed; `u_post == u_pre`.
    pub zero_strength: bool,
}

/// Momentum flux `m·w + p(m/w)` relative to a reference value.
fn momentum_flux<T: Scalar>(params: &ModelParams<T>, frame: &WaveFrame<T>, w: T) -> T {
    frame.m * w + params.pressure_unchecked(frame.m / w)
}

/// Relative residual of momentum-flux conservation between two states.
pub fn rh_residual<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    u_a: T,
    u_b: T,
) -> T {
    let fa = momentum_flux(params, frame, u_a - frame.s);
    let fb = momentum_flux(params, frame, u_b - frame.s);
    (fa - fb).abs() / fa.abs().max(fb.abs())
}

/// The entropy-admissible partner of `u_pre` across a shock in `frame`.
pub fn rh_jump<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    u_pre: T,
) -> Result<ShockJump<T>, JamitonError> {
    let w_pre = u_pre - frame.s;
    if !(w_pre > T::zero()) {
        return Err(JamitonError::OutsideWave {
            u: u_pre.as_f64(),
            s: frame.s.as_f64(),
            m: frame.m.as_f64(),
        });
    }
    params.pressure(frame.m / w_pre)?;

    let w_star = frame.sonic_relative_speed(params)?;
    if (w_pre - w_star).abs() <= lit::<T>(ZERO_STRENGTH_TOL) * w_star {
        return Ok(ShockJump {
            u_post: u_pre,
            zero_strength: true,
        });
    }

    let g = |w: T| {
        // difference form keeps the residual accurate near the minimum
        frame.m * (w - w_pre) + params.pressure_unchecked(frame.m / w)
            - params.pressure_unchecked(frame.m / w_pre)
    };
    let no_root = || JamitonError::NoJumpRoot {
        u_pre: u_pre.as_f64(),
    };

    let (lo, hi) = if w_pre > w_star {
        // partner is subsonic: between the jam limit w = m/ρ_M and w*
        let w_jam = frame.m / params.rho_max;
        let mut found = None;
        let mut gap = lit::<T>(0.1);
        for _ in 0..16 {
            let w = w_jam * (T::one() + gap);
            if w < w_star && g(w) > T::zero() {
                found = Some(w);
                break;
            }
            gap = gap * lit(0.1);
        }
        (found.ok_or_else(no_root)?, w_star)
    } else {
        // partner is supersonic
        let mut w = w_star * lit(2.0);
        let mut found = None;
        for _ in 0..64 {
            if g(w) > T::zero() {
                found = Some(w);
                break;
            }
            w = w * lit(2.0);
        }
        (w_star, found.ok_or_else(no_root)?)
    };

    let xtol = lit::<T>(1e-15) * w_star;
    let root = brent(g, lo, hi, xtol).map_err(|e| JamitonError::ConvergenceFailure {
        detail: format!("shock partner search: {e}"),
    })?;
    Ok(ShockJump {
        u_post: frame.s + root.x,
        zero_strength: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jamiton::cj::cj_construct;

    fn canon() -> ModelParams<f64> {
        ModelParams::paper_fig1()
    }

    #[test]
    fn involution() {
        let p = canon();
        let (frame, _) = cj_construct(&p, 0.07).unwrap();
        for u in [10.0, 12.0, 13.0] {
            let once = rh_jump(&p, &frame, u).unwrap().u_post;
            let twice = rh_jump(&p, &frame, once).unwrap().u_post;
            assert!((twice - u).abs() < 1e-9 * p.u0, "{u} -> {once} -> {twice}");
        }
    }

    #[test]
    fn sonic_state_has_zero_strength() {
        let p = canon();
        let (frame, sonic) = cj_construct(&p, 0.07).unwrap();
        let jump = rh_jump(&p, &frame, sonic.u_s).unwrap();
        assert!(jump.zero_strength);
        assert_eq!(jump.u_post, sonic.u_s);
    }

    #[test]
    fn jamiton_shock_by_dense_scan() {
        let p = canon();
        let (frame, sonic) = cj_construct(&p, 0.07).unwrap();
        let u_pre = 13.0;
        let jump = rh_jump(&p, &frame, u_pre).unwrap();
        assert!(jump.u_post < sonic.u_s);

        // oracle: scan the conservation function over (s, u_pre) for a sign change
        let flux = |u: f64| {
            let w = u - frame.s;
            frame.m * w + p.pressure(frame.m / w).unwrap_or(f64::INFINITY)
        };
        let target = flux(u_pre);
        let n = 200_000;
        let w_jam = frame.m / p.rho_max;
        let (mut a, mut b) = (f64::NAN, f64::NAN);
        for i in 1..n {
            let u0 = frame.s + w_jam + (sonic.u_s - frame.s - w_jam) * (i - 1) as f64 / n as f64;
            let u1 = frame.s + w_jam + (sonic.u_s - frame.s - w_jam) * i as f64 / n as f64;
            if (flux(u0) - target) * (flux(u1) - target) <= 0.0 {
                a = u0;
                b = u1;
                break;
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if (flux(a) - target) * (flux(mid) - target) <= 0.0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        assert!((0.5 * (a + b) - jump.u_post).abs() < 1e-9 * p.u0);
        assert!(rh_residual(&p, &frame, u_pre, jump.u_post) < 1e-12);
    }

    #[test]
    fn lax_admissible() {
        let p = canon();
        let (frame, _) = cj_construct(&p, 0.07).unwrap();
        let u_post = rh_jump(&p, &frame, 13.0).unwrap().u_post;
        let c_pre = p.sound_speed(0.07).unwrap();
        let c_post = p.sound_speed(frame.density(u_post)).unwrap();
        assert!(13.0 - frame.s > c_pre);
        assert!(c_post > u_post - frame.s);
    }

    #[test]
    fn rejects_state_behind_wave() {
        let p = canon();
        let (frame, _) = cj_construct(&p, 0.07).unwrap();
        assert!(rh_jump(&p, &frame, frame.s - 1.0).is_err());
    }
}
