//! Traveling-wave frame and the reduced wave ODE `du/dη = N(u)/D(u)`.
//!
//! In a frame moving with speed `s`, mass conservation integrates to
//! `ρ(u − s) = m`, so every quantity on a traveling wave is a function of `u`
//! alone. With `w = u − s` the numerator and denominator of the wave ODE are
//!
//! ```text
//! N(u) = w (ũ(m/w) − u) = −(w² + (s − ũ₀) w + ũ₀ m/ρ_M)
//! D(u) = w² − c²(m/w)  = w² − βm/(ρ_M w − m)
//! ```

use crate::jamiton::JamitonError;
use crate::model::ModelParams;
use crate::numerics::roots::newton_bisect;
use crate::scalar::{lit, Scalar};

/// Speed `s` of a traveling wave and the mass flux `m = ρ(u − s)` through it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveFrame<T> {
    /// Wave speed, m/s; negative when the wave runs against traffic.
    pub s: T,
    /// Wave-frame mass flux, vehicles/s.
    pub m: T,
}

/// State at the sonic point `u − s = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SonicState<T> {
    pub u_s: T,
    pub rho_s: T,
    /// `du/dη` through the sonic point.
    pub slope: T,
}

/// Magnitude below which the denominator counts as vanished, relative to ũ₀².
pub(crate) const SINGULAR_TOL: f64 = 1e-14;

impl<T: Scalar> WaveFrame<T> {
    pub fn new(s: T, m: T) -> Result<Self, JamitonError> {
        if !(m > T::zero() && m.is_finite() && s.is_finite()) {
            return Err(JamitonError::InvalidFrame {
                s: s.as_f64(),
                m: m.as_f64(),
            });
        }
        Ok(Self { s, m })
    }

    /// Density on the wave at speed `u`, `m/(u − s)`.
    #[inline]
    pub fn density(&self, u: T) -> T {
        self.m / (u - self.s)
    }

    /// Whether `u` maps to an admissible density `0 < ρ < ρ_M`.
    #[inline]
    pub fn admissible(&self, params: &ModelParams<T>, u: T) -> bool {
        let w = u - self.s;
        w > T::zero() && params.rho_max * w > self.m
    }

    fn check(&self, params: &ModelParams<T>, u: T) -> Result<T, JamitonError> {
        if !self.admissible(params, u) {
            return Err(JamitonError::OutsideWave {
                u: u.as_f64(),
                s: self.s.as_f64(),
                m: self.m.as_f64(),
            });
        }
        Ok(u - self.s)
    }

    /// Numerator `N(u) = (u − s)(ũ − u)`.
    pub fn numerator(&self, params: &ModelParams<T>, u: T) -> Result<T, JamitonError> {
        let w = self.check(params, u)?;
        Ok(self.numerator_w(params, w))
    }

    #[inline]
    pub(crate) fn numerator_w(&self, params: &ModelParams<T>, w: T) -> T {
        -((w + (self.s - params.u0)) * w + params.u0 * self.m / params.rho_max)
    }

    /// Denominator `D(u) = (u − s)² − c²`.
    pub fn denominator(&self, params: &ModelParams<T>, u: T) -> Result<T, JamitonError> {
        let w = self.check(params, u)?;
        Ok(self.denominator_w(params, w))
    }

    #[inline]
    pub(crate) fn denominator_w(&self, params: &ModelParams<T>, w: T) -> T {
        w * w - params.beta * self.m / (params.rho_max * w - self.m)
    }

    /// `dN/du`.
    pub fn numerator_slope(&self, params: &ModelParams<T>, u: T) -> Result<T, JamitonError> {
        let w = self.check(params, u)?;
        Ok(params.u0 - self.s - lit::<T>(2.0) * w)
    }

    /// `dD/du`.
    pub fn denominator_slope(&self, params: &ModelParams<T>, u: T) -> Result<T, JamitonError> {
        let w = self.check(params, u)?;
        let gap = params.rho_max * w - self.m;
        Ok(lit::<T>(2.0) * w + params.beta * self.m * params.rho_max / (gap * gap))
    }

    /// Right-hand side of the wave ODE, `du/dη = N(u)/D(u)`.
    ///
    /// Where numerator and denominator vanish together the removable limit
    /// `N'(u)/D'(u)` is returned.
    pub fn ode_rhs(&self, params: &ModelParams<T>, u: T) -> Result<T, JamitonError> {
        let w = self.check(params, u)?;
        let num = self.numerator_w(params, w);
        let den = self.denominator_w(params, w);
        let scale = params.u0 * params.u0;
        if den.abs() <= lit::<T>(SINGULAR_TOL) * scale {
            if num.abs() <= lit::<T>(1e-10) * scale {
                let dn = self.numerator_slope(params, u)?;
                let dd = self.denominator_slope(params, u)?;
                return Ok(dn / dd);
            }
            return Err(JamitonError::SonicSingularity { u: u.as_f64() });
        }
        Ok(num / den)
    }

    /// `dη/du = D(u)/N(u)`, the reciprocal formulation with `u` as the
    /// independent variable. `None` where the numerator vanishes.
    pub(crate) fn deta_du(&self, params: &ModelParams<T>, u: T) -> Option<T> {
        if !self.admissible(params, u) {
            return None;
        }
        let w = u - self.s;
        let num = self.numerator_w(params, w);
        if num == T::zero() {
            return None;
        }
        Some(self.denominator_w(params, w) / num)
    }

    /// The sonic relative speed for this mass flux: the unique positive root
    /// of `ρ_M w³ − m w² − βm = 0`, i.e. `w² = c²(m/w)`.
    pub fn sonic_relative_speed(&self, params: &ModelParams<T>) -> Result<T, JamitonError> {
        let (rho_max, m, beta) = (params.rho_max, self.m, params.beta);
        let cubic = |w: T| {
            (
                (rho_max * w - m) * w * w - beta * m,
                (lit::<T>(3.0) * rho_max * w - lit::<T>(2.0) * m) * w,
            )
        };
        let hi = m / rho_max + lit::<T>(2.0) * (beta * m / rho_max).cbrt();
        let tol = T::epsilon() * hi;
        newton_bisect(cubic, T::zero(), hi, tol)
            .map(|r| r.x)
            .map_err(|e| JamitonError::ConvergenceFailure {
                detail: format!("sonic cubic: {e}"),
            })
    }

    /// Roots `(small, large)` of the equilibrium condition `ũ(m/(u − s)) = u`,
    /// `u² − (s + ũ₀)u + ũ₀(s + m/ρ_M) = 0`. `None` if they are complex.
    pub fn equilibrium_roots(&self, params: &ModelParams<T>) -> Option<(T, T)> {
        // in w = u − s: w² + (s − ũ₀)w + ũ₀m/ρ_M = 0
        let b = self.s - params.u0;
        let c = params.u0 * self.m / params.rho_max;
        let disc = b * b - lit::<T>(4.0) * c;
        if disc < T::zero() {
            return None;
        }
        let sgn = if b < T::zero() { -T::one() } else { T::one() };
        let q = lit::<T>(-0.5) * (b + sgn * disc.sqrt());
        let (w1, w2) = (q, c / q);
        let (lo, hi) = if w1 < w2 { (w1, w2) } else { (w2, w1) };
        Some((self.s + lo, self.s + hi))
    }
}

/// Free-function form of [`WaveFrame::ode_rhs`].
pub fn ode_rhs<T: Scalar>(
    params: &ModelParams<T>,
    frame: &WaveFrame<T>,
    u: T,
) -> Result<T, JamitonError> {
    frame.ode_rhs(params, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon() -> ModelParams<f64> {
        ModelParams::paper_fig1()
    }

    #[test]
    fn numerator_matches_direct_form() {
        let p = canon();
        let f = WaveFrame::new(-2.0, 1.1).unwrap();
        for &u in &[4.0, 7.5, 12.0, 15.0] {
            let rho = f.density(u);
            let direct = (u - f.s) * (p.desired_speed(rho).unwrap() - u);
            assert!((f.numerator(&p, u).unwrap() - direct).abs() < 1e-12);
            let d = (u - f.s).powi(2) - p.sound_speed_sq(rho).unwrap();
            assert!((f.denominator(&p, u).unwrap() - d).abs() < 1e-10);
        }
    }

    #[test]
    fn sonic_root_solves_cubic() {
        let p = canon();
        let f = WaveFrame::new(1.0, 0.8).unwrap();
        let w = f.sonic_relative_speed(&p).unwrap();
        assert!(w > 0.0);
        let rho = f.m / w;
        assert!((w * w - p.sound_speed_sq(rho).unwrap()).abs() < 1e-12 * w * w);
    }

    #[test]
    fn rhs_vanishes_at_equilibrium_root() {
        let p = canon();
        let f = WaveFrame::new(-1.0, 1.0).unwrap();
        let (_, hi) = f.equilibrium_roots(&p).unwrap();
        assert!(f.ode_rhs(&p, hi).unwrap().abs() < 1e-12);
        // and the root really is an equilibrium
        let rho = f.density(hi);
        assert!((p.desired_speed(rho).unwrap() - hi).abs() < 1e-12);
    }

    #[test]
    fn outside_wave_rejected() {
        let p = canon();
        let f = WaveFrame::new(0.0, 1.0).unwrap();
        assert!(f.ode_rhs(&p, -0.1).is_err());
        // rho = m/u >= rho_max
        assert!(f.ode_rhs(&p, 5.0).is_err());
        assert!(WaveFrame::new(0.0, -1.0).is_err());
    }

    #[test]
    fn singular_denominator_detected() {
        let p = canon();
        // a non-CJ frame: sonic point is not an equilibrium root
        let f = WaveFrame::new(0.0, 1.0).unwrap();
        let w = f.sonic_relative_speed(&p).unwrap();
        assert!(f.numerator(&p, w).unwrap().abs() > 1.0);
        assert!(matches!(
            f.ode_rhs(&p, w),
            Err(JamitonError::SonicSingularity { .. })
        ));
    }
}
