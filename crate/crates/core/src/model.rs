//! Model constants, the algebraic closures and linear stability of uniform flow.
//!
//! The closures are the Greenshields desired speed `ũ(ρ) = ũ₀ (1 − ρ/ρ_M)` and a
//! traffic pressure with `dp/dρ = βρ/(ρ_M − ρ)`, normalized so that `p(0) = 0`.
//! Everything is in SI units: metres, seconds, vehicles per metre.

use thiserror::Error;

use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model parameter `{field}` must be strictly positive and finite, got {value}")]
    InvalidParameter { field: &'static str, value: f64 },
    #[error("{what}: density {rho} outside admissible range (rho_max = {rho_max})")]
    Domain {
        what: &'static str,
        rho: f64,
        rho_max: f64,
    },
    #[error("uniform flow is stable at every density: no unstable band")]
    NoUnstableBand,
}

/// The four physical constants describing road and driver behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Pressure-closure coefficient β, m²/s².
    pub beta: T,
    /// Jam density ρ_M, vehicles/m.
    pub rho_max: T,
    /// Free-flow desired speed ũ₀, m/s.
    pub u0: T,
    /// Relaxation time τ, s.
    pub tau: T,
}

/// Name of the canonical parameter preset.
pub const PAPER_FIG1: &str = "paper-fig1";

impl<T: Scalar> ModelParams<T> {
    pub fn new(beta: T, rho_max: T, u0: T, tau: T) -> Result<Self, ModelError> {
        let params = Self {
            beta,
            rho_max,
            u0,
            tau,
        };
        params.validate()?;
        Ok(params)
    }

    /// β = 10 m²/s², ρ_M = 0.2 /m, ũ₀ = 20 m/s, τ = 5 s.
    pub fn paper_fig1() -> Self {
        Self {
            beta: lit(10.0),
            rho_max: lit(0.2),
            u0: lit(20.0),
            tau: lit(5.0),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (field, value) in [
            ("beta", self.beta),
            ("rho_max", self.rho_max),
            ("u0", self.u0),
            ("tau", self.tau),
        ] {
            if !(value.is_finite() && value > T::zero()) {
                return Err(ModelError::InvalidParameter {
                    field,
                    value: value.as_f64(),
                });
            }
        }
        Ok(())
    }

    fn domain(&self, what: &'static str, rho: T) -> ModelError {
        ModelError::Domain {
            what,
            rho: rho.as_f64(),
            rho_max: self.rho_max.as_f64(),
        }
    }

    /// Desired speed `ũ₀(1 − ρ/ρ_M)`, defined on `[0, ρ_M]`.
    pub fn desired_speed(&self, rho: T) -> Result<T, ModelError> {
        if !(rho >= T::zero() && rho <= self.rho_max) {
            return Err(self.domain("desired_speed", rho));
        }
        Ok(self.desired_speed_unchecked(rho))
    }

    #[inline]
    pub(crate) fn desired_speed_unchecked(&self, rho: T) -> T {
        self.u0 * (T::one() - rho / self.rho_max)
    }

    /// Slope `dũ/dρ = −ũ₀/ρ_M` (constant for the linear closure).
    #[inline]
    pub fn desired_speed_slope(&self) -> T {
        -self.u0 / self.rho_max
    }

    /// Traffic pressure `β[ρ_M ln(ρ_M/(ρ_M − ρ)) − ρ]`, defined on `[0, ρ_M)`.
    pub fn pressure(&self, rho: T) -> Result<T, ModelError> {
        if !(rho >= T::zero() && rho < self.rho_max) {
            return Err(self.domain("pressure", rho));
        }
        Ok(self.pressure_unchecked(rho))
    }

    #[inline]
    pub(crate) fn pressure_unchecked(&self, rho: T) -> T {
        // -ρ_M ln(1 − ρ/ρ_M) − ρ, written with ln_1p to keep accuracy at small ρ
        let r = rho / self.rho_max;
        self.beta * (-self.rho_max * (-r).ln_1p() - rho)
    }

    /// `dp/dρ = c² = βρ/(ρ_M − ρ)`.
    pub fn sound_speed_sq(&self, rho: T) -> Result<T, ModelError> {
        if !(rho >= T::zero() && rho < self.rho_max) {
            return Err(self.domain("sound_speed", rho));
        }
        Ok(self.sound_speed_sq_unchecked(rho))
    }

    #[inline]
    pub(crate) fn sound_speed_sq_unchecked(&self, rho: T) -> T {
        self.beta * rho / (self.rho_max - rho)
    }

    /// Sound speed `c = (dp/dρ)^{1/2}`.
    pub fn sound_speed(&self, rho: T) -> Result<T, ModelError> {
        self.sound_speed_sq(rho).map(|c2| c2.sqrt())
    }

    /// Sub-characteristic test: uniform flow at `rho` is linearly unstable iff
    /// `ρ|ũ'(ρ)| > c(ρ)`, i.e. `(ũ₀ρ/ρ_M)² > βρ/(ρ_M − ρ)`.
    pub fn is_unstable(&self, rho: T) -> Result<bool, ModelError> {
        if !(rho > T::zero() && rho < self.rho_max) {
            return Err(self.domain("is_unstable", rho));
        }
        let kinematic = self.u0 * rho / self.rho_max;
        Ok(kinematic * kinematic > self.sound_speed_sq_unchecked(rho))
    }

    /// The two roots of `ρ(ρ_M − ρ)(ũ₀/ρ_M)² = β` bounding the band of
    /// linearly unstable densities.
    pub fn critical_densities(&self) -> Result<(T, T), ModelError> {
        // ρ² − ρ_M ρ + βρ_M²/ũ₀² = 0
        let half = self.rho_max * lit(0.5);
        let product = self.beta * self.rho_max * self.rho_max / (self.u0 * self.u0);
        let disc = half * half - product;
        if !(disc > T::zero()) {
            return Err(ModelError::NoUnstableBand);
        }
        let hi = half + disc.sqrt();
        Ok((product / hi, hi))
    }
}

/// A uniform state sitting on the equilibrium curve `u = ũ(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumState<T> {
    pub rho: T,
    pub u: T,
}

impl<T: Scalar> EquilibriumState<T> {
    pub fn new(params: &ModelParams<T>, rho: T) -> Result<Self, ModelError> {
        if !(rho > T::zero() && rho < params.rho_max) {
            return Err(params.domain("equilibrium state", rho));
        }
        Ok(Self {
            rho,
            u: params.desired_speed_unchecked(rho),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn canon() -> ModelParams<f64> {
        ModelParams::paper_fig1()
    }

    #[test]
    fn desired_speed_values() {
        let p = canon();
        assert_eq!(p.desired_speed(0.0).unwrap(), 20.0);
        assert_eq!(p.desired_speed(0.2).unwrap(), 0.0);
        assert_relative_eq!(p.desired_speed(0.02).unwrap(), 18.0, epsilon = 1e-12);
        assert!(p.desired_speed(-1e-9).is_err());
        assert!(p.desired_speed(0.2 + 1e-9).is_err());
    }

    #[test]
    fn pressure_zero_and_monotone() {
        let p = canon();
        assert_eq!(p.pressure(0.0).unwrap(), 0.0);
        assert!(p.pressure(0.19).unwrap() > p.pressure(0.1).unwrap());
        assert!(matches!(p.pressure(0.2), Err(ModelError::Domain { .. })));
    }

    #[test]
    fn pressure_slope_matches_closure() {
        let p = canon();
        let h = 1e-6;
        let rho = 0.1;
        let fd = (p.pressure(rho + h).unwrap() - p.pressure(rho - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(fd, 10.0 * 0.1 / 0.1, max_relative = 1e-8);
    }

    #[test]
    fn sound_speed_values() {
        let p = canon();
        assert_eq!(p.sound_speed(0.0).unwrap(), 0.0);
        // finite-difference slope of pressure at ρ_M/2
        let h = 1e-6;
        let fd = (p.pressure(0.1 + h).unwrap() - p.pressure(0.1 - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(p.sound_speed(0.1).unwrap(), fd.sqrt(), max_relative = 1e-8);
        assert_relative_eq!(p.sound_speed(0.1).unwrap(), 3.1622776601683795, max_relative = 1e-12);
        assert!(p.sound_speed(0.19).unwrap() > p.sound_speed(0.1).unwrap());
        assert!(p.sound_speed(0.2).is_err());
    }

    #[test]
    fn stability_examples() {
        let p = canon();
        assert!(!p.is_unstable(1e-9).unwrap());
        assert!(p.is_unstable(0.02).unwrap());
        assert!(!p.is_unstable(0.002).unwrap());
        // direct evaluation of both sides
        let lhs: f64 = (20.0 * 0.02 / 0.2f64).powi(2);
        let rhs = 10.0 * 0.02 / (0.2 - 0.02);
        assert!(lhs > rhs);
    }

    #[test]
    fn critical_densities_canonical() {
        let p = canon();
        let (lo, hi) = p.critical_densities().unwrap();
        // quadratic formula on 1000ρ² − 200ρ + 1 = 0
        let d: f64 = (200.0f64 * 200.0 - 4000.0).sqrt();
        assert_relative_eq!(lo, (200.0 - d) / 2000.0, max_relative = 1e-12);
        assert_relative_eq!(hi, (200.0 + d) / 2000.0, max_relative = 1e-12);
        assert!((lo - 0.00513).abs() < 5e-6 && (hi - 0.19487).abs() < 5e-6);
        assert!(p.is_unstable(lo * (1.0 + 1e-6)).unwrap());
        assert!(!p.is_unstable(lo * (1.0 - 1e-6)).unwrap());
        assert!(p.is_unstable(hi * (1.0 - 1e-6)).unwrap());
        assert!(!p.is_unstable(hi * (1.0 + 1e-6)).unwrap());
    }

    #[test]
    fn critical_densities_by_bisection() {
        let p = canon();
        let (lo, _) = p.critical_densities().unwrap();
        let (mut a, mut b) = (1e-6, 0.1);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if p.is_unstable(mid).unwrap() {
                b = mid;
            } else {
                a = mid;
            }
        }
        assert_relative_eq!(0.5 * (a + b), lo, max_relative = 1e-10);
    }

    #[test]
    fn stiff_pressure_has_no_band() {
        let mut p = canon();
        p.beta *= 1e6;
        assert_eq!(p.critical_densities(), Err(ModelError::NoUnstableBand));
    }

    #[test]
    fn band_consistent_on_grid() {
        let p = canon();
        let (lo, hi) = p.critical_densities().unwrap();
        for i in 1..10_000 {
            let rho = 0.2 * i as f64 / 10_000.0;
            let inside = rho > lo && rho < hi;
            assert_eq!(p.is_unstable(rho).unwrap(), inside, "rho = {rho}");
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::new(10.0, 0.2, 20.0, -1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.2, 20.0, 5.0).is_err());
        assert!(ModelParams::new(10.0f32, 0.2, 20.0, 5.0).is_ok());
    }

    #[test]
    fn equilibrium_state_on_curve() {
        let p = canon();
        let e = EquilibriumState::new(&p, 0.07).unwrap();
        assert_eq!(e.u, p.desired_speed(0.07).unwrap());
        assert!(EquilibriumState::new(&p, 0.2).is_err());
    }

    #[test]
    fn single_precision_closures() {
        let p = ModelParams::<f32>::paper_fig1();
        assert!((p.sound_speed(0.1).unwrap() - 10f32.sqrt()).abs() < 1e-5);
        assert!(p.is_unstable(0.02).unwrap());
    }

    proptest! {
        #[test]
        fn sound_speed_squared_is_pressure_slope(frac in 0.001f64..0.99) {
            let p = canon();
            let rho = frac * p.rho_max;
            let h = 1e-6 * p.rho_max;
            let lo = (rho - h).max(0.0);
            let fd = (p.pressure(rho + h).unwrap() - p.pressure(lo).unwrap()) / (rho + h - lo);
            let c2 = p.sound_speed_sq(rho).unwrap();
            prop_assert!(((fd - c2) / c2).abs() < 1e-6, "fd {} vs c2 {}", fd, c2);
        }

        #[test]
        fn desired_speed_is_affine(r1 in 0.0f64..0.2, r2 in 0.0f64..0.2, a in 0.0f64..1.0) {
            let p = canon();
            let mixed = p.desired_speed(a * r1 + (1.0 - a) * r2).unwrap();
            let combo = a * p.desired_speed(r1).unwrap() + (1.0 - a) * p.desired_speed(r2).unwrap();
            prop_assert!((mixed - combo).abs() < 1e-13);
        }
    }
}
