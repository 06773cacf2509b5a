//! Adaptive Dormand–Prince 5(4) integration of scalar ODEs `y' = f(t, y)`.
//!
//! The right-hand side returns `None` where it is undefined; the step is
//! then rejected and retried with a smaller step size. Integration stops when
//! the independent variable has covered `span`, or earlier when `y` reaches an
//! optional target value. The target crossing is located by solving for the
//! step size that lands exactly on it, so the final point carries the same
//! local accuracy as any other accepted step.

use thiserror::Error;

use crate::numerics::roots::brent;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}, y = {y} (h = {h})")]
    StepSizeUnderflow { t: f64, y: f64, h: f64 },
    #[error("exceeded {0} steps")]
    MaxSteps(usize),
    #[error("right-hand side undefined at the initial point t = {t}, y = {y}")]
    UndefinedStart { t: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    SpanExhausted,
    TargetReached,
}

/// Accepted points of an integration, including the initial point.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    pub t: Vec<T>,
    pub y: Vec<T>,
    /// `f(t, y)` at each accepted point.
    pub dy: Vec<T>,
    pub reason: StopReason,
}

impl<T: Scalar> Trace<T> {
    pub fn last(&self) -> (T, T) {
        let n = self.t.len() - 1;
        (self.t[n], self.y[n])
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5<T> {
    pub rtol: T,
    pub atol: T,
    /// Smallest admissible |h| before giving up.
    pub h_min: T,
    /// Largest admissible |h|; `None` for unbounded.
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Scalar> Default for Dopri5<T> {
    fn default() -> Self {
        Self {
            rtol: lit(1e-10),
            atol: lit(1e-12),
            h_min: lit(1e-14),
            h_max: None,
            max_steps: 1_000_000,
        }
    }
}

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error coefficients b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct StepOut<T> {
    y: T,
    dy: T,
    err: T,
}

impl<T: Scalar> Dopri5<T> {
    pub fn with_tolerances(rtol: T, atol: T) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// One trial step of size `h` from `(t, y)` with known slope `k1`.
    fn try_step<F>(&self, f: &mut F, t: T, y: T, k1: T, h: T) -> Option<StepOut<T>>
    where
        F: FnMut(T, T) -> Option<T>,
    {
        let k2 = f(t + lit::<T>(C2) * h, y + h * lit::<T>(A21) * k1)?;
        let k3 = f(
            t + lit::<T>(C3) * h,
            y + h * (lit::<T>(A31) * k1 + lit::<T>(A32) * k2),
        )?;
        let k4 = f(
            t + lit::<T>(C4) * h,
            y + h * (lit::<T>(A41) * k1 + lit::<T>(A42) * k2 + lit::<T>(A43) * k3),
        )?;
        let k5 = f(
            t + lit::<T>(C5) * h,
            y + h
                * (lit::<T>(A51) * k1
                    + lit::<T>(A52) * k2
                    + lit::<T>(A53) * k3
                    + lit::<T>(A54) * k4),
        )?;
        let k6 = f(
            t + h,
            y + h
                * (lit::<T>(A61) * k1
                    + lit::<T>(A62) * k2
                    + lit::<T>(A63) * k3
                    + lit::<T>(A64) * k4
                    + lit::<T>(A65) * k5),
        )?;
        let y_new = y
            + h * (lit::<T>(B1) * k1
                + lit::<T>(B3) * k3
                + lit::<T>(B4) * k4
                + lit::<T>(B5) * k5
                + lit::<T>(B6) * k6);
        let k7 = f(t + h, y_new)?;
        let err = h
            * (lit::<T>(E1) * k1
                + lit::<T>(E3) * k3
                + lit::<T>(E4) * k4
                + lit::<T>(E5) * k5
                + lit::<T>(E6) * k6
                + lit::<T>(E7) * k7);
        if !(y_new.is_finite() && k7.is_finite() && err.is_finite()) {
            return None;
        }
        Some(StepOut { y: y_new, dy: k7, err })
    }

    /// Integrates from `(t0, y0)` over a signed interval `span` (negative to
    /// integrate backwards), starting with step magnitude `h0`.
    pub fn integrate<F>(
        &self,
        mut f: F,
        t0: T,
        y0: T,
        span: T,
        h0: T,
        target: Option<T>,
    ) -> Result<Trace<T>, OdeError>
    where
        F: FnMut(T, T) -> Option<T>,
    {
        let dir = if span < T::zero() { -T::one() } else { T::one() };
        let t_end = t0 + span;
        let k0 = f(t0, y0).ok_or(OdeError::UndefinedStart {
            t: t0.as_f64(),
            y: y0.as_f64(),
        })?;
        let mut trace = Trace {
            t: vec![t0],
            y: vec![y0],
            dy: vec![k0],
            reason: StopReason::SpanExhausted,
        };
        if let Some(target) = target {
            if y0 == target {
                trace.reason = StopReason::TargetReached;
                return Ok(trace);
            }
        }
        let (mut t, mut y, mut k1) = (t0, y0, k0);
        let mut h = h0.abs().max(self.h_min);
        let safety = lit::<T>(0.9);
        let fifth = lit::<T>(0.2);

        for _ in 0..self.max_steps {
            let remaining = (t_end - t) * dir;
            if remaining <= T::zero() {
                return Ok(trace);
            }
            if let Some(hmax) = self.h_max {
                h = h.min(hmax);
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * dir;
            let Some(s) = self.try_step(&mut f, t, y, k1, hs) else {
                // undefined somewhere inside the step
                h = h * lit(0.25);
                if h < self.h_min {
                    return Err(self.underflow(t, y, h));
                }
                continue;
            };
            let scale = self.atol + self.rtol * y.abs().max(s.y.abs());
            let ratio = s.err.abs() / scale;
            if ratio > T::one() {
                h = h * (safety * ratio.powf(-fifth)).max(lit(0.1));
                if h < self.h_min {
                    return Err(self.underflow(t, y, h));
                }
                continue;
            }

            if let Some(target) = target {
                let crossed = (y - target) * (s.y - target) <= T::zero();
                if crossed {
                    let (hit, y_hit, dy_hit) = self.land_on_target(&mut f, t, y, k1, hs, target);
                    trace.t.push(t + hit);
                    trace.y.push(y_hit);
                    trace.dy.push(dy_hit);
                    trace.reason = StopReason::TargetReached;
                    return Ok(trace);
                }
            }

            t = if last { t_end } else { t + hs };
            y = s.y;
            k1 = s.dy;
            trace.t.push(t);
            trace.y.push(y);
            trace.dy.push(k1);
            if last {
                return Ok(trace);
            }
            let grow = if ratio == T::zero() {
                lit(5.0)
            } else {
                (safety * ratio.powf(-fifth)).min(lit(5.0))
            };
            h = h * grow.max(lit(0.2));
        }
        Err(OdeError::MaxSteps(self.max_steps))
    }

    fn underflow(&self, t: T, y: T, h: T) -> OdeError {
        OdeError::StepSizeUnderflow {
            t: t.as_f64(),
            y: y.as_f64(),
            h: h.as_f64(),
        }
    }

    /// Finds the signed step `hit ∈ (0, hs]` with `step(hit).y == target`.
    fn land_on_target<F>(&self, f: &mut F, t: T, y: T, k1: T, hs: T, target: T) -> (T, T, T)
    where
        F: FnMut(T, T) -> Option<T>,
    {
        let g = |hh: T, f: &mut F| -> T {
            if hh == T::zero() {
                return y - target;
            }
            match self.try_step(f, t, y, k1, hh) {
                Some(s) => s.y - target,
                None => T::nan(),
            }
        };
        let tol = hs.abs() * lit(1e-15) + T::min_positive_value();
        let root = brent(|hh| g(hh, f), T::zero(), hs, tol);
        let hit = match root {
            Ok(r) => r.x,
            Err(_) => hs,
        };
        match self.try_step(f, t, y, k1, hit) {
            Some(s) => (hit, target, s.dy),
            None => (hit, target, k1),
        }
    }
}
