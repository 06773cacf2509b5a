//! Bracketed scalar root finding.

use thiserror::Error;

use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("root not bracketed: f({a}) = {fa}, f({b}) = {fb}")]
    NotBracketed { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("function returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("no convergence after {iterations} iterations (bracket width {width})")]
    MaxIterations { iterations: usize, width: f64 },
}

/// Result of a successful bracketed search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub x: T,
    pub fx: T,
    pub iterations: usize,
}

const MAX_ITER: usize = 200;

/// Brent's method on `[a, b]` where `f(a)` and `f(b)` differ in sign.
///
/// Terminates when the bracket is narrower than `xtol` (plus a few ulps of
/// `|x|`) or an exact zero is hit.
pub fn brent<T, F>(mut f: F, a: T, b: T, xtol: T) -> Result<Root<T>, RootError>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let fa = f(a);
    let fb = f(b);
    brent_with_values(f, a, fa, b, fb, xtol)
}

/// As [`brent`] with the endpoint values already known.
pub fn brent_with_values<T, F>(
    mut f: F,
    a: T,
    fa: T,
    b: T,
    fb: T,
    xtol: T,
) -> Result<Root<T>, RootError>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { x: a.as_f64() });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { x: b.as_f64() });
    }
    if fa == T::zero() {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb == T::zero() {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed {
            a: a.as_f64(),
            b: b.as_f64(),
            fa: fa.as_f64(),
            fb: fb.as_f64(),
        });
    }

    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * xtol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(Root { x: b, fx: fb, iterations: iter });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = two * m * s;
                q = T::one() - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (lit::<T>(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite { x: b.as_f64() });
        }
    }
    Err(RootError::MaxIterations {
        iterations: MAX_ITER,
        width: (c - b).abs().as_f64(),
    })
}

/// Walks `x = start + k·step` for `k = 1, 2, …` while `x` stays on the
/// `start` side of `limit`, returning the first sub-interval across which
/// `f` changes sign together with the endpoint values.
///
/// `f` may return `None` where it is undefined; such points end the current
/// run without producing a bracket.
pub fn scan_for_sign_change<T, F>(
    mut f: F,
    start: T,
    step: T,
    limit: T,
) -> Option<(T, T, T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Option<T>,
{
    let mut prev = f(start).map(|v| (start, v));
    let dir = step.signum();
    let mut k = 1usize;
    loop {
        let x = start + step * T::of_usize(k);
        if (limit - x) * dir < T::zero() {
            return None;
        }
        let cur = f(x).filter(|v| v.is_finite());
        if let (Some((xp, fp)), Some(fx)) = (prev, cur) {
            if fp == T::zero() || fx.signum() != fp.signum() {
                return Some((xp, fp, x, fx));
            }
        }
        prev = cur.map(|v| (x, v));
        k += 1;
    }
}

/// Safeguarded Newton iteration on a bracket where `f(lo) < 0 < f(hi)`,
/// falling back to bisection whenever the Newton step leaves the bracket.
pub fn newton_bisect<T, F>(mut f: F, lo: T, hi: T, xtol: T) -> Result<Root<T>, RootError>
where
    T: Scalar,
    F: FnMut(T) -> (T, T),
{
    let (mut lo, mut hi) = (lo, hi);
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if !(flo < T::zero() && fhi > T::zero()) {
        return Err(RootError::NotBracketed {
            a: lo.as_f64(),
            b: hi.as_f64(),
            fa: flo.as_f64(),
            fb: fhi.as_f64(),
        });
    }
    let mut x = lit::<T>(0.5) * (lo + hi);
    for iter in 1..=MAX_ITER {
        let (fx, dfx) = f(x);
        if fx == T::zero() {
            return Ok(Root { x, fx, iterations: iter });
        }
        if fx < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != T::zero() && newton > lo && newton < hi {
            newton
        } else {
            lit::<T>(0.5) * (lo + hi)
        };
        let tol = xtol + lit::<T>(4.0) * T::epsilon() * next.abs();
        if (next - x).abs() <= tol || hi - lo <= tol {
            let (fnext, _) = f(next);
            return Ok(Root { x: next, fx: fnext, iterations: iter });
        }
        x = next;
    }
    Err(RootError::MaxIterations {
        iterations: MAX_ITER,
        width: (hi - lo).as_f64(),
    })
}
