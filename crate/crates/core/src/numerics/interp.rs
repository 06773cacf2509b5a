//! Piecewise interpolation helpers.

use crate::scalar::{lit, Scalar};

/// Cubic Hermite interpolation on `[x0, x1]` given values and slopes.
#[inline]
pub fn hermite<T: Scalar>(x0: T, y0: T, d0: T, x1: T, y1: T, d1: T, x: T) -> T {
    let h = x1 - x0;
    if h == T::zero() {
        return y0;
    }
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Index `i` with `xs[i] <= x < xs[i + 1]` for ascending `xs`, clamped to the
/// valid interval range.
#[inline]
pub fn bracket_index<T: Scalar>(xs: &[T], x: T) -> usize {
    debug_assert!(xs.len() >= 2);
    let i = xs.partition_point(|&v| v <= x);
    i.clamp(1, xs.len() - 1) - 1
}

/// Linear interpolation of samples `(xs, ys)` on a ring of length `period`;
/// `xs` ascending within `[0, period)`.
pub fn ring_linear<T: Scalar>(xs: &[T], ys: &[T], period: T, x: T) -> T {
    let n = xs.len();
    debug_assert!(n >= 1 && ys.len() == n);
    if n == 1 {
        return ys[0];
    }
    let mut x = x % period;
    if x < T::zero() {
        x = x + period;
    }
    let (x0, y0, x1, y1) = if x < xs[0] {
        (xs[n - 1] - period, ys[n - 1], xs[0], ys[0])
    } else if x >= xs[n - 1] {
        (xs[n - 1], ys[n - 1], xs[0] + period, ys[0])
    } else {
        let i = bracket_index(xs, x);
        (xs[i], ys[i], xs[i + 1], ys[i + 1])
    };
    let w = x1 - x0;
    if w <= T::zero() {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let v = hermite(0.5, f(0.5), df(0.5), 2.0, f(2.0), df(2.0), 1.3);
        assert!((v - f(1.3)).abs() < 1e-13);
    }

    #[test]
    fn bracket_index_clamps() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(bracket_index(&xs, -1.0), 0);
        assert_eq!(bracket_index(&xs, 1.5), 1);
        assert_eq!(bracket_index(&xs, 3.0), 2);
        assert_eq!(bracket_index(&xs, 7.0), 2);
    }

    #[test]
    fn ring_linear_wraps() {
        let xs = [1.0, 4.0, 7.0];
        let ys = [0.0_f64, 3.0, 6.0];
        assert!((ring_linear(&xs, &ys, 10.0, 2.5) - 1.5).abs() < 1e-14);
        // between 7 and 11 (= 1 + 10): from 6 down to 0
        assert!((ring_linear(&xs, &ys, 10.0, 9.0) - 3.0).abs() < 1e-14);
        assert!((ring_linear(&xs, &ys, 10.0, 0.0) - 1.5).abs() < 1e-14);
        assert!((ring_linear(&xs, &ys, 10.0, -1.0) - 3.0).abs() < 1e-14);
    }
}
