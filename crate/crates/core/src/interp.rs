//! Cubic Hermite interpolation on `(t, f, f')` knots.

/// Value and derivative of the cubic Hermite interpolant on `[t0, t1]`.
#[inline]
pub fn hermite(t0: f64, f0: f64, d0: f64, t1: f64, f1: f64, d1: f64, t: f64) -> (f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1;
    (value, deriv)
}

/// Value and derivative of the quintic Hermite interpolant matching
/// `(f, f', f'')` at both ends of `[t0, t1]`.
#[inline]
pub fn hermite5(t0: f64, a: [f64; 3], t1: f64, b: [f64; 3], t: f64) -> (f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let d0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    let d1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let d2 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
    let d3 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
    let d4 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let d5 = -d0;
    let value = h0 * a[0] + h * h1 * a[1] + h * h * h2 * a[2] + h5 * b[0] + h * h4 * b[1] + h * h * h3 * b[2];
    let deriv = (d0 * a[0] + d5 * b[0]) / h + d1 * a[1] + d4 * b[1] + h * (d2 * a[2] + d3 * b[2]);
    (value, deriv)
}

/// Index `i` with `knots[i] <= t <= knots[i + 1]`, clamped to the valid range.
#[inline]
pub fn segment(knots: &[f64], t: f64) -> usize {
    let i = knots.partition_point(|&k| k <= t);
    i.saturating_sub(1).min(knots.len().saturating_sub(2))
}

/// Root of `f` on `[lo, hi]` given a sign change, by bisection to width `tol`.
pub fn bisect_root(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return (mid, mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}
