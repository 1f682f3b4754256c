//! Bracketing scalar root solvers.
//!
//! Brent's method carries the guarantees of bisection with superlinear
//! convergence on the smooth functions produced by the trace determinants.

/// Root of `f` inside `[a, b]` where `f(a)` and `f(b)` have opposite signs.
///
/// Converges to an interval of width `xtol + 4 eps |x|`; returns the best
/// abscissa. Panics in debug builds if the bracket is invalid.
pub(crate) fn brent<F: FnMut(f64) -> f64>(mut f: F, a0: f64, b0: f64, xtol: f64, max_iter: usize) -> f64 {
    let mut a = a0;
    let mut b = b0;
    let mut fa = f(a);
    let mut fb = f(b);
    debug_assert!(fa * fb <= 0.0, "brent: invalid bracket");
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = b - a;

    for _ in 0..max_iter {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation, falling back to secant.
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0));
                q = (q0 - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1.copysign(xm);
        }
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    b
}

/// Expands a bracket from `x0` towards `direction` until `f` changes sign or
/// the limit `x_lim` is reached. Returns the bracket if found.
pub(crate) fn bracket_outward<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    step0: f64,
    x_lim: f64,
) -> Option<(f64, f64)> {
    let mut a = x0;
    let mut fa = f(a);
    let mut h = step0;
    for _ in 0..200 {
        let mut b = a + h;
        let exhausted = if h > 0.0 { b >= x_lim } else { b <= x_lim };
        if exhausted {
            b = x_lim;
        }
        let fb = f(b);
        if fa * fb <= 0.0 {
            return Some(if a < b { (a, b) } else { (b, a) });
        }
        if exhausted {
            return None;
        }
        a = b;
        fa = fb;
        h *= 1.6;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cos_root() {
        let r = brent(|x: f64| x.cos(), 1.0, 2.0, 1e-14, 100);
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn brent_hard_flat_function() {
        // f has a root at 0 with very small slope nearby.
        let r = brent(|x: f64| x * x * x, -1.0, 2.0, 1e-14, 200);
        assert!(r.abs() < 1e-4);
    }

    #[test]
    fn bracket_walks_to_sign_change() {
        let f = |x: f64| x - 5.0;
        let (a, b) = bracket_outward(f, 0.0, 0.5, 100.0).unwrap();
        assert!(a <= 5.0 && 5.0 <= b);
        assert!(bracket_outward(|x: f64| x + 10.0, 0.0, 0.5, 100.0).is_none());
    }
}
