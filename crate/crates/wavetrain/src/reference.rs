//! Independent reference values for verification.
//!
//! Everything in this module recomputes quantities the rest of the crate
//! produces by different means: complete elliptic integrals via the
//! arithmetic-geometric mean, pendulum periods in closed form, fixed-order
//! Gauss-Legendre quadrature built from Newton iterations on Legendre
//! polynomials, and constant-coefficient monodromy traces. The test suites
//! and the command-line self-check compare against these; production code
//! paths must never call into here, or the comparisons stop being checks.

use num_complex::Complex64;

/// Complete elliptic integral of the first kind, parameter convention
/// `K(m) = integral_0^{pi/2} (1 - m sin^2 t)^(-1/2) dt`, via the AGM.
pub fn elliptic_k(m: f64) -> f64 {
    assert!(m < 1.0, "K(m) requires m < 1");
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..64 {
        if (a - b).abs() < 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    std::f64::consts::FRAC_PI_2 / a
}

/// Closed-form period of a subluminal rotational sine-Gordon wave (`E < 0`).
pub fn sine_gordon_rotation_period_subluminal(e: f64, c: f64) -> f64 {
    assert!(e < 0.0 && c * c < 1.0);
    let m = 2.0 / (2.0 - e);
    ((1.0 - c * c) / 2.0).sqrt() * 4.0 * elliptic_k(m) / (2.0 - e).sqrt()
}

/// Closed-form period of a superluminal rotational sine-Gordon wave (`E > 2`).
pub fn sine_gordon_rotation_period_superluminal(e: f64, c: f64) -> f64 {
    assert!(e > 2.0 && c * c > 1.0);
    let m = 2.0 / e;
    ((c * c - 1.0) / 2.0).sqrt() * 4.0 * elliptic_k(m) / e.sqrt()
}

/// Closed-form period of a librational sine-Gordon wave, `0 < E < 2`.
///
/// Subluminal waves oscillate about `u = pi` with modulus `1 - E/2`;
/// superluminal waves oscillate about `u = 0` with modulus `E/2`. Both give
/// the harmonic limit `2 pi sqrt(|c^2 - 1|)` as the modulus tends to zero.
pub fn sine_gordon_libration_period(e: f64, c: f64) -> f64 {
    assert!(e > 0.0 && e < 2.0);
    let m = if c * c < 1.0 { 1.0 - e / 2.0 } else { e / 2.0 };
    4.0 * (c * c - 1.0).abs().sqrt() * elliptic_k(m)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on `P_n` from the three-term recurrence; standard
/// Chebyshev-based initial guesses converge in a handful of steps.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Librational period by fixed-order Gauss-Legendre quadrature with the
/// `sin^2` endpoint substitution, written directly from the energy integral.
pub fn librational_period_oracle(
    v: impl Fn(f64) -> f64,
    e: f64,
    c: f64,
    u_min: f64,
    u_max: f64,
) -> f64 {
    let mass = c * c - 1.0;
    let width = u_max - u_min;
    let (nodes, weights) = gauss_legendre(128);
    let mut total = 0.0;
    // sigma in (0, pi/2), node x in (-1, 1).
    for (&x, &w) in nodes.iter().zip(&weights) {
        let sigma = std::f64::consts::FRAC_PI_4 * (x + 1.0);
        let sn = sigma.sin();
        let u = u_min + width * sn * sn;
        let r = 2.0 * (e - v(u)) / mass;
        total += w * 2.0 * width * sn * sigma.cos() / r.sqrt();
    }
    2.0 * total * std::f64::consts::FRAC_PI_4
}

/// Rotational period by fixed-order Gauss-Legendre quadrature over one
/// `u`-period.
pub fn rotational_period_oracle(v: impl Fn(f64) -> f64, e: f64, c: f64, u_period: f64) -> f64 {
    let mass = c * c - 1.0;
    let (nodes, weights) = gauss_legendre(128);
    let mut total = 0.0;
    for (&x, &w) in nodes.iter().zip(&weights) {
        let u = 0.5 * u_period * (x + 1.0);
        let r = 2.0 * (e - v(u)) / mass;
        total += w / r.sqrt();
    }
    0.5 * u_period * total
}

/// Monodromy trace of `q'' + a q = 0` over length `t`: `2 cos(sqrt(a) t)`.
pub fn constant_hill_trace(a: Complex64, t: f64) -> Complex64 {
    let omega = a.sqrt();
    2.0 * (omega * t).cos()
}

/// Derivative of [`constant_hill_trace`] in the coefficient `a`:
/// `-t sin(sqrt(a) t) / sqrt(a)`, with the removable singularity at `a = 0`
/// filled by its limit `-t^2`.
pub fn constant_hill_trace_derivative(a: Complex64, t: f64) -> Complex64 {
    let omega = a.sqrt();
    if omega.norm() < 1e-8 {
        let wt2 = a * t * t;
        // sin(x)/x = 1 - x^2/6 + x^4/120 with x^2 = a t^2.
        return -t * t * (Complex64::new(1.0, 0.0) - wt2 / 6.0 + wt2 * wt2 / 120.0);
    }
    -t * (omega * t).sin() / omega
}

/// Plain bisection, deliberately minimal and local to this module.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) <= 0.0, "oracle bisection needs a sign change");
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        if f(m) * fa.signum() <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_k_known_values() {
        // K(0) = pi/2; K(1/2) = 1.85407467730137...
        assert!((elliptic_k(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((elliptic_k(0.5) - 1.854_074_677_301_372).abs() < 1e-13);
        assert!((elliptic_k(0.8) - 2.257_205_326_820_854).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        // Exact through degree 23: check x^10 over [-1, 1] = 2/11.
        let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(10)).sum();
        assert!((got - 2.0 / 11.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_trace_real_and_imag_regimes() {
        // a > 0: oscillatory, trace in [-2, 2].
        let t = constant_hill_trace(Complex64::new(4.0, 0.0), 1.0);
        assert!((t.re - 2.0 * (2.0f64).cos()).abs() < 1e-14);
        // a < 0: hyperbolic growth, trace = 2 cosh(2).
        let t = constant_hill_trace(Complex64::new(-4.0, 0.0), 1.0);
        assert!((t.re - 2.0 * (2.0f64).cosh()).abs() < 1e-12);
    }

    #[test]
    fn trace_derivative_limit_at_zero() {
        let d = constant_hill_trace_derivative(Complex64::new(1e-14, 0.0), 2.0);
        assert!((d.re + 4.0).abs() < 1e-10);
    }

    #[test]
    fn bisect_root_solves_quartic() {
        let e = -0.216;
        let r = bisect_root(|u| 0.25 * u.powi(4) - 0.5 * u * u - e, 0.1, 1.0, 80);
        let exact = (1.0 - (1.0 + 4.0 * e).sqrt()).sqrt();
        assert!((r - exact).abs() < 1e-12);
    }
}
