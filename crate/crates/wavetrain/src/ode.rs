//! Adaptive Dormand-Prince 5(4) integration over fixed-size real states.
//!
//! The spectral routines integrate small coupled systems (wave profile plus
//! complex solution pairs, at most 18 real components), so the state is a
//! stack array `[f64; N]` and the right-hand side returns by value. The
//! embedded fourth-order solution drives a standard PI-free step controller
//! on a mixed absolute/relative error norm.

/// Failure modes of a single initial-value solve.
#[derive(Debug, Clone)]
pub(crate) enum OdeError {
    /// The controller drove the step size below the resolvable limit.
    StepSizeUnderflow { x: f64 },
    /// The step budget was exhausted before reaching the endpoint.
    TooManySteps { x: f64 },
    /// The state or the right-hand side stopped being finite.
    NonFinite { x: f64 },
}

impl std::fmt::Display for OdeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OdeError::StepSizeUnderflow { x } => write!(f, "step size underflow at z = {x}"),
            OdeError::TooManySteps { x } => write!(f, "step budget exhausted at z = {x}"),
            OdeError::NonFinite { x } => write!(f, "non-finite state at z = {x}"),
        }
    }
}

// Dormand-Prince coefficients. The fifth-order weights coincide with the
// last stage row (first-same-as-last), so `k7` of an accepted step is `k1`
// of the next.
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
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Tolerances and step budget of the adaptive integrator.
///
/// The default is used throughout the crate; passing a custom value to
/// [`crate::hill::integrate_hill_with`] re-checks a result at a different
/// accuracy, which is how scan output is validated.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    /// Absolute error tolerance per component.
    pub atol: f64,
    /// Relative error tolerance per component.
    pub rtol: f64,
    /// Hard cap on accepted plus rejected steps before giving up.
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        // Monodromy determinants drift like rtol * exp(2 kappa T) at
        // hyperbolic spectral parameters. The tightest routine use is the
        // scan determinant monitor at 1e-8 on window corners with
        // kappa T ~ 9, which needs rtol below ~1e-12; one extra decade
        // keeps the margin without a visible runtime cost.
        Integrator { atol: 1e-15, rtol: 1e-13, max_steps: 4_000_000 }
    }
}

impl Integrator {
    /// Integrates `y' = f(x, y)` from `x0` to `x1 >= x0`, returning `y(x1)`.
    pub(crate) fn solve<const N: usize, F>(&self, f: F, x0: f64, x1: f64, y0: [f64; N]) -> Result<[f64; N], OdeError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = y0;
        self.solve_path(f, x0, &[x1], y0, |_, _, y| out = *y)?;
        Ok(out)
    }

    /// Integrates through an increasing list of checkpoints, invoking
    /// `on_point(index, x, y)` at each one. Steps are clamped to land on the
    /// checkpoints exactly; the adaptive step size carries across them.
    pub(crate) fn solve_path<const N: usize, F, G>(
        &self,
        f: F,
        x0: f64,
        checkpoints: &[f64],
        y0: [f64; N],
        mut on_point: G,
    ) -> Result<(), OdeError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        G: FnMut(usize, f64, &[f64; N]),
    {
        let x_end = match checkpoints.last() {
            Some(&x) => x,
            None => return Ok(()),
        };
        debug_assert!(checkpoints.windows(2).all(|w| w[0] <= w[1]));
        let span = (x_end - x0).max(f64::MIN_POSITIVE);

        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        let mut h = initial_step(&f, x, &y, &k1, span, self.atol, self.rtol);
        let h_min = span * 1e-15;

        let mut next = 0usize;
        while next < checkpoints.len() && checkpoints[next] <= x {
            on_point(next, x, &y);
            next += 1;
        }

        let mut steps = 0usize;
        while next < checkpoints.len() {
            if steps >= self.max_steps {
                return Err(OdeError::TooManySteps { x });
            }
            steps += 1;

            let target = checkpoints[next];
            let mut clipped = false;
            if x + h >= target {
                h = target - x;
                clipped = true;
            }
            if h < h_min {
                if clipped {
                    // Checkpoint within rounding distance: emit and advance.
                    x = target;
                    on_point(next, target, &y);
                    next += 1;
                    h = h_min * 100.0;
                    continue;
                }
                return Err(OdeError::StepSizeUnderflow { x });
            }

            let (y5, err, k7) = dopri5_step(&f, x, &y, &k1, h, self.atol, self.rtol);
            if !err.is_finite() {
                return Err(OdeError::NonFinite { x });
            }

            if err <= 1.0 {
                x += h;
                y = y5;
                k1 = k7;
                if clipped {
                    x = target;
                    on_point(next, x, &y);
                    next += 1;
                }
            }

            let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
            h *= factor.clamp(0.2, 5.0);
        }
        Ok(())
    }
}

/// One Dormand-Prince step. Returns the fifth-order solution, the scaled
/// error norm, and the last stage derivative (valid as `k1` on acceptance).
#[inline]
fn dopri5_step<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    atol: f64,
    rtol: f64,
) -> ([f64; N], f64, [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut t = [0.0; N];

    for i in 0..N {
        t[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = f(x + C2 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = f(x + C3 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = f(x + C4 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = f(x + C5 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = f(x + h, &t);

    let mut y5 = [0.0; N];
    for i in 0..N {
        y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = f(x + h, &y5);

    let mut err_sq = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = atol + rtol * y[i].abs().max(y5[i].abs());
        let r = e / scale;
        err_sq += r * r;
    }
    let err = (err_sq / N as f64).sqrt();
    (y5, err, k7)
}

/// Conservative first step from the scaled sizes of the state and slope.
fn initial_step<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    span: f64,
    atol: f64,
    rtol: f64,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y[i].abs();
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h0 = h0.min(span / 10.0).max(span * 1e-10);

    // One explicit Euler probe to bound the second derivative.
    let mut t = [0.0; N];
    for i in 0..N {
        t[i] = y[i] + h0 * k1[i];
    }
    let k2 = f(x + h0, &t);
    let mut d2 = 0.0;
    for i in 0..N {
        let sc = atol + rtol * y[i].abs();
        let r = (k2[i] - k1[i]) / sc;
        d2 += r * r;
    }
    d2 = (d2 / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) < 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    h0.min(h1).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let integ = Integrator::default();
        let y = integ.solve(|_, y: &[f64; 1]| [-y[0]], 0.0, 3.0, [1.0]).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_energy_preserved() {
        let integ = Integrator::default();
        let y = integ
            .solve(|_, y: &[f64; 2]| [y[1], -4.0 * y[0]], 0.0, 20.0, [1.0, 0.0])
            .unwrap();
        let energy = 4.0 * y[0] * y[0] + y[1] * y[1];
        assert!((energy - 4.0).abs() < 1e-8);
        // y(t) = cos(2t)
        assert!((y[0] - (40.0f64).cos()).abs() < 1e-8);
    }

    #[test]
    fn checkpoints_hit_exactly() {
        let integ = Integrator::default();
        let xs = [0.5, 1.0, 1.5, 2.0];
        let mut seen = Vec::new();
        integ.solve_path(|_, y: &[f64; 1]| [y[0]], 0.0, &xs, [1.0], |i, x, y| {
            seen.push((i, x, y[0]));
        })
        .unwrap();
        assert_eq!(seen.len(), 4);
        for (i, x, v) in seen {
            assert_eq!(x, xs[i]);
            assert!((v - x.exp()).abs() < 1e-9, "checkpoint {i}");
        }
    }

    #[test]
    fn stiff_blowup_reports_failure() {
        let integ = Integrator { max_steps: 500, ..Integrator::default() };
        // y' = y^2 blows up at x = 1; requesting x = 2 must fail, not hang.
        let r = integ.solve(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, 2.0, [1.0]);
        assert!(r.is_err());
    }
}
