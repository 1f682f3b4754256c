//! Phase arithmetic helpers.
//!
//! Every reduction modulo `2pi` and every inverse-cosine branch choice in the
//! crate goes through this module, so that phases compare consistently across
//! the spectral routines.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Full turn, `2pi`.
pub const TAU: f64 = 2.0 * PI;

/// Reduces an angle to the canonical interval `[0, 2pi)`.
///
/// Results within one floating-point ulp of `2pi` collapse to `0` so that the
/// interval stays half-open under rounding.
///
/// ```
/// use wavetrain::phase::mod_2pi;
/// let t = mod_2pi(-0.5);
/// assert!(t >= 0.0 && t < std::f64::consts::TAU);
/// assert!((t - (std::f64::consts::TAU - 0.5)).abs() < 1e-12);
/// ```
pub fn mod_2pi(angle: f64) -> f64 {
    let mut r = angle % TAU;
    if r < 0.0 {
        r += TAU;
    }
    if r >= TAU {
        r = 0.0;
    }
    r
}

/// Distance between two angles along the circle, in `[0, pi]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = mod_2pi(a - b);
    d.min(TAU - d)
}

/// Principal branch of the complex inverse cosine.
///
/// Wraps the standard library implementation so the branch convention is
/// fixed in one place: real part in `[0, pi]`, and `acos(conj z) = conj(acos z)`
/// away from the cuts.
pub fn acos_principal(z: Complex64) -> Complex64 {
    z.acos()
}
