//! Evans functions and Krein signatures for linearised wavetrains.
//!
//! For a wave profile of period `T` and speed `c`, spectral points at
//! Floquet exponent `theta` are zeros in `zeta` of
//!
//! ```text
//! D2(zeta; theta) = tr H(T; zeta) - 2 cos(c zeta T/(c^2-1) + theta),
//! ```
//!
//! where `H` is the Hill monodromy matrix from [`crate::hill`]. `D2` is
//! entire in `zeta`, real for real `zeta`, and even in `zeta` at
//! `theta = 0`. Two classical companions are kept for cross-validation:
//!
//! ```text
//! D1(zeta; theta) = det(F(T; zeta) - e^{-i theta} I),
//! D3(zeta; theta) = det(H(T; zeta) - e^{-i(c zeta T/(c^2-1) + theta)} I),
//! ```
//!
//! with `F` the monodromy of the untransformed linearised equation. All
//! three share zero sets: `D1 = -e^{i(c zeta T/(c^2-1) - theta)} D2` and
//! `D3 = -e^{-i(c zeta T/(c^2-1) + theta)} D2`.
//!
//! On the real `zeta` axis the pencil is self-adjoint and each simple
//! characteristic value `zeta0` carries a Krein signature: the sign of the
//! derivative `mu'(zeta0)` of the eigenvalue branch `mu(zeta)` of the
//! shifted pencil through `(zeta0, 0)`,
//!
//! ```text
//! mu'(zeta0) = 2 zeta0/(c^2-1)^2
//!            + 4 c zeta0 T/(c^2-1)^3 * sin(c zeta0 T/(c^2-1) + theta) / D'_Hill(zeta0),
//! ```
//!
//! where `D_Hill(zeta) = tr H(T; zeta) - 2` and its `zeta`-derivative comes
//! from the variational system, `D'_Hill = (2 zeta0/(c^2-1)^2) tr dH/dv`.
//! The formula requires `zeta0 != 0` and `|tr H| < 2`; the latter also
//! keeps `D'_Hill` away from zero because the Hill discriminant is strictly
//! monotone in `v` wherever `|tr H| < 2`. Collisions of characteristic
//! values of opposite signature mark Hamiltonian-Hopf bifurcations.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::hill::{
    integrate_hill, integrate_hill_variational, integrate_linearised, HillCoefficient,
};
use crate::waves::WaveProfile;
use crate::{Error, Result};

/// Simplicity guard: reject `zeta0` as non-simple when `2 - |tr H|` is
/// below this. Inside the band (`|tr H| < 2`) the branch derivative is
/// well-defined; at band edges the formula degenerates to 0/0.
pub const GUARD_TOL: f64 = 1e-6;

/// Root-residual guard: `zeta0` must satisfy `|D2(zeta0; theta)| < ROOT_TOL`
/// to count as a characteristic value at the context's `theta`.
pub const ROOT_TOL: f64 = 1e-8;

/// Reduces an angle to the canonical interval `[0, 2*pi)`.
///
/// Every angle stored or compared by this crate goes through this single
/// reduction so branch choices stay consistent across modules.
pub fn mod_two_pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU when x is a tiny negative.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A wave profile paired with a Floquet exponent `theta in [0, 2*pi)`.
///
/// Evans-function evaluations are pure functions of this context and the
/// spectral parameter `zeta`.
#[derive(Debug, Clone)]
pub struct EvansContext {
    profile: WaveProfile,
    theta: f64,
}

impl EvansContext {
    /// Builds a context, reducing `theta` into `[0, 2*pi)`.
    pub fn new(profile: &WaveProfile, theta: f64) -> Self {
        EvansContext { profile: profile.clone(), theta: mod_two_pi(theta) }
    }

    pub fn profile(&self) -> &WaveProfile {
        &self.profile
    }

    /// The Floquet exponent, always in `[0, 2*pi)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Frequency of the rotation term: `c T/(c^2-1)`.
    ///
    /// The cosine in `D2` has argument `rotation_rate * zeta + theta`.
    pub fn rotation_rate(&self) -> f64 {
        let params = self.profile.params();
        params.speed() * self.profile.period() / params.mass()
    }

    /// Argument of the rotation term, `c zeta T/(c^2-1) + theta`.
    pub fn rotation_argument(&self, zeta: Complex64) -> Complex64 {
        self.rotation_rate() * zeta + self.theta
    }

    /// Assembles `D2` from an already-computed Hill trace at `zeta`.
    ///
    /// Grid scans integrate the Hill equation once per node and reuse the
    /// trace; this is the single place the combination is written down.
    pub fn d2_from_trace(&self, zeta: Complex64, trace: Complex64) -> Complex64 {
        trace - 2.0 * self.rotation_argument(zeta).cos()
    }
}

/// The principal Evans function `D2(zeta; theta)`.
///
/// Entire in `zeta`; zeros are exactly the characteristic values at the
/// context's Floquet exponent.
pub fn evans_d2(ctx: &EvansContext, zeta: Complex64) -> Result<Complex64> {
    let v = HillCoefficient::new(ctx.profile(), zeta, 0.0).v();
    let m = integrate_hill(ctx.profile(), v)?;
    Ok(ctx.d2_from_trace(zeta, m.trace()))
}

/// The untransformed Evans function `D1 = det(F - e^{-i theta} I)`.
///
/// Kept for cross-validation: `D1 = -exp(i c zeta T/(c^2-1) - i theta) D2`.
pub fn evans_d1(ctx: &EvansContext, zeta: Complex64) -> Result<Complex64> {
    let f = integrate_linearised(ctx.profile(), zeta, 0.0)?;
    let shift = Complex64::from_polar(1.0, -ctx.theta());
    Ok(f.shifted_det(shift))
}

/// The Hill-side determinant Evans function
/// `D3 = det(H - exp(-i c zeta T/(c^2-1) - i theta) I)`.
///
/// Satisfies `D3 = -exp(-i c zeta T/(c^2-1) - i theta) D2`, so it shares
/// the zero set of `D2`.
pub fn evans_d3(ctx: &EvansContext, zeta: Complex64) -> Result<Complex64> {
    let v = HillCoefficient::new(ctx.profile(), zeta, 0.0).v();
    let h = integrate_hill(ctx.profile(), v)?;
    let shift = (-Complex64::i() * ctx.rotation_argument(zeta)).exp();
    Ok(h.shifted_det(shift))
}

/// The Evans function of the periodic (`theta`-free) Hill problem,
/// `D_Hill(zeta) = tr H(T; zeta) - 2`.
pub fn evans_hill(profile: &WaveProfile, zeta: Complex64) -> Result<Complex64> {
    let v = HillCoefficient::new(profile, zeta, 0.0).v();
    let m = integrate_hill(profile, v)?;
    Ok(m.trace() - 2.0)
}

/// Guard quantities recorded alongside a Krein signature.
#[derive(Debug, Clone, Copy)]
pub struct KreinGuards {
    /// `|tr H(T; zeta0)|`; must sit below `2 - GUARD_TOL`.
    pub trace_abs: f64,
    /// `|D'_Hill(zeta0)|`; bounded away from zero inside the band.
    pub d_hill_prime_abs: f64,
}

/// Krein signature of a simple real characteristic value.
#[derive(Debug, Clone, Copy)]
pub struct KreinResult {
    pub zeta0: f64,
    /// Eigenvalue-branch derivative `mu'(zeta0)`.
    pub mu_prime: f64,
    /// `sign(mu_prime)`: +1 or -1 for simple values. 0 is never produced
    /// here; sweeps assign it exactly at detected collision events, where
    /// this function instead returns an error.
    pub kappa: i8,
    pub guards: KreinGuards,
}

struct BranchSlope {
    mu_prime: f64,
    trace_abs: f64,
    d_hill_prime: f64,
}

fn branch_slope(ctx: &EvansContext, zeta0: f64) -> Result<BranchSlope> {
    if zeta0 == 0.0 {
        return Err(Error::ZeroCharacteristicValue);
    }
    let profile = ctx.profile();
    let mass = profile.params().mass();
    let v = HillCoefficient::new(profile, Complex64::new(zeta0, 0.0), 0.0).v();
    let (m, dv) = integrate_hill_variational(profile, v)?;
    let trace = m.trace();
    let trace_abs = trace.norm();
    if trace_abs >= 2.0 - GUARD_TOL {
        return Err(Error::NonSimple { zeta0, tr_abs: trace_abs });
    }
    let residual = ctx.d2_from_trace(Complex64::new(zeta0, 0.0), trace).norm();
    if residual >= ROOT_TOL {
        return Err(Error::NotACharacteristicValue { zeta0, residual });
    }
    let rotation = ctx.rotation_rate() * zeta0 + ctx.theta();
    let trace_v = dv[0][0] + dv[1][1];
    let d_hill_prime = 2.0 * zeta0 / (mass * mass) * trace_v.re;
    let speed = profile.params().speed();
    let period = profile.period();
    let mu_prime = 2.0 * zeta0 / mass.powi(2)
        + 4.0 * speed * zeta0 * period / mass.powi(3) * rotation.sin() / d_hill_prime;
    Ok(BranchSlope { mu_prime, trace_abs, d_hill_prime })
}

/// Derivative `mu'(zeta0)` of the eigenvalue branch of the shifted pencil.
///
/// Errors: [`Error::ZeroCharacteristicValue`] at `zeta0 = 0` (never
/// simple), [`Error::NonSimple`] when `|tr H| >= 2 - GUARD_TOL`, and
/// [`Error::NotACharacteristicValue`] when `|D2(zeta0; theta)| >= ROOT_TOL`.
pub fn mu_prime(ctx: &EvansContext, zeta0: f64) -> Result<f64> {
    Ok(branch_slope(ctx, zeta0)?.mu_prime)
}

/// Krein signature `kappa = sign(mu'(zeta0))` with its guard record.
pub fn krein_signature(ctx: &EvansContext, zeta0: f64) -> Result<KreinResult> {
    let slope = branch_slope(ctx, zeta0)?;
    let kappa = if slope.mu_prime > 0.0 {
        1
    } else if slope.mu_prime < 0.0 {
        -1
    } else {
        0
    };
    Ok(KreinResult {
        zeta0,
        mu_prime: slope.mu_prime,
        kappa,
        guards: KreinGuards {
            trace_abs: slope.trace_abs,
            d_hill_prime_abs: slope.d_hill_prime.abs(),
        },
    })
}
