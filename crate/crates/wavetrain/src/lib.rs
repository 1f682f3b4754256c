//! Spectral analysis of periodic travelling waves of nonlinear Klein-Gordon
//! equations
//!
//! ```text
//!     u_tt - u_xx + V'(u) = 0
//! ```
//!
//! A travelling wave `u(x,t) = U(x - ct)` with profile period `T` carries a
//! family of linearised Floquet problems indexed by a phase `theta` in
//! `[0, 2pi)`. This crate locates the temporal spectrum `lambda = i zeta` of
//! those problems by reducing the quadratic eigenvalue pencil to a Hill's
//! equation, evaluating a trace-based determinant
//!
//! ```text
//!     D2(zeta; theta) = tr H(T; zeta) - 2 cos(c zeta T / (c^2 - 1) + theta)
//! ```
//!
//! whose zeros are the spectrum, and classifying on-axis collisions of
//! characteristic values through their Krein signatures.
//!
//! Module layout:
//!
//! * [`potential`] and [`waves`]: wave existence, orbit classification,
//!   periods, profiles, and phase portraits.
//! * [`hill`]: monodromy matrices of the Hill form and of the untransformed
//!   linearisation, plus the variational system used for trace derivatives.
//! * [`evans`]: the determinants `D1`, `D2`, `D3`, the Hill discriminant,
//!   and Krein signatures via the derivative of the associated eigenvalue
//!   branch.
//! * [`spectrum`]: phase recovery `theta(zeta)`, plane scans, real
//!   characteristic values at fixed phase, and phase sweeps that detect and
//!   refine collision events.
//! * [`reference`]: independent closed forms (elliptic integrals,
//!   constant-state traces) used only for verification.
//!
//! # Example
//!
//! Period and on-axis spectrum of a subluminal rotational wave:
//!
//! ```
//! use wavetrain::potential::Potential;
//! use wavetrain::waves::{Branch, WaveParameters, compute_period, wave_profile};
//! use wavetrain::evans::{EvansContext, evans_d2};
//! use num_complex::Complex64;
//!
//! let params = WaveParameters::new(Potential::sine_gordon(), -0.5, 0.5,
//!                                  Branch::RotationPositive)?;
//! let t = compute_period(&params)?;
//! assert!((t - 3.497).abs() < 1e-3);
//!
//! // zeta = 0 is always a characteristic value of the theta = 0 problem.
//! let profile = wave_profile(&params, 64)?;
//! let ctx = EvansContext::new(&profile, 0.0);
//! let d2 = evans_d2(&ctx, Complex64::new(0.0, 0.0))?;
//! assert!(d2.norm() < 1e-8);
//! # Ok::<(), wavetrain::Error>(())
//! ```

pub mod evans;
pub mod hill;
mod ode;
pub mod phase;
pub mod potential;
mod quad;
pub mod reference;
mod roots;
pub mod spectrum;
pub mod waves;

pub use ode::Integrator;

/// Errors shared by every layer of the crate.
///
/// Operations distinguish invalid requests (no orbit, wrong branch, bad
/// window) from numerical breakdown (step-size collapse, divergence guards)
/// so that callers can map them to distinct exit statuses.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The potential triple failed a consistency or periodicity check.
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    /// Wave parameters outside the admissible set (for example `c^2 = 1`).
    #[error("invalid wave parameters: {0}")]
    InvalidParameters(String),

    /// No closed orbit exists for the requested branch and energy.
    #[error("no closed orbit for the requested branch at E = {energy}")]
    NoOrbit { energy: f64 },

    /// The energy sits on (or hugs) a separatrix where the period diverges.
    #[error("period diverges: E = {energy} is within guard distance of the separatrix energy {separatrix}")]
    SeparatrixDivergence { energy: f64, separatrix: f64 },

    /// A rotational branch was requested where none exists.
    #[error("rotational branch unavailable: {0}")]
    RotationalUnavailable(String),

    /// An adaptive integrator or quadrature failed to reach its tolerance.
    #[error("numerical integration failure in {context}: {detail}")]
    IntegrationFailure { context: String, detail: String },

    /// Krein data was requested at `zeta = 0`, which is never simple.
    #[error("zeta = 0 is never a simple characteristic value")]
    ZeroCharacteristicValue,

    /// The simplicity guard `|tr H| < 2 - guard_tol` failed.
    #[error("characteristic value at zeta0 = {zeta0} is not simple: |tr H| = {tr_abs}")]
    NonSimple { zeta0: f64, tr_abs: f64 },

    /// The residual guard `|D2| < root_tol` failed.
    #[error("zeta0 = {zeta0} is not a characteristic value: |D2| = {residual}")]
    NotACharacteristicValue { zeta0: f64, residual: f64 },

    /// Root matching between sweep steps had no unique nearest neighbour.
    #[error("track matching ambiguous near theta = {theta}, zeta = {zeta}")]
    TrackingAmbiguity { theta: f64, zeta: f64 },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
