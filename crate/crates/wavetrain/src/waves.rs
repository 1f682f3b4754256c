//! Existence and geometry of periodic travelling waves.
//!
//! A travelling wave `u(x,t) = U(z)`, `z = x - ct`, of
//! `u_tt - u_xx + V'(u) = 0` satisfies
//!
//! ```text
//!     (c^2 - 1) U'' + V'(U) = 0,
//!     (c^2 - 1) U'^2 / 2 + V(U) = E.
//! ```
//!
//! Multiplying the energy relation by `s = sign(c^2 - 1)` turns every case
//! into a unit-mass particle in the effective potential `s V` with energy
//! `s E`: orbits live where `s V <= s E`, librational orbits circle minima of
//! `s V` (subluminal waves therefore oscillate about maxima of `V`), and
//! rotational orbits exist for periodic potentials once `s E` clears every
//! critical value of `s V`. Periods follow from the quadrature
//!
//! ```text
//!     T = 2 * integral du / sqrt(2 (E - V(u)) / (c^2 - 1))
//! ```
//!
//! between turning points (once around the `u`-period for rotations), with a
//! `sin^2` substitution absorbing the square-root turning-point singularity.

use crate::ode::Integrator;
use crate::potential::Potential;
use crate::{quad, roots, Error, Result};

/// Orbit selector within the phase portrait at fixed `(E, c)`.
///
/// `LeftWell`/`RightWell` pick the leftmost/rightmost well of the effective
/// potential `sign(c^2 - 1) V`; when only one well exists the two coincide.
/// `OuterOrbit` selects the family enclosing every critical point (quartic
/// double well above the homoclinic energy). Rotational branches require a
/// periodic potential and carry the sign of `U'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    LeftWell,
    RightWell,
    OuterOrbit,
    RotationPositive,
    RotationNegative,
}

impl Branch {
    pub fn is_rotational(self) -> bool {
        matches!(self, Branch::RotationPositive | Branch::RotationNegative)
    }
}

/// Wave-speed regime crossed with the orbit topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SubluminalLibrational,
    SubluminalRotational,
    SuperluminalLibrational,
    SuperluminalRotational,
}

impl Regime {
    pub fn is_subluminal(self) -> bool {
        matches!(self, Regime::SubluminalLibrational | Regime::SubluminalRotational)
    }

    pub fn is_librational(self) -> bool {
        matches!(self, Regime::SubluminalLibrational | Regime::SuperluminalLibrational)
    }
}

/// Admissible parameter set for one travelling wave.
#[derive(Debug, Clone)]
pub struct WaveParameters {
    potential: Potential,
    energy: f64,
    speed: f64,
    branch: Branch,
}

impl WaveParameters {
    /// Validates `c^2 != 1` (the travelling-wave reduction degenerates on
    /// the characteristics) and finiteness of the inputs.
    pub fn new(potential: Potential, energy: f64, speed: f64, branch: Branch) -> Result<Self> {
        if !energy.is_finite() || !speed.is_finite() {
            return Err(Error::InvalidParameters("energy and speed must be finite".into()));
        }
        if (speed * speed - 1.0).abs() < 1e-12 {
            return Err(Error::InvalidParameters(format!(
                "speed c = {speed} is on the characteristic cone c^2 = 1"
            )));
        }
        Ok(WaveParameters { potential, energy, speed, branch })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `c^2 - 1`, the mass factor of the travelling-wave reduction.
    pub fn mass(&self) -> f64 {
        self.speed * self.speed - 1.0
    }

    /// `sign(c^2 - 1)`.
    pub fn orientation(&self) -> f64 {
        if self.mass() > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `U'^2` as a function of `u` on the orbit.
    fn speed_squared(&self, u: f64) -> f64 {
        2.0 * (self.energy - self.potential.v(u)) / self.mass()
    }
}

/// Critical point of the effective potential `s V`.
#[derive(Debug, Clone, Copy)]
struct CriticalPoint {
    u: f64,
    /// Effective value `s V(u)`.
    value: f64,
    /// True for minima of `s V` (centres of the phase flow).
    is_well: bool,
}

/// Resolved orbit geometry for one parameter set.
#[derive(Debug, Clone)]
pub(crate) struct OrbitGeometry {
    pub kind: OrbitKind,
}

#[derive(Debug, Clone)]
pub(crate) enum OrbitKind {
    Librational { u_min: f64, u_max: f64 },
    Rotational { positive: bool },
}

const SEPARATRIX_GUARD: f64 = 1e-10;

/// Locates critical points of `s V` over the search domain.
///
/// Midpoint sampling of `V'` avoids landing exactly on the roots of the
/// built-in potentials; for periodic potentials the wrap-around interval is
/// scanned as well so a critical point at `u = 0` is found once.
fn critical_points(potential: &Potential, s: f64) -> Vec<CriticalPoint> {
    let (lo, hi) = potential.search_domain();
    let n = 2048;
    let h = (hi - lo) / n as f64;
    let node = |i: usize| lo + (i as f64 + 0.5) * h;

    let mut raw: Vec<f64> = Vec::new();
    let mut push_root = |u: f64| {
        if !raw.iter().any(|&r| (r - u).abs() < 2.0 * h) {
            raw.push(u);
        }
    };

    let mut prev_u = node(0);
    let mut prev_f = potential.dv(prev_u);
    for i in 1..n {
        let u = node(i);
        let f = potential.dv(u);
        if prev_f == 0.0 {
            push_root(prev_u);
        } else if prev_f * f < 0.0 {
            let r = roots::brent(|x| potential.dv(x), prev_u, u, 1e-14, 120);
            push_root(r);
        }
        prev_u = u;
        prev_f = f;
    }
    if potential.is_periodic() {
        // Close the circle: scan from the last node to the first node + P.
        let p = potential.period().unwrap();
        let a = node(n - 1);
        let b = node(0) + p;
        let fa = potential.dv(a);
        let fb = potential.dv(b);
        if fa * fb < 0.0 {
            let mut r = roots::brent(|x| potential.dv(x), a, b, 1e-14, 120);
            if r >= hi {
                r -= p;
            }
            push_root(r);
        }
    }

    let mut pts: Vec<CriticalPoint> = raw
        .into_iter()
        .map(|u| CriticalPoint {
            u,
            value: s * potential.v(u),
            is_well: s * potential.d2v(u) > 0.0,
        })
        .collect();
    pts.sort_by(|a, b| a.u.total_cmp(&b.u));
    pts
}

/// The wells (centres) of the effective potential with their barrier data.
#[derive(Debug, Clone, Copy)]
struct Well {
    center: f64,
    /// Effective potential value at the bottom.
    floor: f64,
    /// Lowest adjacent effective saddle value; `None` when both flanks rise
    /// without a critical point (coercive side).
    barrier: Option<f64>,
    left_saddle: Option<f64>,
    right_saddle: Option<f64>,
}

fn wells(potential: &Potential, s: f64) -> Vec<Well> {
    let pts = critical_points(potential, s);
    let n = pts.len();
    let mut out = Vec::new();
    for (i, pt) in pts.iter().enumerate() {
        if !pt.is_well {
            continue;
        }
        // Nearest saddle on each side; periodic potentials wrap around.
        let mut left = None;
        let mut right = None;
        if let Some(p) = potential.period() {
            for k in 1..=n {
                let j = (i + k) % n;
                if !pts[j].is_well {
                    let shift = if i + k >= n { p } else { 0.0 };
                    right = Some((pts[j].u + shift, pts[j].value));
                    break;
                }
            }
            for k in 1..=n {
                let j = (i + n - (k % n)) % n;
                if !pts[j].is_well {
                    let shift = if k > i { p } else { 0.0 };
                    left = Some((pts[j].u - shift, pts[j].value));
                    break;
                }
            }
        } else {
            right = pts[i + 1..].iter().find(|q| !q.is_well).map(|q| (q.u, q.value));
            left = pts[..i].iter().rev().find(|q| !q.is_well).map(|q| (q.u, q.value));
        }
        let barrier = match (left, right) {
            (Some((_, a)), Some((_, b))) => Some(a.min(b)),
            (Some((_, a)), None) | (None, Some((_, a))) => Some(a),
            (None, None) => None,
        };
        out.push(Well {
            center: pt.u,
            floor: pt.value,
            barrier,
            left_saddle: left.map(|(u, _)| u),
            right_saddle: right.map(|(u, _)| u),
        });
    }
    out
}

/// Resolves the orbit selected by the parameters, applying the degeneracy
/// and separatrix guards shared by the period and profile routines.
pub(crate) fn resolve_orbit(params: &WaveParameters) -> Result<OrbitGeometry> {
    let s = params.orientation();
    let pot = &params.potential;
    let e_eff = s * params.energy;
    let eff = |u: f64| s * pot.v(u);

    match params.branch {
        Branch::RotationPositive | Branch::RotationNegative => {
            if !pot.is_periodic() {
                return Err(Error::RotationalUnavailable(format!(
                    "potential '{}' is not periodic in u",
                    pot.name()
                )));
            }
            let top = critical_points(pot, s)
                .iter()
                .map(|p| p.value)
                .fold(f64::NEG_INFINITY, f64::max);
            if (e_eff - top).abs() < SEPARATRIX_GUARD {
                return Err(Error::SeparatrixDivergence { energy: params.energy, separatrix: s * top });
            }
            if e_eff < top {
                return Err(Error::RotationalUnavailable(format!(
                    "U' vanishes on the orbit: effective energy {e_eff} does not clear the barrier {top}"
                )));
            }
            Ok(OrbitGeometry {
                kind: OrbitKind::Rotational { positive: params.branch == Branch::RotationPositive },
            })
        }
        Branch::LeftWell | Branch::RightWell => {
            let ws = wells(pot, s);
            let well = match params.branch {
                Branch::LeftWell => ws.first(),
                _ => ws.last(),
            }
            .copied()
            .ok_or_else(|| Error::NoOrbit { energy: params.energy })?;

            if let Some(b) = well.barrier {
                if (e_eff - b).abs() < SEPARATRIX_GUARD {
                    return Err(Error::SeparatrixDivergence { energy: params.energy, separatrix: s * b });
                }
                if e_eff > b {
                    return Err(Error::NoOrbit { energy: params.energy });
                }
            }
            if e_eff <= well.floor {
                // At the floor the orbit degenerates to the constant state.
                return Err(Error::NoOrbit { energy: params.energy });
            }

            let (dlo, dhi) = pot.search_domain();
            let span = dhi - dlo;
            let f = |u: f64| eff(u) - e_eff;
            let u_min = solve_turning(&f, well.center, well.left_saddle, -1.0, span, params.energy)?;
            let u_max = solve_turning(&f, well.center, well.right_saddle, 1.0, span, params.energy)?;
            Ok(OrbitGeometry {
                kind: OrbitKind::Librational { u_min, u_max },
            })
        }
        Branch::OuterOrbit => {
            if pot.is_periodic() {
                return Err(Error::NoOrbit { energy: params.energy });
            }
            let pts = critical_points(pot, s);
            let saddle_top = pts
                .iter()
                .filter(|p| !p.is_well)
                .map(|p| p.value)
                .fold(f64::NEG_INFINITY, f64::max);
            if !saddle_top.is_finite() || pts.is_empty() {
                return Err(Error::NoOrbit { energy: params.energy });
            }
            if (e_eff - saddle_top).abs() < SEPARATRIX_GUARD {
                return Err(Error::SeparatrixDivergence { energy: params.energy, separatrix: s * saddle_top });
            }
            if e_eff < saddle_top {
                return Err(Error::NoOrbit { energy: params.energy });
            }
            let (dlo, dhi) = pot.search_domain();
            let span = dhi - dlo;
            let f = |u: f64| eff(u) - e_eff;
            let left_most = pts.first().unwrap().u;
            let right_most = pts.last().unwrap().u;
            let u_min = solve_turning(&f, left_most, None, -1.0, span, params.energy)?;
            let u_max = solve_turning(&f, right_most, None, 1.0, span, params.energy)?;
            Ok(OrbitGeometry {
                kind: OrbitKind::Librational { u_min, u_max },
            })
        }
    }
}

/// Finds the turning point on one side of `start`, between `start` and the
/// bounding saddle when present, else expanding outward until the effective
/// gap changes sign or a multiple of the search span is exhausted.
fn solve_turning(
    f: impl Fn(f64) -> f64,
    start: f64,
    saddle: Option<f64>,
    direction: f64,
    span: f64,
    energy: f64,
) -> Result<f64> {
    let bracket = match saddle {
        Some(sd) => {
            // f < 0 at the centre, f > 0 at the saddle (energy below barrier).
            if f(sd) <= 0.0 {
                return Err(Error::NoOrbit { energy });
            }
            Some(if sd < start { (sd, start) } else { (start, sd) })
        }
        None => {
            let limit = start + direction * 4.0 * span;
            roots::bracket_outward(&f, start, direction * span * 1e-3, limit)
        }
    };
    let (a, b) = bracket.ok_or(Error::NoOrbit { energy })?;
    let mut u = roots::brent(&f, a, b, 1e-15, 160);
    // Newton polish with a central-difference slope: turning points are
    // simple zeros away from the degeneracy guards.
    for _ in 0..2 {
        let h = 1e-7 * u.abs().max(1.0);
        let df = (f(u + h) - f(u - h)) / (2.0 * h);
        if df.abs() < 1e-14 {
            break;
        }
        u -= f(u) / df;
    }
    Ok(u)
}

/// Classifies the wave regime from the speed and the admissibility of the
/// requested branch.
pub fn classify_regime(params: &WaveParameters) -> Result<Regime> {
    let geom = resolve_orbit(params)?;
    Ok(match (params.orientation() > 0.0, &geom.kind) {
        (false, OrbitKind::Librational { .. }) => Regime::SubluminalLibrational,
        (false, OrbitKind::Rotational { .. }) => Regime::SubluminalRotational,
        (true, OrbitKind::Librational { .. }) => Regime::SuperluminalLibrational,
        (true, OrbitKind::Rotational { .. }) => Regime::SuperluminalRotational,
    })
}

/// Turning points `(u_min, u_max)` of a librational orbit: the two simple
/// roots of `V(u) = E` bounding the selected well, satisfying
/// `sign(c^2-1) (E - V) > 0` strictly between them.
pub fn turning_points(params: &WaveParameters) -> Result<(f64, f64)> {
    if params.branch.is_rotational() {
        return Err(Error::InvalidParameters(
            "turning points are defined for librational branches only".into(),
        ));
    }
    match resolve_orbit(params)?.kind {
        OrbitKind::Librational { u_min, u_max } => Ok((u_min, u_max)),
        OrbitKind::Rotational { .. } => unreachable!("librational branch resolved to rotation"),
    }
}

/// Profile period from the energy quadrature.
///
/// Librational orbits use `u = u_min + (u_max - u_min) sin^2 sigma`, which
/// removes the inverse-square-root turning singularity; rotational orbits
/// integrate once around the `u`-period directly. Both use adaptive
/// Gauss-Kronrod panels to absolute/relative tolerance `1e-11`.
pub fn compute_period(params: &WaveParameters) -> Result<f64> {
    period_for_orbit(params, &resolve_orbit(params)?)
}

pub(crate) fn period_for_orbit(params: &WaveParameters, geom: &OrbitGeometry) -> Result<f64> {
    let e = params.energy;
    let finish = |out: std::result::Result<(f64, f64), quad::QuadFailure>, tol: f64| -> Result<f64> {
        let (val, achieved) = out.map_err(|e| Error::IntegrationFailure {
            context: "compute_period".into(),
            detail: e.reason,
        })?;
        if achieved > 10.0 * tol * val.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                context: "compute_period".into(),
                detail: format!("quadrature error {achieved:.3e} too large for period {val:.6e}"),
            });
        }
        Ok(val)
    };
    // E - V(u) is computed by cancellation, so its relative noise grows as
    // the orbit gets shallow. Estimate the depth |E - V| actually attained
    // and only request the tolerance that noise level supports.
    let noise_tol = |depth: f64, vscale: f64| -> f64 {
        (10.0 * f64::EPSILON * vscale / depth.max(f64::MIN_POSITIVE)).clamp(1e-11, 1e-4)
    };
    match geom.kind {
        OrbitKind::Librational { u_min, u_max } => {
            // With u = u_min + width sin^2(sigma) the half-period integrand
            // 2 width sin cos / sqrt(R) equals 2 / sqrt(S) for the factored
            // slope S(u) = R(u) / ((u - u_min)(u_max - u)), which stays
            // bounded and positive through the turning points. Direct
            // evaluation of R cancels catastrophically near the endpoints,
            // so within w_cut of a turning point S switches to a two-term
            // Taylor form built from the potential's derivatives there,
            // with w_cut chosen so the direct form is only used where the
            // cancellation noise sits below the requested tolerance.
            let width = u_max - u_min;
            let mass = params.mass();
            let mut depth = 0.0f64;
            let mut vmax = 0.0f64;
            for k in 1..16 {
                let v = params.potential.v(u_min + width * k as f64 / 16.0);
                depth = depth.max((e - v).abs());
                vmax = vmax.max(v.abs());
            }
            let vscale = e.abs().max(1.0) + vmax;
            let tol = noise_tol(depth, vscale);
            // Half-width of the endpoint band: solve |V'| w + |V''| w^2 / 2
            // = delta for the distance at which |E - V| outgrows the noise.
            let band = |dv: f64, d2v: f64| -> f64 {
                let delta = f64::EPSILON * vscale / tol;
                let (b, a) = (dv.abs(), d2v.abs());
                let w = if a * delta > 1e-6 * b * b {
                    ((b * b + 2.0 * a * delta).sqrt() - b) / a
                } else if b > 0.0 {
                    delta / b
                } else {
                    1e-3 * width
                };
                w.clamp(1e-9 * width, 5e-2 * width)
            };
            let (dv_min, d2v_min) = (params.potential.dv(u_min), params.potential.d2v(u_min));
            let (dv_max, d2v_max) = (params.potential.dv(u_max), params.potential.d2v(u_max));
            let cut_l = band(dv_min, d2v_min);
            let cut_r = band(dv_max, d2v_max);
            let g = |sigma: f64| {
                let sn = sigma.sin();
                let cs = sigma.cos();
                let w_l = width * sn * sn;
                let w_r = width * cs * cs;
                let s = if w_r < cut_r {
                    2.0 * (dv_max - 0.5 * d2v_max * w_r) / (mass * (width - w_r))
                } else if w_l < cut_l {
                    -2.0 * (dv_min + 0.5 * d2v_min * w_l) / (mass * (width - w_l))
                } else {
                    let u = if w_l < w_r { u_min + w_l } else { u_max - w_r };
                    params.speed_squared(u) / (w_l * w_r)
                };
                if s > 0.0 {
                    2.0 / s.sqrt()
                } else {
                    f64::NAN
                }
            };
            let half = finish(quad::integrate(&g, 0.0, std::f64::consts::FRAC_PI_2, tol), tol)?;
            Ok(2.0 * half)
        }
        OrbitKind::Rotational { .. } => {
            let p = params.potential.period().expect("rotational orbit on periodic potential");
            let mut gap = f64::INFINITY;
            let mut vmax = 0.0f64;
            for k in 0..64 {
                let v = params.potential.v(p * k as f64 / 64.0);
                gap = gap.min((e - v).abs());
                vmax = vmax.max(v.abs());
            }
            let tol = noise_tol(gap, e.abs().max(1.0) + vmax);
            let g = |u: f64| 1.0 / params.speed_squared(u).sqrt();
            finish(quad::integrate(&g, 0.0, p, tol), tol)
        }
    }
}

/// One sampled point of a wave profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub z: f64,
    pub u: f64,
    pub du: f64,
}

/// A computed travelling-wave profile over one period.
///
/// Holds the initial data the spectral routines re-integrate from, the
/// period, the regime, and an evenly spaced sample table for output.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    params: WaveParameters,
    period: f64,
    regime: Regime,
    samples: Vec<ProfileSample>,
    initial: (f64, f64),
    terminal: (f64, f64),
}

impl WaveProfile {
    pub fn params(&self) -> &WaveParameters {
        &self.params
    }

    pub fn potential(&self) -> &Potential {
        self.params.potential()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    /// `(U(0), U'(0))`.
    pub fn initial_data(&self) -> (f64, f64) {
        self.initial
    }

    /// `(U(T), U'(T))` as integrated (before any periodic reduction).
    pub fn terminal_data(&self) -> (f64, f64) {
        self.terminal
    }

    /// Exact constant solution `U = u_eq` carried as a degenerate profile.
    ///
    /// Requires `V'(u_eq) = 0`. The period is a free probe parameter here,
    /// since every `T` is a period of a constant state. Used by the
    /// self-verification suite to compare monodromy traces against
    /// constant-coefficient closed forms; not produced by [`wave_profile`].
    pub fn equilibrium(potential: Potential, speed: f64, u_eq: f64, period: f64) -> Result<WaveProfile> {
        if potential.dv(u_eq).abs() > 1e-10 {
            return Err(Error::InvalidParameters(format!(
                "u = {u_eq} is not an equilibrium of the potential"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameters(format!("probe period must be positive, got {period}")));
        }
        let energy = potential.v(u_eq);
        let params = WaveParameters::new(potential, energy, speed, Branch::LeftWell)?;
        let regime = if params.orientation() > 0.0 {
            Regime::SuperluminalLibrational
        } else {
            Regime::SubluminalLibrational
        };
        Ok(WaveProfile {
            params,
            period,
            regime,
            samples: vec![
                ProfileSample { z: 0.0, u: u_eq, du: 0.0 },
                ProfileSample { z: period, u: u_eq, du: 0.0 },
            ],
            initial: (u_eq, 0.0),
            terminal: (u_eq, 0.0),
        })
    }
}

/// Integrates the profile ODE over one period and samples it.
///
/// Initial data: librational orbits start at the left turning point with
/// `U'(0) = 0`; rotational orbits start at `u = 0` with
/// `U'(0) = ±sqrt(2 (E - V(0)) / (c^2 - 1))`. The returned table holds
/// `n_samples` evenly spaced points covering `[0, T]` inclusive.
///
/// The energy residual `|(c^2-1) U'^2 / 2 + V(U) - E|` is checked against
/// `1e-8 max(1, |E|)` at every sample, and the endpoint must return to the
/// start (up to one signed `u`-period for rotations) to `1e-8`; violations
/// surface as integration failures rather than silently drifting output.
pub fn wave_profile(params: &WaveParameters, n_samples: usize) -> Result<WaveProfile> {
    if n_samples < 2 {
        return Err(Error::InvalidParameters("n_samples must be at least 2".into()));
    }
    let geom = resolve_orbit(params)?;
    let period = period_for_orbit(params, &geom)?;
    let regime = match (params.orientation() > 0.0, &geom.kind) {
        (false, OrbitKind::Librational { .. }) => Regime::SubluminalLibrational,
        (false, OrbitKind::Rotational { .. }) => Regime::SubluminalRotational,
        (true, OrbitKind::Librational { .. }) => Regime::SuperluminalLibrational,
        (true, OrbitKind::Rotational { .. }) => Regime::SuperluminalRotational,
    };

    let (u0, du0, shift) = match geom.kind {
        OrbitKind::Librational { u_min, .. } => (u_min, 0.0, 0.0),
        OrbitKind::Rotational { positive } => {
            let w2 = params.speed_squared(0.0);
            debug_assert!(w2 > 0.0);
            let sign = if positive { 1.0 } else { -1.0 };
            (0.0, sign * w2.sqrt(), sign * params.potential.period().unwrap())
        }
    };

    let mass = params.mass();
    let pot = params.potential.clone();
    let rhs = move |_z: f64, y: &[f64; 2]| [y[1], -pot.dv(y[0]) / mass];

    let checkpoints: Vec<f64> = (0..n_samples)
        .map(|k| period * k as f64 / (n_samples - 1) as f64)
        .collect();

    let mut samples = Vec::with_capacity(n_samples);
    let integ = Integrator::default();
    integ.solve_path(rhs, 0.0, &checkpoints, [u0, du0], |_, z, y| {
        samples.push(ProfileSample { z, u: y[0], du: y[1] });
    })
    .map_err(|e| Error::IntegrationFailure { context: "wave_profile".into(), detail: e.to_string() })?;

    let e = params.energy;
    for s in &samples {
        let residual = (0.5 * mass * s.du * s.du + params.potential.v(s.u) - e).abs();
        if residual > 1e-8 * e.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                context: "wave_profile".into(),
                detail: format!("energy residual {residual:.3e} at z = {}", s.z),
            });
        }
    }
    let last = *samples.last().unwrap();
    if (last.u - (u0 + shift)).abs() > 1e-8 || (last.du - du0).abs() > 1e-7 {
        return Err(Error::IntegrationFailure {
            context: "wave_profile".into(),
            detail: format!(
                "profile failed to close after one period: U(T) = {}, U'(T) = {}",
                last.u, last.du
            ),
        });
    }

    Ok(WaveProfile {
        params: params.clone(),
        period,
        regime,
        initial: (u0, du0),
        terminal: (last.u, last.du),
        samples,
    })
}

/// One level set of the travelling-wave energy in the `(u, u')` plane.
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub energy: f64,
    pub is_separatrix: bool,
    /// Grid points within one local cell of the level set, row-major in
    /// `(u, u')`.
    pub points: Vec<(f64, f64)>,
}

/// Rasterises level curves of `H(u, w) = (c^2-1) w^2 / 2 + V(u)`.
///
/// A node is kept when `|H - E|` is below the gradient-scaled half-cell
/// width, so the emitted band hugs the curve at one-cell resolution and
/// passes through the saddle points of `H` on separatrix levels. Saddle
/// energies inside the window are appended as separatrix curves.
pub fn phase_portrait(
    potential: &Potential,
    speed: f64,
    energies: &[f64],
    window: ((f64, f64), (f64, f64)),
    grid: (usize, usize),
) -> Result<Vec<LevelCurve>> {
    let ((ulo, uhi), (wlo, whi)) = window;
    let (nu, nw) = grid;
    if !(ulo < uhi && wlo < whi) || nu < 2 || nw < 2 {
        return Err(Error::InvalidParameters("empty phase-portrait window or degenerate grid".into()));
    }
    if (speed * speed - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParameters("phase portrait undefined on c^2 = 1".into()));
    }
    let mass = speed * speed - 1.0;
    let du = (uhi - ulo) / (nu - 1) as f64;
    let dw = (whi - wlo) / (nw - 1) as f64;
    let half_diag = 0.5 * (du * du + dw * dw).sqrt();

    let h = |u: f64, w: f64| 0.5 * mass * w * w + potential.v(u);

    let mut curves = Vec::new();
    let mut trace = |e: f64, is_separatrix: bool| {
        let mut points = Vec::new();
        for i in 0..nu {
            let u = ulo + i as f64 * du;
            for j in 0..nw {
                let w = wlo + j as f64 * dw;
                let grad = (potential.dv(u).powi(2) + (mass * w).powi(2)).sqrt();
                let tol = grad * half_diag + 1e-12;
                if (h(u, w) - e).abs() <= tol {
                    points.push((u, w));
                }
            }
        }
        curves.push(LevelCurve { energy: e, is_separatrix, points });
    };

    for &e in energies {
        trace(e, false);
    }

    // Separatrix levels: saddle values of H, i.e. critical points where the
    // effective curvature is negative.
    let s = if mass > 0.0 { 1.0 } else { -1.0 };
    let mut saddle_levels: Vec<f64> = critical_points(potential, s)
        .into_iter()
        .filter(|p| !p.is_well)
        .map(|p| s * p.value) // back to E units
        .collect();
    saddle_levels.sort_by(f64::total_cmp);
    saddle_levels.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    for e in saddle_levels {
        trace(e, true);
    }
    curves.retain(|c| !c.points.is_empty() || !c.is_separatrix);
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sg(energy: f64, speed: f64, branch: Branch) -> WaveParameters {
        WaveParameters::new(Potential::sine_gordon(), energy, speed, branch).unwrap()
    }

    fn quartic(energy: f64, speed: f64, branch: Branch) -> WaveParameters {
        WaveParameters::new(Potential::phi4(), energy, speed, branch).unwrap()
    }

    #[test]
    fn lightspeed_rejected() {
        let r = WaveParameters::new(Potential::sine_gordon(), 1.0, 1.0, Branch::LeftWell);
        assert!(matches!(r, Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn regimes_match_known_cases() {
        assert_eq!(
            classify_regime(&sg(-0.5, 0.5, Branch::RotationPositive)).unwrap(),
            Regime::SubluminalRotational
        );
        assert_eq!(
            classify_regime(&sg(1.5, 2.0, Branch::LeftWell)).unwrap(),
            Regime::SuperluminalLibrational
        );
        assert_eq!(
            classify_regime(&sg(0.5, 0.5, Branch::LeftWell)).unwrap(),
            Regime::SubluminalLibrational
        );
        assert_eq!(
            classify_regime(&sg(6.0, 1.45, Branch::RotationPositive)).unwrap(),
            Regime::SuperluminalRotational
        );
    }

    #[test]
    fn rotational_on_quartic_unavailable() {
        let r = classify_regime(&quartic(-0.07, 0.45, Branch::RotationPositive));
        assert!(matches!(r, Err(Error::RotationalUnavailable(_))));
    }

    #[test]
    fn rotational_below_barrier_unavailable() {
        // Subluminal rotation needs E < 0 for sine-Gordon.
        let r = classify_regime(&sg(0.5, 0.5, Branch::RotationPositive));
        assert!(matches!(r, Err(Error::RotationalUnavailable(_))));
    }

    #[test]
    fn sine_gordon_turning_points_closed_form() {
        // Subluminal libration about u = pi: V(u) = E at cos(u) = 1 - E.
        let (a, b) = turning_points(&sg(0.5, 0.5, Branch::LeftWell)).unwrap();
        let expect = (0.5f64).acos(); // = pi/3
        assert!((a - expect).abs() < 1e-10);
        assert!((b - (2.0 * PI - expect)).abs() < 1e-10);
        assert!((Potential::sine_gordon().v(a) - 0.5).abs() < 1e-12);
        assert!((Potential::sine_gordon().v(b) - 0.5).abs() < 1e-12);

        // Superluminal libration about u = 0.
        let (a, b) = turning_points(&sg(1.5, 2.0, Branch::LeftWell)).unwrap();
        let expect = (-0.5f64).acos(); // = 2 pi / 3
        assert!((a + expect).abs() < 1e-10 || (a - (expect - 2.0 * PI)).abs() < 1e-10);
        assert!((b - expect).abs() < 1e-10);
    }

    #[test]
    fn quartic_turning_points_match_quartic_roots() {
        // V(u) = E has roots u^2 = 1 ± sqrt(1 + 4E).
        let e = -0.216f64;
        let inner = (1.0 - (1.0 + 4.0 * e).sqrt()).sqrt();
        let outer = (1.0 + (1.0 + 4.0 * e).sqrt()).sqrt();

        // Subluminal: the orbit circles u = 0 between the inner roots.
        let (a, b) = turning_points(&quartic(e, 0.8, Branch::RightWell)).unwrap();
        assert!((a + inner).abs() < 1e-10);
        assert!((b - inner).abs() < 1e-10);
        assert!((Potential::phi4().v(b) - e).abs() < 1e-12);

        // Superluminal right well: both turning points in (0, sqrt 2).
        let (a, b) = turning_points(&quartic(e, 1.25, Branch::RightWell)).unwrap();
        assert!((a - inner).abs() < 1e-10);
        assert!((b - outer).abs() < 1e-10);
        assert!(a > 0.0 && b < 2.0f64.sqrt());

        // Superluminal left well mirrors it.
        let (a2, b2) = turning_points(&quartic(e, 1.25, Branch::LeftWell)).unwrap();
        assert!((a2 + b).abs() < 1e-10);
        assert!((b2 + a).abs() < 1e-10);
    }

    #[test]
    fn quartic_degenerate_and_separatrix_energies() {
        // Superluminal right well at the floor energy: no orbit.
        let r = turning_points(&quartic(-0.25, 1.25, Branch::RightWell));
        assert!(matches!(r, Err(Error::NoOrbit { .. })));

        // Subluminal -1/4 is the separatrix of the central well.
        let r = compute_period(&quartic(-0.25, 0.8, Branch::RightWell));
        assert!(matches!(r, Err(Error::SeparatrixDivergence { .. })));

        // Superluminal homoclinic level E = 0 for the wells.
        let r = compute_period(&quartic(0.0, 1.25, Branch::RightWell));
        assert!(matches!(r, Err(Error::SeparatrixDivergence { .. })));

        // Above the homoclinic level the well orbit no longer exists.
        let r = turning_points(&quartic(0.1, 1.25, Branch::RightWell));
        assert!(matches!(r, Err(Error::NoOrbit { .. })));

        // ... but the outer orbit does, enclosing both wells.
        let (a, b) = turning_points(&quartic(0.1, 1.25, Branch::OuterOrbit)).unwrap();
        let outer = (1.0 + (1.0 + 0.4f64).sqrt()).sqrt();
        assert!((b - outer).abs() < 1e-10);
        assert!((a + outer).abs() < 1e-10);
    }

    #[test]
    fn outer_orbit_rejected_where_unbounded() {
        // Subluminal quartic: beyond the saddles the effective potential
        // falls away, so no outer orbit exists at any energy.
        for e in [-0.1, 0.3, 2.0] {
            let r = turning_points(&quartic(e, 0.8, Branch::OuterOrbit));
            assert!(matches!(r, Err(Error::NoOrbit { .. }) | Err(Error::SeparatrixDivergence { .. })));
        }
        // Periodic potentials have rotations instead of outer orbits.
        let r = turning_points(&sg(6.0, 1.45, Branch::OuterOrbit));
        assert!(matches!(r, Err(Error::NoOrbit { .. })));
    }

    #[test]
    fn periods_match_elliptic_and_quadrature_oracles() {
        use crate::reference as oracle;
        let sgv = |u: f64| 1.0 - u.cos();

        // Subluminal rotation, E = -0.5, c = 0.5.
        let t = compute_period(&sg(-0.5, 0.5, Branch::RotationPositive)).unwrap();
        let closed = oracle::sine_gordon_rotation_period_subluminal(-0.5, 0.5);
        assert!((t - closed).abs() < 1e-8 * closed, "t = {t}, closed = {closed}");
        let gl = oracle::rotational_period_oracle(sgv, -0.5, 0.5, 2.0 * PI);
        assert!((t - gl).abs() < 1e-8 * gl);

        // Subluminal libration, E = 0.5, c = 0.5, about u = pi.
        let t = compute_period(&sg(0.5, 0.5, Branch::LeftWell)).unwrap();
        let closed = oracle::sine_gordon_libration_period(0.5, 0.5);
        assert!((t - closed).abs() < 1e-8 * closed, "t = {t}, closed = {closed}");
        let x_t = (0.5f64 - 1.0).acos();
        let gl = oracle::librational_period_oracle(sgv, 0.5, 0.5, PI - x_t, PI + x_t);
        assert!((t - gl).abs() < 1e-8 * gl);

        // Superluminal rotation, E = 6, c = 1.45.
        let t = compute_period(&sg(6.0, 1.45, Branch::RotationPositive)).unwrap();
        let closed = oracle::sine_gordon_rotation_period_superluminal(6.0, 1.45);
        assert!((t - closed).abs() < 1e-8 * closed, "t = {t}, closed = {closed}");

        // Superluminal libration, E = 1.5, c = 2, about u = 0.
        let t = compute_period(&sg(1.5, 2.0, Branch::LeftWell)).unwrap();
        let closed = oracle::sine_gordon_libration_period(1.5, 2.0);
        assert!((t - closed).abs() < 1e-8 * closed, "t = {t}, closed = {closed}");
        let u_t = (1.0f64 - 1.5).acos();
        let gl = oracle::librational_period_oracle(sgv, 1.5, 2.0, -u_t, u_t);
        assert!((t - gl).abs() < 1e-8 * gl);
    }

    #[test]
    fn harmonic_limit_of_librational_period() {
        // Small oscillation about u = pi (subluminal): T -> 2 pi sqrt(1-c^2).
        let t = compute_period(&sg(2.0 - 1e-6, 0.5, Branch::LeftWell)).unwrap();
        let harmonic = 2.0 * PI * (1.0f64 - 0.25).sqrt();
        assert!((t - harmonic).abs() / harmonic < 1e-3, "T = {t}, harmonic = {harmonic}");

        // Small oscillation about u = 0 for the subluminal quartic:
        // omega^2 = |V''(0)| / (1 - c^2).
        let t = compute_period(&quartic(-1e-7, 0.8, Branch::LeftWell)).unwrap();
        let harmonic = 2.0 * PI * (1.0f64 - 0.64).sqrt();
        assert!((t - harmonic).abs() / harmonic < 1e-3, "T = {t}, harmonic = {harmonic}");
    }

    #[test]
    fn period_grows_towards_separatrix() {
        // Subluminal quartic central well: separatrix at E = -1/4.
        let ladder = [-0.24, -0.2499, -0.24999, -0.249999, -0.2499999];
        let mut prev = 0.0;
        for (i, &e) in ladder.iter().enumerate() {
            let t = compute_period(&quartic(e, 0.8, Branch::RightWell)).unwrap();
            assert!(t > prev, "ladder step {i}: T = {t} did not grow (prev {prev})");
            prev = t;
        }
        // Within guard distance of the separatrix the computation refuses.
        let r = compute_period(&quartic(-0.25 + 1e-11, 0.8, Branch::RightWell));
        assert!(matches!(r, Err(Error::SeparatrixDivergence { .. })));
    }

    #[test]
    fn librational_profile_shape() {
        let params = sg(0.5, 0.5, Branch::LeftWell);
        let profile = wave_profile(&params, 257).unwrap();
        let samples = profile.samples();
        assert_eq!(samples.len(), 257);
        assert_eq!(samples[0].du, 0.0);
        // Opposite turning point at half period.
        let mid = samples[128];
        assert!((mid.z - 0.5 * profile.period()).abs() < 1e-12);
        assert!(mid.du.abs() < 1e-7, "U'(T/2) = {}", mid.du);
        let (_, u_max) = turning_points(&params).unwrap();
        assert!((mid.u - u_max).abs() < 1e-7);
        // Energy residual is enforced internally; spot check one sample.
        let s = samples[37];
        let res = 0.5 * params.mass() * s.du * s.du + params.potential().v(s.u) - params.energy();
        assert!(res.abs() < 1e-8);
    }

    #[test]
    fn rotational_profile_advances_one_period() {
        let params = sg(-0.5, 0.5, Branch::RotationPositive);
        let profile = wave_profile(&params, 129).unwrap();
        let (u_end, _) = profile.terminal_data();
        assert!((u_end - 2.0 * PI).abs() < 1e-8);
        // Negative rotation mirrors it.
        let params = sg(-0.5, 0.5, Branch::RotationNegative);
        let profile = wave_profile(&params, 129).unwrap();
        let (u_end, _) = profile.terminal_data();
        assert!((u_end + 2.0 * PI).abs() < 1e-8);
        assert_eq!(profile.regime(), Regime::SubluminalRotational);
    }

    #[test]
    fn left_and_right_well_periods_agree_by_symmetry() {
        for e in [-0.2, -0.1, -0.05] {
            let tl = compute_period(&quartic(e, 1.25, Branch::LeftWell)).unwrap();
            let tr = compute_period(&quartic(e, 1.25, Branch::RightWell)).unwrap();
            assert!((tl - tr).abs() < 1e-10, "E = {e}: {tl} vs {tr}");
        }
    }

    #[test]
    fn equilibrium_profile_is_exact() {
        let p = WaveProfile::equilibrium(Potential::sine_gordon(), 0.5, PI, 2.0).unwrap();
        assert_eq!(p.initial_data(), (PI, 0.0));
        assert_eq!(p.period(), 2.0);
        let r = WaveProfile::equilibrium(Potential::sine_gordon(), 0.5, 1.0, 2.0);
        assert!(r.is_err(), "u = 1 is not an equilibrium");
    }

    #[test]
    fn portrait_hits_saddles_on_separatrix_levels() {
        let window = ((-2.0, 2.0), (-2.0, 2.0));
        // Subluminal quartic: separatrix E = -1/4 passes through (±1, 0).
        let curves =
            phase_portrait(&Potential::phi4(), 0.8, &[-0.216], window, (101, 101)).unwrap();
        let sep: Vec<_> = curves.iter().filter(|c| c.is_separatrix).collect();
        assert_eq!(sep.len(), 1);
        assert!((sep[0].energy + 0.25).abs() < 1e-12);
        let cell = (4.0 / 100.0) * 1.5;
        for target in [(1.0, 0.0), (-1.0, 0.0)] {
            assert!(
                sep[0]
                    .points
                    .iter()
                    .any(|p| (p.0 - target.0).hypot(p.1 - target.1) < cell),
                "separatrix misses saddle {target:?}"
            );
        }

        // Superluminal quartic: homoclinic level E = 0 through the origin.
        let curves = phase_portrait(&Potential::phi4(), 1.25, &[], window, (101, 101)).unwrap();
        let sep: Vec<_> = curves.iter().filter(|c| c.is_separatrix).collect();
        assert_eq!(sep.len(), 1);
        assert!((sep[0].energy).abs() < 1e-12);
        assert!(sep[0].points.iter().any(|p| p.0.hypot(p.1) < cell));
    }

    #[test]
    fn portrait_rotational_band_structure() {
        let window = ((0.0, 2.0 * PI), (-4.0, 4.0));
        let curves =
            phase_portrait(&Potential::sine_gordon(), 1.45, &[6.0], window, (129, 129)).unwrap();
        let band = &curves[0];
        assert!(!band.points.is_empty());
        // The rotational curve stays clear of u' = 0 and spans the window.
        let w_min = band.points.iter().map(|p| p.1.abs()).fold(f64::INFINITY, f64::min);
        assert!(w_min > 1.0);
        let u_lo = band.points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let u_hi = band.points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        assert!(u_lo < 0.2 && u_hi > 2.0 * PI - 0.2);
    }

    #[test]
    fn portrait_empty_below_reachable_energies() {
        // Superluminal: H >= min V = 0 on the whole plane, so E = -1 is empty.
        let curves = phase_portrait(
            &Potential::sine_gordon(),
            2.0,
            &[-1.0],
            ((0.0, 2.0 * PI), (-2.0, 2.0)),
            (64, 64),
        )
        .unwrap();
        assert!(curves[0].points.is_empty());
    }
}
