//! Locating the Floquet spectrum: plane scans, phase recovery, real
//! characteristic values at a fixed phase, and phase sweeps that detect and
//! refine collision events.
//!
//! Everything rests on one fact: `zeta` is a spectral point of the
//! phase-`theta` problem exactly when
//!
//! ```text
//!     tr H(T; zeta) = 2 cos(rate * zeta + theta),      rate = c T/(c^2-1),
//! ```
//!
//! and the Hill trace depends on `zeta` only through `v = zeta^2/(c^2-1)^2`.
//! Writing `w = arccos(tr H / 2)` (principal branch), the phase candidates
//! at a given `zeta` are `theta = +-w - rate*zeta (mod 2pi)`; `zeta` is
//! spectral iff one of them is real. Scans therefore walk the signed
//! indicator
//!
//! ```text
//!     sigma(zeta) = |Im w| - |Im(rate * zeta)|,
//! ```
//!
//! which is continuous, vanishes exactly on the spectrum, and changes sign
//! across spectral curves away from the real `zeta` axis. The real axis
//! itself carries whole bands of spectrum (`|tr H| <= 2` with real trace)
//! and is handled by that band condition directly, so scans report both the
//! band segments and the off-axis curves that sprout from them.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;

use crate::evans::{krein_signature, mod_two_pi, EvansContext, ROOT_TOL};
use crate::hill::{integrate_hill, integrate_hill_variational, HillCoefficient};
use crate::roots;
use crate::waves::WaveProfile;
use crate::{Error, Result};

/// Default ceiling on `|Im theta|` for accepting a phase candidate as real.
///
/// Acceptance scales this by the local trace sensitivity `|d tr H / d zeta|`
/// so that fast-moving traces (band edges) do not reject genuine points for
/// mere conditioning; the residual gate `|D2| <` [`ROOT_TOL`] stays
/// authoritative either way.
pub const DEFAULT_IMAG_TOL: f64 = 1e-6;

/// An axis-aligned rectangle in the `zeta` plane.
///
/// Scans run over `zeta`; results also carry `lambda = i zeta`, which is the
/// natural plane for plotting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    re: (f64, f64),
    im: (f64, f64),
}

impl Window {
    /// Builds a window, rejecting degenerate or non-finite rectangles.
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all = [re_min, re_max, im_min, im_max];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameters("window bounds must be finite".into()));
        }
        if re_min >= re_max || im_min >= im_max {
            return Err(Error::InvalidParameters(format!(
                "window is degenerate: re [{re_min}, {re_max}], im [{im_min}, {im_max}]"
            )));
        }
        Ok(Window { re: (re_min, re_max), im: (im_min, im_max) })
    }

    pub fn re_range(&self) -> (f64, f64) {
        self.re
    }

    pub fn im_range(&self) -> (f64, f64) {
        self.im
    }

    /// Length of the window diagonal; refinement resolution is quoted
    /// relative to this.
    pub fn diagonal(&self) -> f64 {
        let w = self.re.1 - self.re.0;
        let h = self.im.1 - self.im.0;
        w.hypot(h)
    }

    /// The grid node coordinates a scan of shape `(nx, ny)` evaluates.
    ///
    /// Grids symmetric about an axis are generated by exact mirroring, so a
    /// node and its reflection are floating-point negations of each other;
    /// scans exploit this to reuse one integration for up to four nodes and
    /// it makes the reported point set exactly symmetric in turn.
    pub fn grid_coordinates(&self, nx: usize, ny: usize) -> (Vec<f64>, Vec<f64>) {
        (linspace_sym(self.re.0, self.re.1, nx), linspace_sym(self.im.0, self.im.1, ny))
    }
}

/// Uniform grid over `[lo, hi]` with exact reflection symmetry when the
/// interval is symmetric about zero.
fn linspace_sym(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut xs = vec![0.0f64; n];
    if lo == -hi {
        for i in 0..n / 2 {
            let x = lo + i as f64 * step;
            xs[i] = x;
            xs[n - 1 - i] = -x;
        }
        if n % 2 == 1 {
            xs[n / 2] = 0.0;
        }
    } else {
        for (i, x) in xs.iter_mut().enumerate() {
            *x = lo + i as f64 * step;
        }
        xs[n - 1] = hi;
    }
    xs
}

/// A located point of the Floquet spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    /// Spectral parameter in the scanned plane.
    pub zeta: Complex64,
    /// Phase of the Floquet problem that `zeta` solves, in `[0, 2pi)`.
    pub theta: f64,
    /// `|D2(zeta; theta)|` at the reported pair; below [`ROOT_TOL`].
    pub residual: f64,
    /// `i * zeta` exactly, for plotting against the temporal eigenvalue.
    pub lambda: Complex64,
}

impl SpectralPoint {
    fn new(zeta: Complex64, theta: f64, residual: f64) -> Self {
        SpectralPoint { zeta, theta, residual, lambda: Complex64::i() * zeta }
    }
}

/// Outcome of [`spectrum_scan`]: accepted points plus scan diagnostics.
#[derive(Debug, Clone)]
pub struct ScanReport {
    /// Accepted points, sorted by `(Re lambda, Im lambda, theta)`.
    pub points: Vec<SpectralPoint>,
    /// True when nothing in the window cleared the acceptance gates; the
    /// caller should surface this as a warning, not an error.
    pub empty_window: bool,
    /// Largest `|det H - 1|` seen over every Hill integration of the scan;
    /// the unit-determinant identity is the integration quality monitor.
    pub max_hill_drift: f64,
}

/// Hill traces keyed by the coefficient `v = (zeta/(c^2-1))^2`, exploiting
/// both trace symmetries: `v(-zeta) = v(zeta)` exactly in floating point,
/// and conjugating `v` conjugates the trace (the equation has real
/// coefficients). One integration therefore serves up to four points of a
/// reflection-symmetric grid, and mirrored points receive bitwise-equal
/// traces.
struct TraceCache<'a> {
    profile: &'a WaveProfile,
    map: HashMap<(u64, u64), Complex64>,
    max_drift: f64,
}

impl<'a> TraceCache<'a> {
    fn new(profile: &'a WaveProfile) -> Self {
        TraceCache { profile, map: HashMap::new(), max_drift: 0.0 }
    }

    fn v_of(&self, zeta: Complex64) -> Complex64 {
        HillCoefficient::new(self.profile, zeta, 0.0).v()
    }

    /// Representative with `Im v >= 0` plus a flag to conjugate the result.
    fn canonical(mut v: Complex64) -> (Complex64, bool) {
        if v.im == 0.0 {
            v.im = 0.0; // collapse -0.0 so both signed zeros share a key
        }
        if v.im < 0.0 {
            (v.conj(), true)
        } else {
            (v, false)
        }
    }

    fn key(v: Complex64) -> (u64, u64) {
        (v.re.to_bits(), v.im.to_bits())
    }

    fn trace_at_v(&mut self, v: Complex64) -> Result<Complex64> {
        let (cv, conj) = Self::canonical(v);
        let key = Self::key(cv);
        let tr = match self.map.get(&key) {
            Some(tr) => *tr,
            None => {
                let m = integrate_hill(self.profile, cv)?;
                let tr = m.trace();
                self.max_drift = self.max_drift.max(m.det_drift());
                self.map.insert(key, tr);
                tr
            }
        };
        Ok(if conj { tr.conj() } else { tr })
    }

    fn trace(&mut self, zeta: Complex64) -> Result<Complex64> {
        let v = self.v_of(zeta);
        self.trace_at_v(v)
    }

    /// Evaluates all missing representatives among `vs` in parallel, in a
    /// deterministic order, before sequential passes consume them.
    fn prime<I: Iterator<Item = Complex64>>(&mut self, vs: I) -> Result<()> {
        let mut missing: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
        for v in vs {
            let (cv, _) = Self::canonical(v);
            let key = Self::key(cv);
            if !self.map.contains_key(&key) {
                missing.insert(key, cv);
            }
        }
        let todo: Vec<((u64, u64), Complex64)> = missing.into_iter().collect();
        let results: Vec<Result<(Complex64, f64)>> = todo
            .par_iter()
            .map(|(_, cv)| integrate_hill(self.profile, *cv).map(|m| (m.trace(), m.det_drift())))
            .collect();
        for ((key, _), r) in todo.into_iter().zip(results) {
            let (tr, drift) = r?;
            self.max_drift = self.max_drift.max(drift);
            self.map.insert(key, tr);
        }
        Ok(())
    }
}

/// Runs the bracketing solver on a fallible function: errors short-circuit
/// through a captured slot (the solver sees an exact zero and stops early).
fn brent_result<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let mut err: Option<Error> = None;
    let root = roots::brent(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                if err.is_none() {
                    err = Some(e);
                }
                0.0
            }
        },
        a,
        b,
        xtol,
        240,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(root),
    }
}

/// Phase candidates with residuals at one `zeta`, plus the determinant
/// drift of the single variational integration used.
fn phase_candidates(
    profile: &WaveProfile,
    zeta: Complex64,
    imag_tol: f64,
) -> Result<(Vec<(f64, f64)>, f64)> {
    let params = profile.params();
    let mass = params.mass();
    let rate = params.speed() * profile.period() / mass;
    if zeta.re == 0.0 && zeta.im == 0.0 {
        // The derivative of the wave profile solves the phase-0 problem at
        // zeta = 0, and no other phase admits zeta = 0.
        let m = integrate_hill(profile, Complex64::new(0.0, 0.0))?;
        let residual = (m.trace() - 2.0).norm();
        return Ok((vec![(0.0, residual)], m.det_drift()));
    }
    let v = HillCoefficient::new(profile, zeta, 0.0).v();
    let (m, dvar) = integrate_hill_variational(profile, v)?;
    let trace = m.trace();
    // Trace sensitivity in zeta loosens the imaginary-part budget where the
    // trace moves fast; the residual gate below remains authoritative.
    let trace_prime = (dvar[0][0] + dvar[1][1]) * 2.0 * zeta / (mass * mass);
    let tol = imag_tol * trace_prime.norm().max(1.0);
    let w = (trace / 2.0).acos();
    let a = rate * zeta;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for cand in [w - a, -w - a] {
        if cand.im.abs() >= tol {
            continue;
        }
        if let Some((theta, residual)) = polish_phase(trace, a, cand.re) {
            let theta = mod_two_pi(theta);
            if !out.iter().any(|(t, _)| phases_close(*t, theta)) {
                out.push((theta, residual));
            }
        }
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok((out, m.det_drift()))
}

/// Newton-polishes a real phase against `f(theta) = tr - 2 cos(a + theta)`
/// (the trace is phase-free, so no further integration is needed), keeping
/// the best iterate; accepts only when the residual clears [`ROOT_TOL`].
fn polish_phase(trace: Complex64, a: Complex64, theta0: f64) -> Option<(f64, f64)> {
    let f = |t: f64| trace - 2.0 * (a + t).cos();
    let mut theta = theta0;
    let mut best = (theta, f(theta).norm());
    for _ in 0..8 {
        let ft = f(theta);
        let dft = 2.0 * (a + theta).sin();
        if dft.norm() < 1e-12 {
            break; // double phase root (band edge): keep the best iterate
        }
        let step = (ft / dft).re;
        theta -= step;
        let r = f(theta).norm();
        if r < best.1 {
            best = (theta, r);
        }
        if step.abs() < 1e-15 {
            break;
        }
    }
    (best.1 < ROOT_TOL).then_some(best)
}

fn phases_close(a: f64, b: f64) -> bool {
    let d = (a - b).abs();
    d < 1e-9 || (TAU - d).abs() < 1e-9
}

/// Real phases `theta in [0, 2pi)` whose Floquet problem has `zeta` in its
/// spectrum; empty when `zeta` is not spectral for any phase.
///
/// Candidates are `+-arccos(tr H/2) - rate*zeta (mod 2pi)`; those with
/// imaginary part inside the (sensitivity-scaled) default budget are
/// Newton-polished and must land below [`ROOT_TOL`] in `|D2|`. At `zeta = 0`
/// the result is exactly `{0}`. Real `zeta` inside a band yields two phases
/// (one at band edges, where the candidates coincide).
pub fn theta_of_zeta(profile: &WaveProfile, zeta: Complex64) -> Result<Vec<f64>> {
    theta_of_zeta_with_tol(profile, zeta, DEFAULT_IMAG_TOL)
}

/// As [`theta_of_zeta`] with an explicit imaginary-part budget.
pub fn theta_of_zeta_with_tol(
    profile: &WaveProfile,
    zeta: Complex64,
    imag_tol: f64,
) -> Result<Vec<f64>> {
    if !(imag_tol > 0.0) {
        return Err(Error::InvalidParameters(format!("imag_tol must be positive, got {imag_tol}")));
    }
    let (pairs, _) = phase_candidates(profile, zeta, imag_tol)?;
    Ok(pairs.into_iter().map(|(theta, _)| theta).collect())
}

/// Signed spectral indicator: vanishes exactly on the spectrum and changes
/// sign across spectral curves away from the real axis.
fn sigma_at(cache: &mut TraceCache, rate: f64, zeta: Complex64) -> Result<f64> {
    let tr = cache.trace(zeta)?;
    let w = (tr / 2.0).acos();
    Ok(w.im.abs() - (rate * zeta).im.abs())
}

/// Scans a window of the `zeta` plane for spectrum on a `(nx, ny)` grid.
///
/// Grid edges where the signed indicator changes sign are refined by
/// bracketed bisection well past the guaranteed resolution of
/// `diagonal/2^14`, so the recovered phases clear the residual gate. If the
/// window straddles the real axis, the axis is additionally swept for
/// spectral bands (`|tr H| <= 2`): every in-band grid column contributes a
/// point, and band edges are refined to machine accuracy. Accepted points
/// carry their phase and residual and arrive sorted by
/// `(Re lambda, Im lambda, theta)`.
pub fn spectrum_scan(
    profile: &WaveProfile,
    window: &Window,
    grid: (usize, usize),
    imag_tol: f64,
) -> Result<ScanReport> {
    let (nx, ny) = grid;
    if nx < 32 || ny < 32 {
        return Err(Error::InvalidParameters(format!(
            "scan grid must be at least 32x32, got {nx}x{ny}"
        )));
    }
    if !(imag_tol > 0.0) {
        return Err(Error::InvalidParameters(format!("imag_tol must be positive, got {imag_tol}")));
    }
    let (xs, ys) = window.grid_coordinates(nx, ny);
    let params = profile.params();
    let rate = params.speed() * profile.period() / params.mass();
    let resolution = window.diagonal() / 2f64.powi(14);

    let mut cache = TraceCache::new(profile);
    // Data-parallel pass over the deduplicated node coefficients; everything
    // after this walks the grid sequentially on cache hits.
    {
        let node_vs = ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
            .map(|z| HillCoefficient::new(profile, z, 0.0).v())
            .collect::<Vec<_>>();
        cache.prime(node_vs.into_iter())?;
    }

    let mut sigma = vec![0.0f64; nx * ny];
    for (j, &y) in ys.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            sigma[j * nx + i] = sigma_at(&mut cache, rate, Complex64::new(x, y))?;
        }
    }

    let mut candidates: Vec<Complex64> = Vec::new();
    let push_edge = |cache: &mut TraceCache, za: Complex64, zb: Complex64| -> Result<Option<Complex64>> {
        let seg = zb - za;
        let t = brent_result(|t| sigma_at(cache, rate, za + t * seg), 0.0, 1.0, 1e-11)?;
        Ok(Some(za + t * seg))
    };

    for (j, &y) in ys.iter().enumerate() {
        for i in 0..nx {
            let here = sigma[j * nx + i];
            if here == 0.0 {
                candidates.push(Complex64::new(xs[i], y));
                continue;
            }
            if i + 1 < nx {
                let right = sigma[j * nx + i + 1];
                if here * right < 0.0 {
                    if let Some(z) =
                        push_edge(&mut cache, Complex64::new(xs[i], y), Complex64::new(xs[i + 1], y))?
                    {
                        candidates.push(z);
                    }
                }
            }
            if j + 1 < ny {
                let up = sigma[(j + 1) * nx + i];
                if here * up < 0.0 {
                    if let Some(z) =
                        push_edge(&mut cache, Complex64::new(xs[i], y), Complex64::new(xs[i], ys[j + 1]))?
                    {
                        candidates.push(z);
                    }
                }
            }
        }
    }

    // Bands on the real axis: spectrum there is one-dimensional and tangent
    // to the indicator's zero set, so the band condition is tested directly.
    if ys[0] <= 0.0 && 0.0 <= ys[ny - 1] {
        let in_band = |cache: &mut TraceCache, x: f64| -> Result<bool> {
            let tr = cache.trace(Complex64::new(x, 0.0))?;
            Ok(tr.re.abs() <= 2.0)
        };
        let mut prev = in_band(&mut cache, xs[0])?;
        if prev {
            candidates.push(Complex64::new(xs[0], 0.0));
        }
        for i in 1..nx {
            let here = in_band(&mut cache, xs[i])?;
            if here {
                candidates.push(Complex64::new(xs[i], 0.0));
            }
            if here != prev {
                // Band edge between the two columns: refine |tr| - 2 = 0.
                let f = |x: f64| -> Result<f64> {
                    let tr = cache.trace(Complex64::new(x, 0.0))?;
                    Ok(tr.re.abs() - 2.0)
                };
                let edge = brent_result(f, xs[i - 1], xs[i], 1e-13)?;
                candidates.push(Complex64::new(edge, 0.0));
            }
            prev = here;
        }
    }

    let mut points: Vec<SpectralPoint> = Vec::new();
    for z in candidates {
        let (pairs, drift) = phase_candidates(profile, z, imag_tol)?;
        cache.max_drift = cache.max_drift.max(drift);
        for (theta, residual) in pairs {
            points.push(SpectralPoint::new(z, theta, residual));
        }
    }

    points.sort_by(|p, q| {
        p.lambda
            .re
            .total_cmp(&q.lambda.re)
            .then(p.lambda.im.total_cmp(&q.lambda.im))
            .then(p.theta.total_cmp(&q.theta))
    });
    let mut kept: Vec<SpectralPoint> = Vec::new();
    for p in points {
        let duplicate = kept
            .iter()
            .rev()
            .take_while(|k| (p.lambda.re - k.lambda.re).abs() <= resolution)
            .any(|k| (k.zeta - p.zeta).norm() <= resolution && phase_gap(k.theta, p.theta) <= 1e-6);
        if !duplicate {
            kept.push(p);
        }
    }

    Ok(ScanReport { empty_window: kept.is_empty(), points: kept, max_hill_drift: cache.max_drift })
}

fn phase_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(TAU - d)
}

// ---------------------------------------------------------------------------
// Real characteristic values at a fixed phase
// ---------------------------------------------------------------------------

/// Width below which an event bracket is considered refined.
pub const EVENT_TOL: f64 = 1e-4;

/// Largest admissible spacing of a sweep phase grid. Coarser grids move
/// roots by more than their typical spacing per step, which defeats
/// nearest-neighbour tracking.
pub const MAX_THETA_STEP: f64 = 0.02;

/// Number of nodes in the shared real-axis trace table used by
/// [`real_characteristic_values`] and [`sweep_theta`].
const TABLE_POINTS: usize = 2049;

/// Nodes used for the local tables built while refining an event.
const LOCAL_POINTS: usize = 385;

/// A real characteristic value of the fixed-phase problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot {
    /// Location on the real axis.
    pub zeta0: f64,
    /// Absolute residual of the determinant after refinement.
    pub residual: f64,
    /// Set when the value was recovered from a tangential minimum rather
    /// than a sign change. The determinant has even-order contact there, so
    /// the value is suspected to be non-simple (two roots at the point of
    /// colliding, or the symmetric pair at the origin).
    pub suspected_non_simple: bool,
}

/// Dense table of Hill traces along a real-axis interval.
///
/// The trace depends on the phase only through the comparison cosine, so
/// one table serves every phase of a sweep.
struct SeedTable {
    zetas: Vec<f64>,
    traces: Vec<f64>,
    rate: f64,
}

impl SeedTable {
    fn build(profile: &WaveProfile, interval: (f64, f64), n_points: usize) -> Result<SeedTable> {
        let zetas = linspace_sym(interval.0, interval.1, n_points);
        let params = profile.params();
        let rate = params.speed() * profile.period() / params.mass();
        let traces: Vec<Result<f64>> = zetas
            .par_iter()
            .map(|&z| {
                let v = HillCoefficient::new(profile, Complex64::new(z, 0.0), 0.0).v();
                integrate_hill(profile, v).map(|m| m.trace().re)
            })
            .collect();
        let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(SeedTable { zetas, traces, rate })
    }

    fn spacing(&self) -> f64 {
        (self.zetas[self.zetas.len() - 1] - self.zetas[0]) / (self.zetas.len() - 1) as f64
    }

    fn d2(&self, k: usize, theta: f64) -> f64 {
        self.traces[k] - 2.0 * (self.rate * self.zetas[k] + theta).cos()
    }
}

/// Determinant restricted to the real axis, evaluated from scratch.
fn d2_real(profile: &WaveProfile, rate: f64, theta: f64, zeta: f64) -> Result<f64> {
    let v = HillCoefficient::new(profile, Complex64::new(zeta, 0.0), 0.0).v();
    let m = integrate_hill(profile, v)?;
    Ok(m.trace().re - 2.0 * (rate * zeta + theta).cos())
}

/// Golden-section minimum of a fallible function on `[a, b]`.
///
/// Returns the best point, its value, and the final bracket.
fn golden_min<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
) -> Result<(f64, f64, (f64, f64))> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > xtol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok((x, fx, (a, b)))
}

/// Locate every root of the real determinant inside the table's window.
///
/// Sign changes between adjacent nodes are polished by the bracketing
/// solver. A local minimum of the absolute determinant whose three nodes
/// share one sign is probed by golden section: a minimum below the root
/// tolerance is an even-order contact and is reported once with
/// `suspected_non_simple` set, while a dip that turns out to cross zero is
/// a pair of sign changes the node spacing failed to separate and is split
/// into its two simple roots.
fn refine_roots(
    profile: &WaveProfile,
    theta: f64,
    table: &SeedTable,
    interval: (f64, f64),
) -> Result<Vec<RealRoot>> {
    let n = table.zetas.len();
    let xtol = (interval.1 - interval.0).abs() * 1e-12;
    let rate = table.rate;
    let d2s: Vec<f64> = (0..n).map(|k| table.d2(k, theta)).collect();
    let mut out: Vec<RealRoot> = Vec::new();
    for k in 0..n - 1 {
        if d2s[k] == 0.0 {
            let simple = k > 0 && d2s[k - 1] * d2s[k + 1] < 0.0;
            out.push(RealRoot {
                zeta0: table.zetas[k],
                residual: 0.0,
                suspected_non_simple: !simple,
            });
            continue;
        }
        if d2s[k] * d2s[k + 1] < 0.0 {
            let z = brent_result(
                |z| d2_real(profile, rate, theta, z),
                table.zetas[k],
                table.zetas[k + 1],
                xtol,
            )?;
            let residual = d2_real(profile, rate, theta, z)?.abs();
            out.push(RealRoot {
                zeta0: z,
                residual,
                suspected_non_simple: false,
            });
        }
    }
    if d2s[n - 1] == 0.0 {
        out.push(RealRoot {
            zeta0: table.zetas[n - 1],
            residual: 0.0,
            suspected_non_simple: true,
        });
    }
    for k in 1..n - 1 {
        let (a, m, b) = (d2s[k - 1], d2s[k], d2s[k + 1]);
        if m.abs() <= a.abs() && m.abs() <= b.abs() && a * m > 0.0 && m * b > 0.0 {
            let (z, _, _) = golden_min(
                |z| d2_real(profile, rate, theta, z).map(f64::abs),
                table.zetas[k - 1],
                table.zetas[k + 1],
                xtol.max(1e-13),
            )?;
            let val = d2_real(profile, rate, theta, z)?;
            if val.abs() < ROOT_TOL {
                out.push(RealRoot {
                    zeta0: z,
                    residual: val.abs(),
                    suspected_non_simple: true,
                });
            } else if val * m < 0.0 {
                for (lo, hi) in [(table.zetas[k - 1], z), (z, table.zetas[k + 1])] {
                    let z2 = brent_result(|x| d2_real(profile, rate, theta, x), lo, hi, xtol)?;
                    let residual = d2_real(profile, rate, theta, z2)?.abs();
                    out.push(RealRoot {
                        zeta0: z2,
                        residual,
                        suspected_non_simple: false,
                    });
                }
            }
        }
    }
    out.sort_by(|p, q| p.zeta0.total_cmp(&q.zeta0));
    let mut dedup: Vec<RealRoot> = Vec::with_capacity(out.len());
    for root in out {
        match dedup.last() {
            Some(prev) if (root.zeta0 - prev.zeta0).abs() <= 16.0 * xtol.max(1e-13) => {}
            _ => dedup.push(root),
        }
    }
    Ok(dedup)
}

/// Real characteristic values of the context's phase inside `interval`.
///
/// The determinant is sampled on a uniform seed grid of `n_seed` cells;
/// sign changes are refined by a safeguarded bracketing iteration to an
/// abscissa tolerance of `1e-12` times the interval width, and tangential
/// contacts are recovered from local minima of the absolute value (see
/// [`RealRoot::suspected_non_simple`]). Roots are returned sorted.
pub fn real_characteristic_values(
    ctx: &EvansContext,
    interval: (f64, f64),
    n_seed: usize,
) -> Result<Vec<RealRoot>> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameters(format!(
            "characteristic-value interval [{lo}, {hi}] must be finite and increasing"
        )));
    }
    if n_seed < 8 {
        return Err(Error::InvalidParameters(format!(
            "seed grid needs at least 8 cells, got {n_seed}"
        )));
    }
    let table = SeedTable::build(ctx.profile(), interval, n_seed + 1)?;
    refine_roots(ctx.profile(), ctx.theta(), &table, interval)
}

// ---------------------------------------------------------------------------
// Phase sweeps: tracking and events
// ---------------------------------------------------------------------------

/// Kind of a refined sweep event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A pair of real characteristic values with opposite signature merges
    /// and leaves the real axis.
    HopfOnset,
    /// A pair lands back on the real axis and separates.
    HopfOffset,
    /// Two tracked values exchange order while both remain simple on
    /// either side of the crossing.
    PassThrough,
}

/// A bifurcation event located by [`sweep_theta`].
#[derive(Debug, Clone, Copy)]
pub struct SweepEvent {
    pub kind: EventKind,
    /// Refined event phase, strictly inside `bracket`.
    pub theta_star: f64,
    /// Abscissa of the participating pair at the event.
    pub zeta_star: f64,
    /// Phase bracket around the event, of width at most [`EVENT_TOL`].
    pub bracket: (f64, f64),
}

/// One sample of a tracked root.
#[derive(Debug, Clone, Copy)]
pub struct TrackPoint {
    pub theta: f64,
    pub zeta0: f64,
    /// Signature of the value where the simplicity guards pass; `None`
    /// close to collisions and at suspected non-simple samples.
    pub kappa: Option<i8>,
}

/// A maximal chain of matched roots across consecutive sweep phases.
#[derive(Debug, Clone, Default)]
pub struct Track {
    pub points: Vec<TrackPoint>,
}

/// A match that jumped by a suspicious fraction of the local root spacing,
/// or a root that vanished away from both interval ends without a partner.
/// The affected track is ended (or started) rather than force-matched.
#[derive(Debug, Clone, Copy)]
pub struct MatchAmbiguity {
    pub theta: f64,
    pub zeta: f64,
}

/// Result of [`sweep_theta`].
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Tracks in order of creation (initial roots by position, then later
    /// appearances by phase).
    pub tracks: Vec<Track>,
    /// Refined events sorted by phase.
    pub events: Vec<SweepEvent>,
    /// Places where nearest-neighbour matching was not trustworthy.
    pub ambiguities: Vec<MatchAmbiguity>,
}

fn local_spacing(xs: &[f64], i: usize, span: f64) -> f64 {
    let mut s = f64::INFINITY;
    if i > 0 {
        s = s.min(xs[i] - xs[i - 1]);
    }
    if i + 1 < xs.len() {
        s = s.min(xs[i + 1] - xs[i]);
    }
    if s.is_finite() {
        s
    } else {
        span
    }
}

struct Alignment {
    /// Matched index pairs (old, new), in increasing order.
    pairs: Vec<(usize, usize)>,
    /// Old roots without a partner.
    unmatched_a: Vec<usize>,
    /// New roots without a partner.
    unmatched_b: Vec<usize>,
    /// Positions of matches that moved by more than half the local spacing.
    suspicious: Vec<f64>,
}

/// Order-preserving assignment between two sorted root lists.
///
/// Minimises total movement, with a per-root distance guard of five local
/// spacings beyond which a match is forbidden, and a skip penalty chosen so
/// that plausible matches always beat ending one track and starting
/// another. Ties resolve in a fixed order (match, end, start), so the
/// result is deterministic. A match is flagged suspicious when it moved by
/// more than half the local spacing *and* more than `floor`; the floor
/// keeps close encounters, where the local spacing itself collapses, from
/// flagging ordinary motion.
fn align(a: &[f64], b: &[f64], span: f64, floor: f64) -> Alignment {
    let m = a.len();
    let n = b.len();
    let ga: Vec<f64> = (0..m).map(|i| 5.0 * local_spacing(a, i, span)).collect();
    let gb: Vec<f64> = (0..n).map(|j| 5.0 * local_spacing(b, j, span)).collect();
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut cost = vec![0.0_f64; (m + 1) * (n + 1)];
    let mut step = vec![0_u8; (m + 1) * (n + 1)];
    for i in 1..=m {
        cost[idx(i, 0)] = cost[idx(i - 1, 0)] + 0.6 * ga[i - 1];
        step[idx(i, 0)] = 2;
    }
    for j in 1..=n {
        cost[idx(0, j)] = cost[idx(0, j - 1)] + 0.6 * gb[j - 1];
        step[idx(0, j)] = 3;
    }
    for i in 1..=m {
        for j in 1..=n {
            let d = (a[i - 1] - b[j - 1]).abs();
            let c_match = if d < ga[i - 1].max(gb[j - 1]) {
                cost[idx(i - 1, j - 1)] + d
            } else {
                f64::INFINITY
            };
            let c_end = cost[idx(i - 1, j)] + 0.6 * ga[i - 1];
            let c_start = cost[idx(i, j - 1)] + 0.6 * gb[j - 1];
            if c_match <= c_end && c_match <= c_start {
                cost[idx(i, j)] = c_match;
                step[idx(i, j)] = 1;
            } else if c_end <= c_start {
                cost[idx(i, j)] = c_end;
                step[idx(i, j)] = 2;
            } else {
                cost[idx(i, j)] = c_start;
                step[idx(i, j)] = 3;
            }
        }
    }
    let mut pairs = Vec::new();
    let mut unmatched_a = Vec::new();
    let mut unmatched_b = Vec::new();
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        match step[idx(i, j)] {
            1 => {
                pairs.push((i - 1, j - 1));
                i -= 1;
                j -= 1;
            }
            2 => {
                unmatched_a.push(i - 1);
                i -= 1;
            }
            _ => {
                unmatched_b.push(j - 1);
                j -= 1;
            }
        }
    }
    pairs.reverse();
    unmatched_a.reverse();
    unmatched_b.reverse();
    let suspicious = pairs
        .iter()
        .filter(|&&(i, j)| {
            let d = (a[i] - b[j]).abs();
            d > floor && d > 0.5 * local_spacing(a, i, span)
        })
        .map(|&(_, j)| b[j])
        .collect();
    Alignment {
        pairs,
        unmatched_a,
        unmatched_b,
        suspicious,
    }
}

/// Signature of a refined root, or `None` where the guards reject it.
fn kappa_of(ctx: &EvansContext, root: &RealRoot) -> Result<Option<i8>> {
    if root.suspected_non_simple {
        return Ok(None);
    }
    match krein_signature(ctx, root.zeta0) {
        Ok(k) => Ok(Some(k.kappa)),
        Err(
            Error::NonSimple { .. }
            | Error::NotACharacteristicValue { .. }
            | Error::ZeroCharacteristicValue,
        ) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Positions of the two distinct roots closest to a previous pair.
fn nearest_pair(roots: &[f64], q1: f64, q2: f64) -> Option<(f64, f64)> {
    if roots.len() < 2 {
        return None;
    }
    let i1 = (0..roots.len()).min_by(|&i, &j| {
        (roots[i] - q1).abs().total_cmp(&(roots[j] - q1).abs())
    })?;
    let i2 = (0..roots.len()).filter(|&i| i != i1).min_by(|&i, &j| {
        (roots[i] - q2).abs().total_cmp(&(roots[j] - q2).abs())
    })?;
    let (r1, r2) = (roots[i1], roots[i2]);
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// Root positions inside a window, on a freshly built local table.
fn local_root_positions(
    profile: &WaveProfile,
    theta: f64,
    window: (f64, f64),
) -> Result<Vec<f64>> {
    let table = SeedTable::build(profile, window, LOCAL_POINTS)?;
    let roots = refine_roots(profile, theta, &table, window)?;
    Ok(roots.into_iter().map(|r| r.zeta0).collect())
}

/// Bisect the phase interval between a side where a root pair exists and a
/// side where it has gone, returning the refined phase, the pair midpoint
/// on the present side, and the final bracket.
///
/// Presence is judged by the root count inside a fixed window around the
/// pair (clipped at the midlines towards surviving neighbours so bystander
/// roots neither enter nor leave): the pair is present while the count
/// stays at the value seen on the known-present side. The pair location is
/// re-identified after every present evaluation, so the reported abscissa
/// comes from the phase closest to the event.
fn refine_pair_event(
    profile: &WaveProfile,
    theta_present: f64,
    theta_absent: f64,
    pair: (f64, f64),
    window: (f64, f64),
) -> Result<(f64, f64, (f64, f64))> {
    let needed = local_root_positions(profile, theta_present, window)?
        .len()
        .max(2);
    let (mut q1, mut q2) = pair;
    let present_low = theta_present < theta_absent;
    let (mut lo, mut hi) = if present_low {
        (theta_present, theta_absent)
    } else {
        (theta_absent, theta_present)
    };
    while hi - lo > EVENT_TOL {
        let mid = 0.5 * (lo + hi);
        let roots = local_root_positions(profile, mid, window)?;
        let present = roots.len() >= needed;
        if present {
            if let Some(pair) = nearest_pair(&roots, q1, q2) {
                (q1, q2) = pair;
            }
        }
        if present == present_low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), 0.5 * (q1 + q2), (lo, hi)))
}

/// Window around a disappearing or appearing pair, clipped at the
/// midlines towards the surviving neighbours and at the sweep interval.
fn event_window(
    pair: (f64, f64),
    left_neighbour: Option<f64>,
    right_neighbour: Option<f64>,
    interval: (f64, f64),
    table_spacing: f64,
) -> (f64, f64) {
    let (p1, p2) = pair;
    let pad = (p2 - p1).max(8.0 * table_spacing);
    let mut wl = p1 - pad;
    let mut wr = p2 + pad;
    if let Some(nb) = left_neighbour {
        wl = wl.max(0.5 * (nb + p1));
    }
    if let Some(nb) = right_neighbour {
        wr = wr.min(0.5 * (nb + p2));
    }
    (wl.max(interval.0), wr.min(interval.1))
}

/// Group the sorted indices of unmatched roots into adjacent pairs and
/// leftover singles. Runs of consecutive indices pair up by closest
/// position first; anything unpaired is returned as a single.
fn pair_up(indices: &[usize], positions: &[f64]) -> (Vec<(usize, usize)>, Vec<usize>) {
    let mut pairs = Vec::new();
    let mut singles = Vec::new();
    let mut run: Vec<usize> = Vec::new();
    let flush = |run: &mut Vec<usize>, pairs: &mut Vec<(usize, usize)>, singles: &mut Vec<usize>| {
        while run.len() >= 2 {
            let mut best = 0;
            let mut best_gap = f64::INFINITY;
            for t in 0..run.len() - 1 {
                let gap = positions[run[t + 1]] - positions[run[t]];
                if gap < best_gap {
                    best_gap = gap;
                    best = t;
                }
            }
            pairs.push((run[best], run[best + 1]));
            run.drain(best..=best + 1);
        }
        singles.append(run);
    };
    for &i in indices {
        if let Some(&last) = run.last() {
            if i != last + 1 {
                flush(&mut run, &mut pairs, &mut singles);
            }
        }
        run.push(i);
    }
    flush(&mut run, &mut pairs, &mut singles);
    (pairs, singles)
}

/// Resolution of a close encounter between two root trajectories.
enum Contact {
    /// The roots stayed on the axis and crossed.
    Crossing {
        theta_star: f64,
        zeta_star: f64,
        bracket: (f64, f64),
    },
    /// The pair left the axis inside the encounter and came back: a
    /// collision followed by a re-emergence, each `(phase, abscissa,
    /// bracket)`.
    Excursion {
        onset: (f64, f64, (f64, f64)),
        offset: (f64, f64, (f64, f64)),
    },
}

/// Resolve a close encounter of two roots that travel roughly along the
/// straight lines `seg1`, `seg2` over the phase range `(ta, tb)`.
///
/// The separation of the two local roots nearest the line predictions is
/// minimised by a golden-section search, counting fewer than two roots as
/// zero separation. The local roots at the minimiser decide the outcome:
/// if any survive near the predictions the encounter is a crossing (the
/// roots never actually met); if none survive the pair has left the axis,
/// and the entry and exit phases are refined by presence bisection.
fn resolve_contact(
    profile: &WaveProfile,
    interval: (f64, f64),
    h_table: f64,
    (ta, tb): (f64, f64),
    seg1: (f64, f64),
    seg2: (f64, f64),
) -> Result<Contact> {
    let predict =
        |seg: (f64, f64), theta: f64| seg.0 + (seg.1 - seg.0) * (theta - ta) / (tb - ta);
    let window_at = |theta: f64| {
        let za = predict(seg1, theta);
        let zb = predict(seg2, theta);
        let pad = (za - zb).abs().max(8.0 * h_table);
        (
            (za.min(zb) - pad).max(interval.0),
            (za.max(zb) + pad).min(interval.1),
        )
    };
    let sep_at = |theta: f64| -> Result<f64> {
        let roots = local_root_positions(profile, theta, window_at(theta))?;
        let za = predict(seg1, theta);
        let zb = predict(seg2, theta);
        Ok(match nearest_pair(&roots, za.min(zb), za.max(zb)) {
            Some((r1, r2)) => r2 - r1,
            None => 0.0,
        })
    };
    let (theta_c, _, bracket) = golden_min(sep_at, ta, tb, EVENT_TOL * 0.98)?;
    let window = window_at(theta_c);
    let roots = local_root_positions(profile, theta_c, window)?;
    let za = predict(seg1, theta_c);
    let zb = predict(seg2, theta_c);
    let near = 0.25 * (window.1 - window.0);
    let survivors: Vec<f64> = roots
        .iter()
        .copied()
        .filter(|r| (r - za).abs().min((r - zb).abs()) < near)
        .collect();
    if survivors.is_empty() {
        let pair_a = (seg1.0.min(seg2.0), seg1.0.max(seg2.0));
        let pair_b = (seg1.1.min(seg2.1), seg1.1.max(seg2.1));
        let onset = refine_pair_event(profile, ta, theta_c, pair_a, window_at(ta))?;
        let offset = refine_pair_event(profile, tb, theta_c, pair_b, window_at(tb))?;
        Ok(Contact::Excursion { onset, offset })
    } else {
        let zeta_star = match nearest_pair(&survivors, za.min(zb), za.max(zb)) {
            Some((r1, r2)) => 0.5 * (r1 + r2),
            None => survivors[0],
        };
        Ok(Contact::Crossing {
            theta_star: theta_c,
            zeta_star,
            bracket,
        })
    }
}

/// Track the real characteristic values of one wave across a phase grid
/// and report collision, re-emergence, and crossing events.
///
/// The grid must be strictly increasing with steps of at most
/// [`MAX_THETA_STEP`]. Roots are located independently at every phase
/// (data-parallel), then matched between consecutive phases by an
/// order-preserving minimum-movement assignment with a distance guard of
/// five local spacings. A matched pair of disappearing tracks is refined
/// into a [`EventKind::HopfOnset`] event by bisection on the presence of
/// the pair, and an appearing pair gives [`EventKind::HopfOffset`].
///
/// Close encounters between two roots are found two ways: a signature
/// exchange between adjacent tracks across a local minimum of their
/// separation, and a broken track — a root that vanished at one phase
/// with a root appearing nearby within a few steps, two sightings of one
/// trajectory hidden behind another root near the contact. Either way the
/// encounter is resolved by minimising the pair separation: if the roots
/// survive at the minimiser the event is a [`EventKind::PassThrough`];
/// if they vanish there, the pair took a brief excursion off the axis and
/// the entry and exit are reported as an onset/offset event pair. Event
/// brackets are narrower than [`EVENT_TOL`] and straddle the refined
/// phase.
pub fn sweep_theta(
    profile: &WaveProfile,
    theta_grid: &[f64],
    interval: (f64, f64),
) -> Result<SweepOutcome> {
    if theta_grid.len() < 2 {
        return Err(Error::InvalidParameters(format!(
            "phase grid needs at least 2 nodes, got {}",
            theta_grid.len()
        )));
    }
    for w in theta_grid.windows(2) {
        if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
            return Err(Error::InvalidParameters(
                "phase grid must be finite and strictly increasing".into(),
            ));
        }
        if w[1] - w[0] > MAX_THETA_STEP * (1.0 + 1e-9) {
            return Err(Error::InvalidParameters(format!(
                "phase step {} exceeds the tracking limit {MAX_THETA_STEP}",
                w[1] - w[0]
            )));
        }
    }
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameters(format!(
            "sweep interval [{lo}, {hi}] must be finite and increasing"
        )));
    }
    let span = hi - lo;
    let table = SeedTable::build(profile, interval, TABLE_POINTS)?;
    let h_table = table.spacing();

    // Roots and signatures at every phase, in parallel.
    let per_theta: Vec<Result<Vec<(RealRoot, Option<i8>)>>> = theta_grid
        .par_iter()
        .map(|&theta| {
            let roots = refine_roots(profile, theta, &table, interval)?;
            let ctx = EvansContext::new(profile, theta);
            roots
                .into_iter()
                .map(|r| kappa_of(&ctx, &r).map(|k| (r, k)))
                .collect()
        })
        .collect();
    let per_theta: Vec<Vec<(RealRoot, Option<i8>)>> =
        per_theta.into_iter().collect::<Result<_>>()?;

    let mut tracks: Vec<Track> = Vec::new();
    let mut events: Vec<SweepEvent> = Vec::new();
    let mut ambiguities: Vec<MatchAmbiguity> = Vec::new();
    // Lone disappearances (phase index of last sighting, position) and
    // lone appearances (phase index of first sighting, position), matched
    // into close-encounter candidates after the tracking loop.
    let mut gone_singles_all: Vec<(usize, f64)> = Vec::new();
    let mut born_singles_all: Vec<(usize, f64)> = Vec::new();
    // Track indices alive at the current phase, in root order.
    let mut active: Vec<usize> = Vec::new();
    // occupancy[k][slot] = (track, zeta): alive tracks at phase k, sorted.
    let mut occupancy: Vec<Vec<(usize, f64)>> = Vec::with_capacity(theta_grid.len());

    for (root, kappa) in &per_theta[0] {
        let mut track = Track::default();
        track.points.push(TrackPoint {
            theta: theta_grid[0],
            zeta0: root.zeta0,
            kappa: *kappa,
        });
        active.push(tracks.len());
        tracks.push(track);
    }
    occupancy.push(
        active
            .iter()
            .zip(&per_theta[0])
            .map(|(&t, (r, _))| (t, r.zeta0))
            .collect(),
    );

    for k in 1..theta_grid.len() {
        let (theta_prev, theta_next) = (theta_grid[k - 1], theta_grid[k]);
        let a_pos: Vec<f64> = occupancy[k - 1].iter().map(|&(_, z)| z).collect();
        let b = &per_theta[k];
        let b_pos: Vec<f64> = b.iter().map(|(r, _)| r.zeta0).collect();
        let al = align(&a_pos, &b_pos, span, 4.0 * h_table);
        for &z in &al.suspicious {
            ambiguities.push(MatchAmbiguity {
                theta: theta_next,
                zeta: z,
            });
        }

        // Disappearances: unmatched old roots, paired up when adjacent.
        let (gone_pairs, gone_singles) = pair_up(&al.unmatched_a, &a_pos);
        for (i1, i2) in gone_pairs {
            let pair = (a_pos[i1], a_pos[i2]);
            let left = (0..i1).rev().find(|i| !al.unmatched_a.contains(i)).map(|i| a_pos[i]);
            let right = (i2 + 1..a_pos.len())
                .find(|i| !al.unmatched_a.contains(i))
                .map(|i| a_pos[i]);
            let window = event_window(pair, left, right, interval, h_table);
            let (theta_star, zeta_star, bracket) =
                refine_pair_event(profile, theta_prev, theta_next, pair, window)?;
            events.push(SweepEvent {
                kind: EventKind::HopfOnset,
                theta_star,
                zeta_star,
                bracket,
            });
        }
        for i in gone_singles {
            let z = a_pos[i];
            if (z - interval.0).min(interval.1 - z) > 16.0 * h_table {
                gone_singles_all.push((k - 1, z));
            }
        }

        // Appearances: unmatched new roots.
        let (born_pairs, born_singles) = pair_up(&al.unmatched_b, &b_pos);
        for (j1, j2) in born_pairs {
            let pair = (b_pos[j1], b_pos[j2]);
            let left = (0..j1).rev().find(|j| !al.unmatched_b.contains(j)).map(|j| b_pos[j]);
            let right = (j2 + 1..b_pos.len())
                .find(|j| !al.unmatched_b.contains(j))
                .map(|j| b_pos[j]);
            let window = event_window(pair, left, right, interval, h_table);
            let (theta_star, zeta_star, bracket) =
                refine_pair_event(profile, theta_next, theta_prev, pair, window)?;
            events.push(SweepEvent {
                kind: EventKind::HopfOffset,
                theta_star,
                zeta_star,
                bracket,
            });
        }
        for j in born_singles {
            let z = b_pos[j];
            if (z - interval.0).min(interval.1 - z) > 16.0 * h_table {
                born_singles_all.push((k, z));
            }
        }

        // Extend matched tracks, then start new ones, keeping root order.
        let mut next_active: Vec<(usize, usize)> = Vec::new(); // (b index, track)
        for &(i, j) in &al.pairs {
            let track = occupancy[k - 1][i].0;
            tracks[track].points.push(TrackPoint {
                theta: theta_next,
                zeta0: b[j].0.zeta0,
                kappa: b[j].1,
            });
            next_active.push((j, track));
        }
        for &j in &al.unmatched_b {
            let mut track = Track::default();
            track.points.push(TrackPoint {
                theta: theta_next,
                zeta0: b[j].0.zeta0,
                kappa: b[j].1,
            });
            next_active.push((j, tracks.len()));
            tracks.push(track);
        }
        next_active.sort_by_key(|&(j, _)| j);
        occupancy.push(
            next_active
                .iter()
                .map(|&(j, t)| (t, b[j].0.zeta0))
                .collect(),
        );
    }

    // Broken tracks: a lone disappearance followed within a few steps by
    // a lone appearance nearby is one trajectory passing so close to
    // another root that the grid could not keep them apart. Pair such
    // sightings, find the stationary partner they met, and resolve the
    // encounter; leftovers stay ambiguous.
    let mut used_born = vec![false; born_singles_all.len()];
    for &(kg, zg) in &gone_singles_all {
        let mut best: Option<(usize, f64)> = None;
        for (bi, &(kb, zb)) in born_singles_all.iter().enumerate() {
            if used_born[bi] || kb <= kg || kb - kg > 3 {
                continue;
            }
            let d = (zb - zg).abs();
            if d <= 12.0 * h_table && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((bi, d));
            }
        }
        let Some((bi, _)) = best else {
            ambiguities.push(MatchAmbiguity {
                theta: theta_grid[kg],
                zeta: zg,
            });
            continue;
        };
        used_born[bi] = true;
        let (kb, zb) = born_singles_all[bi];
        let mid = 0.5 * (zg + zb);
        // The sighting being excluded comes from this very root list, so a
        // quarter-cell radius rejects it without risking the partner,
        // which the table must have resolved at least a cell away.
        let pick = |k: usize, excl: f64| -> Option<f64> {
            per_theta[k]
                .iter()
                .map(|(r, _)| r.zeta0)
                .filter(|&p| (p - excl).abs() > 0.25 * h_table)
                .min_by(|p, q| (p - mid).abs().total_cmp(&(q - mid).abs()))
        };
        let partner = match (pick(kg, zg), pick(kb, zb)) {
            (Some(ra), Some(rb))
                if (ra - rb).abs() <= 12.0 * h_table && (ra - mid).abs() <= 12.0 * h_table =>
            {
                Some((ra, rb))
            }
            _ => None,
        };
        // Only a side swap relative to the partner marks a crossing; a
        // return on the same side is a rebound and stays ambiguous.
        let crossed = partner
            .is_some_and(|(ra, rb)| (zg - ra).signum() * (zb - rb).signum() < 0.0);
        if !crossed {
            ambiguities.push(MatchAmbiguity {
                theta: theta_grid[kg],
                zeta: zg,
            });
            continue;
        }
        let (ra, rb) = partner.unwrap();
        let range = (theta_grid[kg], theta_grid[kb]);
        match resolve_contact(profile, interval, h_table, range, (zg, zb), (ra, rb))? {
            Contact::Crossing {
                theta_star,
                zeta_star,
                bracket,
            } => events.push(SweepEvent {
                kind: EventKind::PassThrough,
                theta_star,
                zeta_star,
                bracket,
            }),
            Contact::Excursion { onset, offset } => {
                events.push(SweepEvent {
                    kind: EventKind::HopfOnset,
                    theta_star: onset.0,
                    zeta_star: onset.1,
                    bracket: onset.2,
                });
                events.push(SweepEvent {
                    kind: EventKind::HopfOffset,
                    theta_star: offset.0,
                    zeta_star: offset.1,
                    bracket: offset.2,
                });
            }
        }
    }
    for (bi, &(kb, zb)) in born_singles_all.iter().enumerate() {
        if !used_born[bi] {
            ambiguities.push(MatchAmbiguity {
                theta: theta_grid[kb],
                zeta: zb,
            });
        }
    }

    // Crossings: adjacent tracks whose separation dips through a local
    // minimum while their signatures trade places.
    let index_of: Vec<HashMap<usize, usize>> = tracks
        .iter()
        .map(|t| {
            t.points
                .iter()
                .enumerate()
                .map(|(p, pt)| {
                    let k = theta_grid.partition_point(|&th| th < pt.theta - 1e-15);
                    (k, p)
                })
                .collect()
        })
        .collect();
    let point_at = |t: usize, k: usize| -> Option<&TrackPoint> {
        index_of[t].get(&k).map(|&p| &tracks[t].points[p])
    };
    let kappa_near = |t: usize, k: usize, dir: isize| -> Option<i8> {
        for s in 0..3 {
            let kk = k as isize + dir * s as isize;
            if kk < 0 || kk as usize >= theta_grid.len() {
                break;
            }
            if let Some(pt) = point_at(t, kk as usize) {
                if let Some(kappa) = pt.kappa {
                    return Some(kappa);
                }
            } else {
                break;
            }
        }
        None
    };
    let mut crossing_done: Vec<(usize, usize, usize)> = Vec::new();
    for k in 1..theta_grid.len().saturating_sub(1) {
        for slot in 0..occupancy[k].len().saturating_sub(1) {
            let (t1, z1) = occupancy[k][slot];
            let (t2, z2) = occupancy[k][slot + 1];
            let (Some(p1m), Some(p1p)) = (point_at(t1, k - 1), point_at(t1, k + 1)) else {
                continue;
            };
            let (Some(p2m), Some(p2p)) = (point_at(t2, k - 1), point_at(t2, k + 1)) else {
                continue;
            };
            let s_prev = (p2m.zeta0 - p1m.zeta0).abs();
            let s_here = (z2 - z1).abs();
            let s_next = (p2p.zeta0 - p1p.zeta0).abs();
            if !(s_here <= s_prev && s_here <= s_next && (s_here < s_prev || s_here < s_next)) {
                continue;
            }
            let (Some(k1m), Some(k1p)) = (kappa_near(t1, k - 1, -1), kappa_near(t1, k + 1, 1))
            else {
                continue;
            };
            let (Some(k2m), Some(k2p)) = (kappa_near(t2, k - 1, -1), kappa_near(t2, k + 1, 1))
            else {
                continue;
            };
            if !(k1m == k2p && k2m == k1p && k1m != k2m) {
                continue;
            }
            if crossing_done
                .iter()
                .any(|&(a, b2, kk)| a == t1 && b2 == t2 && k.abs_diff(kk) <= 2)
            {
                continue;
            }
            crossing_done.push((t1, t2, k));
            let seg1 = (p1m.zeta0, p1p.zeta0);
            let seg2 = (p2m.zeta0, p2p.zeta0);
            let range = (theta_grid[k - 1], theta_grid[k + 1]);
            match resolve_contact(profile, interval, h_table, range, seg1, seg2)? {
                Contact::Crossing {
                    theta_star,
                    zeta_star,
                    bracket,
                } => events.push(SweepEvent {
                    kind: EventKind::PassThrough,
                    theta_star,
                    zeta_star,
                    bracket,
                }),
                Contact::Excursion { onset, offset } => {
                    events.push(SweepEvent {
                        kind: EventKind::HopfOnset,
                        theta_star: onset.0,
                        zeta_star: onset.1,
                        bracket: onset.2,
                    });
                    events.push(SweepEvent {
                        kind: EventKind::HopfOffset,
                        theta_star: offset.0,
                        zeta_star: offset.1,
                        bracket: offset.2,
                    });
                }
            }
        }
    }

    events.sort_by(|a, b| {
        a.theta_star
            .total_cmp(&b.theta_star)
            .then(a.zeta_star.total_cmp(&b.zeta_star))
    });
    events.dedup_by(|later, earlier| {
        later.kind == earlier.kind
            && (later.theta_star - earlier.theta_star).abs() < 2.0 * EVENT_TOL
            && (later.zeta_star - earlier.zeta_star).abs() < 20.0 * h_table
    });
    ambiguities.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.zeta.total_cmp(&b.zeta)));
    Ok(SweepOutcome {
        tracks,
        events,
        ambiguities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evans::evans_d2;
    use crate::hill::integrate_hill_with;
    use crate::ode::Integrator;
    use crate::potential::Potential;
    use crate::waves::{wave_profile, Branch, WaveParameters};
    use std::sync::LazyLock;

    fn profile_of(pot: Potential, e: f64, c: f64, branch: Branch) -> WaveProfile {
        let params = WaveParameters::new(pot, e, c, branch).unwrap();
        wave_profile(&params, 33).unwrap()
    }

    static SG_STABLE: LazyLock<WaveProfile> =
        LazyLock::new(|| profile_of(Potential::sine_gordon(), -0.5, 0.5, Branch::RotationPositive));
    static SG_HOPF: LazyLock<WaveProfile> =
        LazyLock::new(|| profile_of(Potential::sine_gordon(), 6.0, 1.45, Branch::RotationPositive));

    #[test]
    fn window_rejects_degenerate_input() {
        assert!(Window::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Window::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(Window::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
        let w = Window::new(-2.0, 2.0, -0.5, 0.5).unwrap();
        assert!((w.diagonal() - (16.0f64 + 1.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn scan_rejects_coarse_grids() {
        let w = Window::new(-1.0, 1.0, -0.5, 0.5).unwrap();
        assert!(matches!(
            spectrum_scan(&SG_STABLE, &w, (16, 16), DEFAULT_IMAG_TOL),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn symmetric_linspace_mirrors_exactly() {
        let xs = linspace_sym(-2.0, 2.0, 9);
        assert_eq!(xs[4], 0.0);
        for i in 0..xs.len() {
            // Value-exact mirror; bit-exact away from the centre (the centre
            // compares 0.0 against -0.0, which the trace cache collapses).
            assert_eq!(xs[i], -xs[xs.len() - 1 - i]);
            if i != 4 {
                assert_eq!(xs[i].to_bits(), (-xs[xs.len() - 1 - i]).to_bits());
            }
        }
        let ys = linspace_sym(0.5, 1.5, 5);
        assert_eq!(ys[0], 0.5);
        assert_eq!(ys[4], 1.5);
    }

    #[test]
    fn theta_of_zeta_at_origin_is_exactly_zero() {
        for profile in [&*SG_STABLE, &*SG_HOPF] {
            let thetas = theta_of_zeta(profile, Complex64::new(0.0, 0.0)).unwrap();
            assert_eq!(thetas, vec![0.0]);
        }
    }

    #[test]
    fn theta_of_zeta_in_band_returns_real_phases_solving_d2() {
        let profile = &*SG_HOPF;
        let zeta = Complex64::new(1.0, 0.0);
        // Confirm the probe point really is inside a band.
        let v = HillCoefficient::new(profile, zeta, 0.0).v();
        let tr = integrate_hill(profile, v).unwrap().trace();
        assert!(tr.re.abs() < 2.0 - 1e-3, "probe point not interior: tr = {tr}");
        let thetas = theta_of_zeta(profile, zeta).unwrap();
        assert_eq!(thetas.len(), 2, "thetas = {thetas:?}");
        for theta in thetas {
            assert!((0.0..TAU).contains(&theta));
            let ctx = EvansContext::new(profile, theta);
            let d2 = evans_d2(&ctx, zeta).unwrap();
            assert!(d2.norm() < ROOT_TOL, "theta = {theta}: |D2| = {}", d2.norm());
        }
    }

    #[test]
    fn theta_of_zeta_far_off_spectrum_is_empty_by_dense_search() {
        let profile = &*SG_HOPF;
        let zeta = Complex64::new(1.0, 0.8);
        // Independent check: no real phase comes close to solving D2 = 0.
        let v = HillCoefficient::new(profile, zeta, 0.0).v();
        let tr = integrate_hill(profile, v).unwrap().trace();
        let rate = profile.params().speed() * profile.period() / profile.params().mass();
        let a = rate * zeta;
        let min_d2 = (0..4096)
            .map(|k| (tr - 2.0 * (a + TAU * k as f64 / 4096.0).cos()).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(min_d2 > 1e-2, "min |D2| over phases = {min_d2}");
        assert!(theta_of_zeta(profile, zeta).unwrap().is_empty());
    }

    #[test]
    fn scan_keeps_stable_wave_on_the_axis() {
        let window = Window::new(-2.0, 2.0, -0.5, 0.5).unwrap();
        let report = spectrum_scan(&SG_STABLE, &window, (48, 32), DEFAULT_IMAG_TOL).unwrap();
        assert!(!report.empty_window);
        assert!(report.points.len() > 20, "only {} points", report.points.len());
        assert!(report.max_hill_drift < 1e-8, "drift = {:.3e}", report.max_hill_drift);
        for p in &report.points {
            assert!(p.zeta.im.abs() < 1e-6, "off-axis point {:?}", p);
            assert!(p.residual < ROOT_TOL);
            assert_eq!(p.lambda, Complex64::i() * p.zeta);
        }
    }

    #[test]
    fn scan_finds_off_axis_loop_and_respects_symmetry() {
        let window = Window::new(-2.6, 2.6, -0.35, 0.35).unwrap();
        let report = spectrum_scan(&SG_HOPF, &window, (64, 32), DEFAULT_IMAG_TOL).unwrap();
        let tol = 2.0 * window.diagonal() / 2f64.powi(14);
        let off_axis: Vec<_> =
            report.points.iter().filter(|p| p.zeta.im.abs() > 1e-3).collect();
        assert!(!off_axis.is_empty(), "no off-axis points found");
        // Closure of the point set under both reflections.
        for p in &report.points {
            for image in [-p.zeta, p.zeta.conj()] {
                let nearest = report
                    .points
                    .iter()
                    .map(|q| (q.zeta - image).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest <= tol, "image of {} missing: {nearest:.2e}", p.zeta);
            }
        }
        // Sorted by (Re lambda, Im lambda).
        for pair in report.points.windows(2) {
            let key = |p: &SpectralPoint| (p.lambda.re, p.lambda.im, p.theta);
            assert!(key(&pair[0]) <= key(&pair[1]));
        }
    }

    #[test]
    fn scan_points_survive_doubled_accuracy() {
        let window = Window::new(1.2, 2.6, -0.3, 0.3).unwrap();
        let report = spectrum_scan(&SG_HOPF, &window, (33, 32), DEFAULT_IMAG_TOL).unwrap();
        assert!(!report.empty_window);
        let tight = Integrator { atol: 0.5e-14, rtol: 0.5e-12, max_steps: 8_000_000 };
        let profile = &*SG_HOPF;
        let rate = profile.params().speed() * profile.period() / profile.params().mass();
        for p in &report.points {
            let v = HillCoefficient::new(profile, p.zeta, 0.0).v();
            let tr = integrate_hill_with(profile, v, &tight).unwrap().trace();
            let d2 = tr - 2.0 * (rate * p.zeta + p.theta).cos();
            assert!(d2.norm() < 1e-8, "{:?}: re-evaluated |D2| = {:.3e}", p, d2.norm());
        }
    }

    #[test]
    fn scan_flags_empty_window() {
        let window = Window::new(0.5, 1.5, 0.2, 0.45).unwrap();
        let report = spectrum_scan(&SG_STABLE, &window, (32, 32), DEFAULT_IMAG_TOL).unwrap();
        assert!(report.empty_window);
        assert!(report.points.is_empty());
    }

    #[test]
    fn scan_output_is_translation_invariant_on_the_spectrum() {
        let a = Window::new(-1.0, 1.0, -0.2, 0.2).unwrap();
        let b = Window::new(-0.87, 1.13, -0.2, 0.2).unwrap();
        let ra = spectrum_scan(&SG_STABLE, &a, (48, 32), DEFAULT_IMAG_TOL).unwrap();
        let rb = spectrum_scan(&SG_STABLE, &b, (48, 32), DEFAULT_IMAG_TOL).unwrap();
        assert!(!ra.empty_window && !rb.empty_window);
        // Compare on the common interior; agreement to one grid cell (the
        // accepted sets sample the same curves at shifted abscissae).
        let cell = ((a.re_range().1 - a.re_range().0) / 47.0)
            .hypot((a.im_range().1 - a.im_range().0) / 31.0);
        let common = |p: &&SpectralPoint| p.zeta.re >= -0.85 && p.zeta.re <= 0.98;
        for (from, to) in [(&ra, &rb), (&rb, &ra)] {
            for p in from.points.iter().filter(common) {
                let nearest = to
                    .points
                    .iter()
                    .map(|q| (q.zeta - p.zeta).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest <= cell, "point {} unmatched ({nearest:.2e})", p.zeta);
            }
        }
    }

    #[test]
    fn scan_is_deterministic_across_worker_counts() {
        let window = Window::new(-1.2, 1.2, -0.25, 0.25).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| spectrum_scan(&SG_STABLE, &window, (32, 32), DEFAULT_IMAG_TOL).unwrap())
        };
        let one = run(1);
        let three = run(3);
        assert_eq!(one.points.len(), three.points.len());
        for (p, q) in one.points.iter().zip(three.points.iter()) {
            assert_eq!(p.zeta.re.to_bits(), q.zeta.re.to_bits());
            assert_eq!(p.zeta.im.to_bits(), q.zeta.im.to_bits());
            assert_eq!(p.theta.to_bits(), q.theta.to_bits());
            assert_eq!(p.residual.to_bits(), q.residual.to_bits());
        }
        assert_eq!(one.max_hill_drift.to_bits(), three.max_hill_drift.to_bits());
    }

    // --- real characteristic values and phase sweeps ---

    static PHI4_WELL: LazyLock<WaveProfile> =
        LazyLock::new(|| profile_of(Potential::phi4(), -0.082875, 0.95, Branch::LeftWell));

    #[test]
    fn real_roots_flag_the_origin_as_non_simple_at_phase_zero() {
        let ctx = EvansContext::new(&SG_HOPF, 0.0);
        let roots = real_characteristic_values(&ctx, (-0.5, 0.5), 64).unwrap();
        let origin = roots
            .iter()
            .find(|r| r.zeta0.abs() < 1e-5)
            .expect("origin root missing");
        assert!(origin.suspected_non_simple, "origin not flagged: {roots:?}");
    }

    #[test]
    fn real_roots_solve_the_determinant() {
        let ctx = EvansContext::new(&SG_HOPF, 4.36);
        let roots = real_characteristic_values(&ctx, (0.05, 2.8), 96).unwrap();
        assert_eq!(roots.len(), 3, "roots = {roots:?}");
        for r in &roots {
            assert!(!r.suspected_non_simple);
            assert!(r.residual < ROOT_TOL);
            let d2 = evans_d2(&ctx, Complex64::new(r.zeta0, 0.0)).unwrap();
            assert!(d2.norm() < ROOT_TOL, "|D2({})| = {:.2e}", r.zeta0, d2.norm());
        }
    }

    #[test]
    fn real_roots_mirror_under_phase_reflection() {
        // D2(-zeta; 2pi - theta) = D2(zeta; theta), so the negative-axis
        // roots of the complementary phase mirror the positive-axis roots.
        let theta = 4.36;
        let a = real_characteristic_values(&EvansContext::new(&SG_HOPF, theta), (0.05, 2.8), 96)
            .unwrap();
        let b = real_characteristic_values(
            &EvansContext::new(&SG_HOPF, TAU - theta),
            (-2.8, -0.05),
            96,
        )
        .unwrap();
        assert_eq!(a.len(), b.len());
        for (r, s) in a.iter().zip(b.iter().rev()) {
            assert!(
                (r.zeta0 + s.zeta0).abs() < 1e-9,
                "{} does not mirror {}",
                r.zeta0,
                s.zeta0
            );
        }
    }

    #[test]
    fn root_count_drops_by_two_after_the_collision() {
        let count = |theta: f64| {
            real_characteristic_values(&EvansContext::new(&SG_HOPF, theta), (0.05, 2.8), 96)
                .unwrap()
                .len() as i64
        };
        assert_eq!(count(4.36) - count(4.88), 2);
    }

    #[test]
    fn real_roots_reject_bad_requests() {
        let ctx = EvansContext::new(&SG_HOPF, 1.0);
        assert!(matches!(
            real_characteristic_values(&ctx, (0.5, 0.5), 64),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            real_characteristic_values(&ctx, (0.0, 1.0), 4),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn sweep_with_stable_count_reports_no_events() {
        let grid = [4.30, 4.32, 4.34];
        let out = sweep_theta(&SG_HOPF, &grid, (0.05, 2.8)).unwrap();
        assert!(out.events.is_empty(), "events = {:?}", out.events);
        assert!(out.ambiguities.is_empty());
        assert_eq!(out.tracks.len(), 3);
        for t in &out.tracks {
            assert_eq!(t.points.len(), 3);
            assert!(t.points.iter().all(|p| p.kappa.is_some()));
        }
    }

    #[test]
    fn sweep_rejects_bad_phase_grids() {
        let p = &*SG_HOPF;
        let iv = (0.05, 2.8);
        assert!(matches!(sweep_theta(p, &[4.0], iv), Err(Error::InvalidParameters(_))));
        assert!(matches!(sweep_theta(p, &[4.0, 4.05], iv), Err(Error::InvalidParameters(_))));
        assert!(matches!(sweep_theta(p, &[4.0, 3.99], iv), Err(Error::InvalidParameters(_))));
        assert!(matches!(
            sweep_theta(p, &[4.0, 4.01], (2.8, 0.05)),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn sweep_refines_a_collision_with_opposite_signatures() {
        let grid: Vec<f64> = (0..=10).map(|k| 4.50 + 0.005 * k as f64).collect();
        let out = sweep_theta(&SG_HOPF, &grid, (0.05, 2.8)).unwrap();
        assert!(out.ambiguities.is_empty(), "{:?}", out.ambiguities);
        let onsets: Vec<_> = out
            .events
            .iter()
            .filter(|e| e.kind == EventKind::HopfOnset)
            .collect();
        assert_eq!(onsets.len(), 1, "events = {:?}", out.events);
        let ev = onsets[0];
        assert!(ev.bracket.0 < ev.theta_star && ev.theta_star < ev.bracket.1);
        assert!(ev.bracket.1 - ev.bracket.0 <= EVENT_TOL * 1.000_001);
        assert!((4.5235..4.5246).contains(&ev.theta_star), "theta* = {}", ev.theta_star);
        assert!((1.8..2.0).contains(&ev.zeta_star), "zeta* = {}", ev.zeta_star);

        // The two tracks that end at the collision carry opposite signatures.
        let last_theta = *grid.last().unwrap();
        let dying: Vec<_> = out
            .tracks
            .iter()
            .filter(|t| t.points.last().unwrap().theta < last_theta - 1e-12)
            .collect();
        assert_eq!(dying.len(), 2);
        let k1 = dying[0].points.iter().rev().find_map(|p| p.kappa).unwrap();
        let k2 = dying[1].points.iter().rev().find_map(|p| p.kappa).unwrap();
        assert_eq!(k1 * k2, -1, "signatures {k1} and {k2} not opposite");

        // The net signature over the interval never changes: the pair
        // annihilates as +1 with -1.
        let sums: Vec<i32> = grid
            .iter()
            .map(|&theta| {
                out.tracks
                    .iter()
                    .flat_map(|t| &t.points)
                    .filter(|p| (p.theta - theta).abs() < 1e-12)
                    .map(|p| p.kappa.expect("signature undefined at a grid node") as i32)
                    .sum()
            })
            .collect();
        assert!(sums.windows(2).all(|w| w[0] == w[1]), "sums = {sums:?}");
    }

    #[test]
    fn sweep_refines_a_pair_birth_with_opposite_signatures() {
        let grid: Vec<f64> = (0..=9).map(|k| 5.17 + 0.005 * k as f64).collect();
        let out = sweep_theta(&SG_HOPF, &grid, (0.05, 2.8)).unwrap();
        let offsets: Vec<_> = out
            .events
            .iter()
            .filter(|e| e.kind == EventKind::HopfOffset)
            .collect();
        assert_eq!(offsets.len(), 1, "events = {:?}", out.events);
        let ev = offsets[0];
        assert!(ev.bracket.0 < ev.theta_star && ev.theta_star < ev.bracket.1);
        assert!(ev.bracket.1 - ev.bracket.0 <= EVENT_TOL * 1.000_001);
        assert!((5.1909..5.1920).contains(&ev.theta_star), "theta* = {}", ev.theta_star);
        assert!((1.3..1.55).contains(&ev.zeta_star), "zeta* = {}", ev.zeta_star);

        let born: Vec<_> = out
            .tracks
            .iter()
            .filter(|t| t.points.first().unwrap().theta > grid[0] + 1e-12)
            .collect();
        assert_eq!(born.len(), 2, "tracks born: {}", born.len());
        let kappas: Vec<i8> = born
            .iter()
            .map(|t| t.points.last().unwrap().kappa.expect("signature missing"))
            .collect();
        assert_eq!(kappas[0] * kappas[1], -1, "kappas = {kappas:?}");
    }

    #[test]
    fn sweep_recovers_a_crossing_from_a_broken_track() {
        // A fast root overtakes a slow one of opposite signature; at the
        // contact their gap falls below the seed-table resolution, so the
        // fast track ends at one phase and a new track starts two steps
        // later on the far side. The sweep must stitch the two sightings
        // into a single crossing event instead of logging ambiguities.
        let grid: Vec<f64> = (0..=11).map(|k| 3.95 + 0.005 * k as f64).collect();
        let out = sweep_theta(&PHI4_WELL, &grid, (0.03, 1.35)).unwrap();
        assert_eq!(out.events.len(), 1, "events: {:?}", out.events);
        let e = &out.events[0];
        assert_eq!(e.kind, EventKind::PassThrough);
        assert!(
            e.theta_star > 3.9740 && e.theta_star < 3.9775,
            "theta* = {}",
            e.theta_star
        );
        assert!((e.zeta_star - 0.3458).abs() < 3e-3, "zeta* = {}", e.zeta_star);
        assert!(e.bracket.0 < e.theta_star && e.theta_star < e.bracket.1);
        assert!(e.bracket.1 - e.bracket.0 <= EVENT_TOL * 1.000001);
        assert!(out.ambiguities.is_empty(), "ambiguities: {:?}", out.ambiguities);
    }

    #[test]
    fn sweep_splits_a_brief_axis_departure_into_onset_and_offset() {
        // Around phase 4.34 the approaching pair leaves the real axis for
        // a phase window of width ~5e-3 and lands again. With no grid node
        // inside that window both roots are seen at every phase, yet their
        // signatures appear to trade places; the contact resolver must
        // notice the pair actually vanishes in between and report the
        // departure and the return, each refined to the event tolerance.
        let grid = [4.3275, 4.335, 4.3425, 4.35];
        let out = sweep_theta(&PHI4_WELL, &grid, (0.30, 0.70)).unwrap();
        let onsets: Vec<&SweepEvent> = out
            .events
            .iter()
            .filter(|e| e.kind == EventKind::HopfOnset)
            .collect();
        let offsets: Vec<&SweepEvent> = out
            .events
            .iter()
            .filter(|e| e.kind == EventKind::HopfOffset)
            .collect();
        assert_eq!(
            (onsets.len(), offsets.len()),
            (1, 1),
            "events: {:?}",
            out.events
        );
        let (on, off) = (onsets[0], offsets[0]);
        assert!(
            on.theta_star > 4.33505 && on.theta_star < 4.33520,
            "onset theta* = {}",
            on.theta_star
        );
        assert!(
            off.theta_star > 4.33995 && off.theta_star < 4.34010,
            "offset theta* = {}",
            off.theta_star
        );
        assert!((on.zeta_star - 0.5149).abs() < 2e-3, "onset zeta* = {}", on.zeta_star);
        assert!((off.zeta_star - 0.5169).abs() < 2e-3, "offset zeta* = {}", off.zeta_star);
        for e in [on, off] {
            assert!(e.bracket.0 < e.theta_star && e.theta_star < e.bracket.1);
            assert!(e.bracket.1 - e.bracket.0 <= EVENT_TOL * 1.000001);
        }
    }

    #[test]
    fn sweep_finds_the_same_departure_with_a_node_inside_it() {
        // Same off-axis excursion as above, but with a grid node inside
        // the departed window, so the pair visibly vanishes and reappears
        // and the events come from presence bisection alone. Both routes
        // must agree on the refined phases.
        let grid: Vec<f64> = (0..=5).map(|k| 4.325 + 0.005 * k as f64).collect();
        let out = sweep_theta(&PHI4_WELL, &grid, (0.30, 0.70)).unwrap();
        let kinds: Vec<EventKind> = out.events.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            [EventKind::HopfOnset, EventKind::HopfOffset],
            "events: {:?}",
            out.events
        );
        assert!(
            out.events[0].theta_star > 4.33505 && out.events[0].theta_star < 4.33520,
            "onset theta* = {}",
            out.events[0].theta_star
        );
        assert!(
            out.events[1].theta_star > 4.33995 && out.events[1].theta_star < 4.34010,
            "offset theta* = {}",
            out.events[1].theta_star
        );
    }

}
