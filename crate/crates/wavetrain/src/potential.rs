//! Nonlinearity potentials `V(u)` and their first two derivatives.
//!
//! The wave equation `u_tt - u_xx + V'(u) = 0` enters every computation only
//! through the triple `(V, V', V'')`: the energy integral and periods use
//! `V`, profile integration uses `V'`, and the Hill coefficient uses `V''`.
//! A [`Potential`] bundles the triple with the metadata the orbit analysis
//! needs: an optional period in `u` and a search window for critical points.

use crate::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A potential `V(u)` with analytic first and second derivatives.
#[derive(Clone)]
pub struct Potential {
    v: ScalarFn,
    dv: ScalarFn,
    d2v: ScalarFn,
    period: Option<f64>,
    domain: (f64, f64),
    name: String,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("period", &self.period)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Potential {
    /// Sine-Gordon potential `V(u) = 1 - cos u`, periodic with period `2pi`.
    pub fn sine_gordon() -> Self {
        Potential {
            v: Arc::new(|u: f64| 1.0 - u.cos()),
            dv: Arc::new(|u: f64| u.sin()),
            d2v: Arc::new(|u: f64| u.cos()),
            period: Some(2.0 * PI),
            domain: (0.0, 2.0 * PI),
            name: "sine-gordon".into(),
        }
    }

    /// Quartic double well `V(u) = u^4/4 - u^2/2` with wells at `u = ±1`.
    pub fn phi4() -> Self {
        Potential {
            v: Arc::new(|u: f64| 0.25 * u.powi(4) - 0.5 * u * u),
            dv: Arc::new(|u: f64| u * u * u - u),
            d2v: Arc::new(|u: f64| 3.0 * u * u - 1.0),
            period: None,
            domain: (-4.0, 4.0),
            name: "phi4".into(),
        }
    }

    /// Builds a potential from user-supplied closures.
    ///
    /// `period` marks a potential satisfying `V(u + period) = V(u)`; the
    /// `domain` restricts where critical points are searched for
    /// non-periodic potentials (it is ignored for periodic ones beyond one
    /// period). The triple is checked for internal consistency: `dv` against
    /// a central difference of `v`, `d2v` against one of `dv`, and the
    /// stated periodicity against samples.
    pub fn new(
        name: impl Into<String>,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        period: Option<f64>,
        domain: (f64, f64),
    ) -> Result<Self> {
        let p = Potential {
            v: Arc::new(v),
            dv: Arc::new(dv),
            d2v: Arc::new(d2v),
            period,
            domain,
            name: name.into(),
        };
        p.validate()?;
        Ok(p)
    }

    /// `V(u)`.
    #[inline]
    pub fn v(&self, u: f64) -> f64 {
        (self.v)(u)
    }

    /// `V'(u)`.
    #[inline]
    pub fn dv(&self, u: f64) -> f64 {
        (self.dv)(u)
    }

    /// `V''(u)`.
    #[inline]
    pub fn d2v(&self, u: f64) -> f64 {
        (self.d2v)(u)
    }

    /// Period in `u` for periodic potentials (`2pi` for sine-Gordon).
    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn is_periodic(&self) -> bool {
        self.period.is_some()
    }

    /// Window scanned for wells and saddles.
    ///
    /// For periodic potentials this is one fundamental period; otherwise it
    /// must contain every critical point relevant to the requested orbits.
    pub fn search_domain(&self) -> (f64, f64) {
        match self.period {
            Some(p) => (0.0, p),
            None => self.domain,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Consistency checks on a sample grid.
    ///
    /// Derivative agreement is judged against `1e-6 * max(1, |exact|)` so
    /// that zero crossings of the derivatives do not inflate the relative
    /// error; stated periodicity must hold to `1e-12`.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.period {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidPotential(format!("period must be positive, got {p}")));
            }
        }
        let (lo, hi) = self.search_domain();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidPotential(format!("empty search domain [{lo}, {hi}]")));
        }

        let n = 101;
        for k in 0..n {
            let u = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let h = 1e-5 * u.abs().max(1.0);

            let fd_v = (self.v(u + h) - self.v(u - h)) / (2.0 * h);
            let dv = self.dv(u);
            if !(fd_v.is_finite() && dv.is_finite()) {
                return Err(Error::InvalidPotential(format!("non-finite values near u = {u}")));
            }
            if (fd_v - dv).abs() > 1e-6 * dv.abs().max(1.0) {
                return Err(Error::InvalidPotential(format!(
                    "dV is inconsistent with V near u = {u}: finite difference {fd_v}, stated {dv}"
                )));
            }

            let fd_dv = (self.dv(u + h) - self.dv(u - h)) / (2.0 * h);
            let d2v = self.d2v(u);
            if (fd_dv - d2v).abs() > 1e-6 * d2v.abs().max(1.0) {
                return Err(Error::InvalidPotential(format!(
                    "d2V is inconsistent with dV near u = {u}: finite difference {fd_dv}, stated {d2v}"
                )));
            }

            if let Some(p) = self.period {
                if (self.v(u + p) - self.v(u)).abs() > 1e-12 {
                    return Err(Error::InvalidPotential(format!(
                        "V is not {p}-periodic at u = {u}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        Potential::sine_gordon().validate().unwrap();
        Potential::phi4().validate().unwrap();
    }

    #[test]
    fn sine_gordon_values() {
        let p = Potential::sine_gordon();
        assert_eq!(p.v(0.0), 0.0);
        assert!((p.v(PI) - 2.0).abs() < 1e-15);
        assert!((p.d2v(PI) + 1.0).abs() < 1e-15);
        assert_eq!(p.period(), Some(2.0 * PI));
    }

    #[test]
    fn phi4_values() {
        let p = Potential::phi4();
        assert!((p.v(1.0) + 0.25).abs() < 1e-15);
        assert!((p.v(2.0f64.sqrt())).abs() < 1e-15);
        assert_eq!(p.dv(1.0), 0.0);
        assert!(!p.is_periodic());
    }

    #[test]
    fn inconsistent_derivative_rejected() {
        let r = Potential::new(
            "broken",
            |u| u * u,
            |u| 3.0 * u, // wrong: should be 2u
            |_| 2.0,
            None,
            (-2.0, 2.0),
        );
        assert!(matches!(r, Err(Error::InvalidPotential(_))));
    }

    #[test]
    fn wrong_period_rejected() {
        let r = Potential::new(
            "misdeclared",
            |u: f64| 1.0 - u.cos(),
            |u: f64| u.sin(),
            |u: f64| u.cos(),
            Some(3.0), // not a period of cos
            (0.0, 3.0),
        );
        assert!(matches!(r, Err(Error::InvalidPotential(_))));
    }
}
