//! Run configuration: flag values merged over an optional structured
//! config file, plus the text parsers shared by both sources.
//!
//! The file is TOML-shaped: top-level `command`, then `[problem]`,
//! `[scan]`, and `[output]` sections of `key = value` lines. Every field
//! is optional in both sources; command-line flags override file values,
//! and each command validates that what it needs is present.

use serde::Deserialize;

use wavetrain::potential::Potential;
use wavetrain::spectrum::Window;
use wavetrain::waves::Branch;

use crate::expr::Expr;
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub potential: Option<String>,
    pub energy: Option<f64>,
    pub speed: Option<f64>,
    pub branch: Option<String>,
}

/// A scan field that may be written as a bare number or as a string
/// (ranges like `"4.2:5.4:0.005"` need the string form).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumberOrText {
    Number(f64),
    Text(String),
}

impl NumberOrText {
    pub fn into_text(self) -> String {
        match self {
            NumberOrText::Number(x) => x.to_string(),
            NumberOrText::Text(s) => s,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub theta: Option<NumberOrText>,
    pub window: Option<String>,
    pub grid: Option<String>,
    pub zeta: Option<String>,
    pub samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &str) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config '{path}': {e}")))?;
        toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("config '{path}': {e}")))
    }
}

/// Output format of an artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn parse_format(s: &str) -> Result<Format, CliError> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(CliError::validation(format!(
            "unknown format '{other}' (expected csv or json)"
        ))),
    }
}

/// Parses a potential name or an inline expression triple.
///
/// Named potentials: `sine-gordon`, `phi4`. An inline triple gives the
/// potential and its first two derivatives as expressions in `u`,
/// separated by semicolons, optionally followed by `period=<p>` and
/// `domain=<lo>,<hi>` segments:
///
/// ```text
/// 1-cos(u); sin(u); cos(u); period=6.283185307179586
/// ```
///
/// The triple is cross-checked for internal consistency by finite
/// differences before it is accepted.
pub fn parse_potential(s: &str) -> Result<Potential, CliError> {
    match s {
        "sine-gordon" => return Ok(Potential::sine_gordon()),
        "phi4" => return Ok(Potential::phi4()),
        _ => {}
    }
    if !s.contains(';') {
        return Err(CliError::validation(format!(
            "unknown potential '{s}' (expected sine-gordon, phi4, or an inline \
             expression triple \"V; V'; V''\")"
        )));
    }
    let segments: Vec<&str> = s.split(';').map(str::trim).collect();
    if segments.len() < 3 {
        return Err(CliError::validation(
            "an inline potential needs three expressions: V; V'; V''",
        ));
    }
    let parse_expr = |text: &str| {
        Expr::parse(text).map_err(|e| {
            CliError::validation(format!("potential expression '{text}': {e}"))
        })
    };
    let v = parse_expr(segments[0])?;
    let dv = parse_expr(segments[1])?;
    let d2v = parse_expr(segments[2])?;
    let mut period = None;
    let mut domain = (-10.0, 10.0);
    for seg in &segments[3..] {
        if let Some(value) = seg.strip_prefix("period=") {
            let p: f64 = value.trim().parse().map_err(|_| {
                CliError::validation(format!("malformed period '{value}'"))
            })?;
            period = Some(p);
        } else if let Some(value) = seg.strip_prefix("domain=") {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            let bad = || CliError::validation(format!("malformed domain '{value}' (expected lo,hi)"));
            if parts.len() != 2 {
                return Err(bad());
            }
            let lo: f64 = parts[0].parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].parse().map_err(|_| bad())?;
            domain = (lo, hi);
        } else if !seg.is_empty() {
            return Err(CliError::validation(format!(
                "unknown potential option '{seg}' (expected period=... or domain=...)"
            )));
        }
    }
    Potential::new(
        "inline",
        move |u| v.eval(u),
        move |u| dv.eval(u),
        move |u| d2v.eval(u),
        period,
        domain,
    )
    .map_err(|e| CliError::validation(format!("inline potential rejected: {e}")))
}

pub fn parse_branch(s: &str) -> Result<Branch, CliError> {
    match s {
        "rot+" => Ok(Branch::RotationPositive),
        "rot-" => Ok(Branch::RotationNegative),
        "left-well" => Ok(Branch::LeftWell),
        "right-well" => Ok(Branch::RightWell),
        "outer" => Ok(Branch::OuterOrbit),
        other => Err(CliError::validation(format!(
            "unknown branch '{other}' (expected rot+, rot-, left-well, right-well, or outer)"
        ))),
    }
}

/// Default branch when none is configured: positive rotation for periodic
/// potentials, the leftmost well otherwise.
pub fn default_branch(potential: &Potential) -> Branch {
    if potential.is_periodic() {
        Branch::RotationPositive
    } else {
        Branch::LeftWell
    }
}

/// A phase given either as one value or as a `start:stop:step` range.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSpec {
    Scalar(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl ThetaSpec {
    /// The phases this spec enumerates, inclusive of `stop` when it lies
    /// on the step lattice (within a relative half-ulp-scale slack).
    pub fn grid(&self) -> Vec<f64> {
        match *self {
            ThetaSpec::Scalar(x) => vec![x],
            ThetaSpec::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| start + k as f64 * step).collect()
            }
        }
    }
}

pub fn parse_theta(s: &str) -> Result<ThetaSpec, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |text: &str, what: &str| -> Result<f64, CliError> {
        text.trim().parse().map_err(|_| {
            CliError::validation(format!("malformed {what} '{text}' in theta '{s}'"))
        })
    };
    match parts.len() {
        1 => {
            let x = num(parts[0], "phase")?;
            if !x.is_finite() {
                return Err(CliError::validation("theta must be finite"));
            }
            Ok(ThetaSpec::Scalar(x))
        }
        3 => {
            let start = num(parts[0], "range start")?;
            let stop = num(parts[1], "range stop")?;
            let step = num(parts[2], "range step")?;
            if !(start.is_finite() && stop.is_finite() && step > 0.0 && start <= stop) {
                return Err(CliError::validation(format!(
                    "theta range '{s}' must be finite with step > 0 and start <= stop"
                )));
            }
            Ok(ThetaSpec::Range { start, stop, step })
        }
        _ => Err(CliError::validation(format!(
            "theta '{s}' must be a number or start:stop:step"
        ))),
    }
}

/// Parses `re_min:re_max:im_min:im_max` into a scan window.
pub fn parse_window(s: &str) -> Result<Window, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(CliError::validation(format!(
            "window '{s}' must be re_min:re_max:im_min:im_max"
        )));
    }
    let mut vals = [0.0f64; 4];
    for (v, text) in vals.iter_mut().zip(&parts) {
        *v = text.trim().parse().map_err(|_| {
            CliError::validation(format!("malformed window bound '{text}' in '{s}'"))
        })?;
    }
    Window::new(vals[0], vals[1], vals[2], vals[3])
        .map_err(|e| CliError::validation(format!("window '{s}': {e}")))
}

/// Parses `NXxNY` into grid dimensions.
pub fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || {
        CliError::validation(format!(
            "grid '{s}' must be two positive integers like 256x256"
        ))
    };
    let (a, b) = s.split_once('x').ok_or_else(bad)?;
    let nx: usize = a.trim().parse().map_err(|_| bad())?;
    let ny: usize = b.trim().parse().map_err(|_| bad())?;
    if nx < 2 || ny < 2 {
        return Err(bad());
    }
    Ok((nx, ny))
}

/// Parses `lo:hi` into the abscissa interval searched for characteristic
/// values.
pub fn parse_zeta(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || {
        CliError::validation(format!(
            "zeta interval '{s}' must be lo:hi with finite lo < hi"
        ))
    };
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_potentials_and_triples_parse() {
        assert!(parse_potential("sine-gordon").is_ok());
        assert!(parse_potential("phi4").is_ok());
        let custom = parse_potential("1 - cos(u); sin(u); cos(u); period=6.283185307179586")
            .expect("inline pendulum");
        assert!((custom.v(1.0) - (1.0 - 1.0f64.cos())).abs() < 1e-15);
        assert!(custom.is_periodic());
        assert!(parse_potential("bogus").is_err());
        // an inconsistent derivative is caught by the cross-check
        assert!(parse_potential("1 - cos(u); cos(u); cos(u)").is_err());
    }

    #[test]
    fn theta_specs_enumerate_inclusive_lattices() {
        assert_eq!(parse_theta("3.4").unwrap(), ThetaSpec::Scalar(3.4));
        let g = parse_theta("4.2:5.4:0.005").unwrap().grid();
        assert_eq!(g.len(), 241);
        assert_eq!(g[0], 4.2);
        assert!((g[240] - 5.4).abs() < 1e-12);
        assert!(parse_theta("1:2").is_err());
        assert!(parse_theta("2:1:0.1").is_err());
        assert!(parse_theta("1:2:-0.1").is_err());
    }

    #[test]
    fn windows_grids_and_intervals_parse() {
        let w = parse_window("-2:2:-0.5:0.5").unwrap();
        assert_eq!(w.re_range(), (-2.0, 2.0));
        assert_eq!(w.im_range(), (-0.5, 0.5));
        assert!(parse_window("1:2:3").is_err());
        assert!(parse_window("2:1:0:1").is_err());
        assert_eq!(parse_grid("256x128").unwrap(), (256, 128));
        assert!(parse_grid("256").is_err());
        assert!(parse_grid("1x8").is_err());
        assert_eq!(parse_zeta("0.05:2.8").unwrap(), (0.05, 2.8));
        assert!(parse_zeta("3:1").is_err());
    }

    #[test]
    fn config_files_parse_with_sections() {
        let cfg: FileConfig = toml::from_str(
            r#"
command = "sweep"

[problem]
potential = "sine-gordon"
energy = 6.0
speed = 1.45

[scan]
theta = "4.2:5.4:0.005"
zeta = "0.05:2.8"

[output]
path = "tracks.csv"
format = "csv"
"#,
        )
        .unwrap();
        assert_eq!(cfg.command.as_deref(), Some("sweep"));
        assert_eq!(cfg.problem.energy, Some(6.0));
        assert!(matches!(cfg.scan.theta, Some(NumberOrText::Text(_))));
        let bare: FileConfig = toml::from_str("[scan]\ntheta = 3.4\n").unwrap();
        match bare.scan.theta {
            Some(NumberOrText::Number(x)) => assert_eq!(x, 3.4),
            other => panic!("expected a bare number, got {other:?}"),
        }
        assert!(toml::from_str::<FileConfig>("[problem]\nbogus = 1\n").is_err());
    }
}
