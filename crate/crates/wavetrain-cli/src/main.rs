//! `wavetrain`: spectra of periodic travelling waves in nonlinear
//! Klein-Gordon equations.
//!
//! Subcommands sample wave profiles (`wave`), rasterise phase portraits
//! (`portrait`), scan spectral windows (`spectrum`), compute signatures of
//! real characteristic values (`krein`), and sweep the Floquet phase for
//! collision events (`sweep`). Settings come from command-line flags
//! merged over an optional config file; artifacts are CSV or JSON with
//! all numbers printed to 17 significant digits.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a numerical
//! operation fails (the failing operation is named on the error stream).

use std::fmt;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod emit;
mod expr;
mod run;

/// Error with its process exit code: validation problems exit 2,
/// numerical failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical { operation: String, detail: String },
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> CliError {
        CliError::Validation(message.into())
    }

    pub fn numerical(operation: &str, detail: impl ToString) -> CliError {
        CliError::Numerical {
            operation: operation.into(),
            detail: detail.to_string(),
        }
    }

    /// Classifies a library error: inadmissible problem descriptions are
    /// validation failures; breakdowns inside an admissible computation
    /// are numerical failures attributed to `operation`.
    pub fn from_library(operation: &str, e: wavetrain::Error) -> CliError {
        use wavetrain::Error::*;
        match e {
            InvalidPotential(_)
            | InvalidParameters(_)
            | NoOrbit { .. }
            | SeparatrixDivergence { .. }
            | RotationalUnavailable(_) => CliError::Validation(e.to_string()),
            other => CliError::numerical(operation, other),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Numerical { operation, detail } => {
                write!(f, "{operation} failed: {detail}")
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "wavetrain",
    version,
    about = "Floquet spectra and signatures of periodic travelling waves",
    after_help = "Any setting may also come from a config file (see --config); \
                  command-line flags take precedence. Set WAVETRAIN_THREADS to \
                  bound the worker-thread count."
)]
struct Cli {
    /// Config file with [problem], [scan], and [output] sections.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<String>,

    /// Run the built-in numerical self-checks and exit.
    #[arg(long)]
    selftest: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one travelling-wave profile over a period.
    Wave(WaveArgs),
    /// Rasterise energy level curves in the (u, u') plane.
    Portrait(PortraitArgs),
    /// Scan a complex window for Floquet spectrum.
    Spectrum(SpectrumArgs),
    /// Real characteristic values and their signatures at fixed phases.
    Krein(KreinArgs),
    /// Sweep the Floquet phase and report collision events.
    Sweep(SweepArgs),
}

#[derive(Args, Default)]
struct ProblemArgs {
    /// Potential: sine-gordon, phi4, or an inline "V; V'; V''" triple.
    #[arg(long, value_name = "NAME|EXPRS")]
    potential: Option<String>,

    /// Orbit energy E.
    #[arg(short = 'E', long, value_name = "E", allow_negative_numbers = true)]
    energy: Option<f64>,

    /// Wave speed c.
    #[arg(short = 'c', long, value_name = "C", allow_negative_numbers = true)]
    speed: Option<f64>,

    /// Orbit branch: rot+, rot-, left-well, right-well, or outer.
    #[arg(long, value_name = "BRANCH")]
    branch: Option<String>,
}

#[derive(Args, Default)]
struct OutputArgs {
    /// Output file; '-' (the default) writes to standard output.
    #[arg(short = 'o', long, value_name = "PATH")]
    output: Option<String>,

    /// Artifact format: csv or json.
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
}

#[derive(Args, Default)]
struct WaveArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Number of profile samples over one period.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Default)]
struct PortraitArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Plane window u_min:u_max:w_min:w_max.
    #[arg(long, value_name = "WIN", allow_hyphen_values = true)]
    window: Option<String>,

    /// Grid size NXxNY (default 256x256).
    #[arg(long, value_name = "GRID")]
    grid: Option<String>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Default)]
struct SpectrumArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Spectral window re_min:re_max:im_min:im_max.
    #[arg(long, value_name = "WIN", allow_hyphen_values = true)]
    window: Option<String>,

    /// Grid size NXxNY (default 256x256).
    #[arg(long, value_name = "GRID")]
    grid: Option<String>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Default)]
struct KreinArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Floquet phase: one value or start:stop:step.
    #[arg(long, value_name = "THETA", allow_hyphen_values = true)]
    theta: Option<String>,

    /// Abscissa interval lo:hi searched for characteristic values.
    #[arg(long, value_name = "LO:HI")]
    zeta: Option<String>,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Default)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Phase range start:stop:step.
    #[arg(long, value_name = "RANGE")]
    theta: Option<String>,

    /// Abscissa interval lo:hi searched for characteristic values.
    #[arg(long, value_name = "LO:HI")]
    zeta: Option<String>,

    #[command(flatten)]
    output: OutputArgs,
}


fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and exit 0; usage errors
            // print to stderr and exit 2, the validation code.
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
