//! Command execution: merges flags with the config file, runs the library,
//! and emits artifacts.

use std::f64::consts::PI;

use num_complex::Complex64;

use wavetrain::evans::{evans_d1, evans_d2, krein_signature, EvansContext};
use wavetrain::hill::integrate_hill_variational;
use wavetrain::potential::Potential;
use wavetrain::reference;
use wavetrain::spectrum::{
    real_characteristic_values, spectrum_scan, sweep_theta, DEFAULT_IMAG_TOL,
};
use wavetrain::waves::{phase_portrait, wave_profile, Branch, WaveParameters, WaveProfile};

use crate::config::{
    default_branch, parse_branch, parse_format, parse_grid, parse_potential, parse_theta,
    parse_window, parse_zeta, FileConfig, Format, ThetaSpec,
};
use crate::emit::{self, Cell, Table};
use crate::{
    Cli, CliError, Command, KreinArgs, OutputArgs, PortraitArgs, ProblemArgs, SpectrumArgs,
    SweepArgs, WaveArgs,
};

/// Profile sample count used by the spectral commands. The monodromy
/// integrators re-solve the wave equation alongside the perturbation, so
/// this only sizes the carried sample table, not the accuracy.
const PROFILE_SAMPLES: usize = 33;

/// Seed-grid cells for the characteristic-value search.
const SEED_CELLS: usize = 2048;

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("WAVETRAIN_THREADS") {
        let n: usize = raw.trim().parse().map_err(|_| {
            CliError::validation(format!("WAVETRAIN_THREADS must be a positive integer, got '{raw}'"))
        })?;
        if n == 0 {
            return Err(CliError::validation(
                "WAVETRAIN_THREADS must be a positive integer",
            ));
        }
        // Ignore the error from re-initialising an already-built pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    if cli.selftest {
        return selftest();
    }

    let command = match cli.command {
        Some(cmd) => cmd,
        None => match file.command.as_deref() {
            Some(name) => command_from_name(name)?,
            None => {
                return Err(CliError::validation(
                    "no command given: pass a subcommand or set `command` in the config file \
                     (see --help)",
                ))
            }
        },
    };

    match command {
        Command::Wave(args) => cmd_wave(args, &file),
        Command::Portrait(args) => cmd_portrait(args, &file),
        Command::Spectrum(args) => cmd_spectrum(args, &file),
        Command::Krein(args) => cmd_krein(args, &file),
        Command::Sweep(args) => cmd_sweep(args, &file),
    }
}

fn command_from_name(name: &str) -> Result<Command, CliError> {
    match name {
        "wave" => Ok(Command::Wave(WaveArgs::default())),
        "portrait" => Ok(Command::Portrait(PortraitArgs::default())),
        "spectrum" => Ok(Command::Spectrum(SpectrumArgs::default())),
        "krein" => Ok(Command::Krein(KreinArgs::default())),
        "sweep" => Ok(Command::Sweep(SweepArgs::default())),
        other => Err(CliError::validation(format!(
            "unknown command '{other}' in config file (expected wave, portrait, spectrum, \
             krein, or sweep)"
        ))),
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::validation(format!("missing {what}: pass the flag or set it in the config file"))
    })
}

/// Resolved problem description: flags override the `[problem]` section.
fn resolve_problem(
    args: &ProblemArgs,
    file: &FileConfig,
) -> Result<(Potential, f64, f64, Branch), CliError> {
    let potential_text = require(
        args.potential.clone().or_else(|| file.problem.potential.clone()),
        "--potential",
    )?;
    let potential = parse_potential(&potential_text)?;
    let energy = require(args.energy.or(file.problem.energy), "--energy (-E)")?;
    let speed = require(args.speed.or(file.problem.speed), "--speed (-c)")?;
    let branch = match args.branch.clone().or_else(|| file.problem.branch.clone()) {
        Some(name) => parse_branch(&name)?,
        None => default_branch(&potential),
    };
    Ok((potential, energy, speed, branch))
}

fn resolve_output(args: &OutputArgs, file: &FileConfig) -> Result<(String, Format), CliError> {
    let path = args
        .output
        .clone()
        .or_else(|| file.output.path.clone())
        .unwrap_or_else(|| "-".into());
    let format = match args.format.clone().or_else(|| file.output.format.clone()) {
        Some(text) => parse_format(&text)?,
        None => Format::Csv,
    };
    Ok((path, format))
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

fn build_profile(
    potential: Potential,
    energy: f64,
    speed: f64,
    branch: Branch,
    n_samples: usize,
) -> Result<WaveProfile, CliError> {
    let params = WaveParameters::new(potential, energy, speed, branch)
        .map_err(|e| CliError::from_library("wave setup", e))?;
    wave_profile(&params, n_samples).map_err(|e| CliError::from_library("wave integration", e))
}

fn cmd_wave(args: WaveArgs, file: &FileConfig) -> Result<(), CliError> {
    let (potential, energy, speed, branch) = resolve_problem(&args.problem, file)?;
    let n_samples = args.samples.or(file.scan.samples).unwrap_or(513);
    let profile = build_profile(potential, energy, speed, branch, n_samples)?;
    let rows = profile
        .samples()
        .iter()
        .map(|s| vec![Cell::Num(s.z), Cell::Num(s.u), Cell::Num(s.du)])
        .collect();
    let table = Table { columns: &["z", "u", "du"], rows };
    let (path, format) = resolve_output(&args.output, file)?;
    emit::write_artifact(&path, &render(&table, format))
}

fn cmd_portrait(args: PortraitArgs, file: &FileConfig) -> Result<(), CliError> {
    let (potential, energy, speed, _branch) = resolve_problem(&args.problem, file)?;
    let window_text = require(
        args.window.clone().or_else(|| file.scan.window.clone()),
        "--window",
    )?;
    let window = parse_window(&window_text)?;
    let grid_text = args
        .grid
        .clone()
        .or_else(|| file.scan.grid.clone())
        .unwrap_or_else(|| "256x256".into());
    let grid = parse_grid(&grid_text)?;
    let curves = phase_portrait(
        &potential,
        speed,
        &[energy],
        (window.re_range(), window.im_range()),
        grid,
    )
    .map_err(|e| CliError::from_library("phase portrait", e))?;
    let mut rows = Vec::new();
    for curve in &curves {
        for &(u, w) in &curve.points {
            rows.push(vec![
                Cell::Num(u),
                Cell::Num(w),
                Cell::Num(curve.energy),
                Cell::Int(curve.is_separatrix as i64),
            ]);
        }
    }
    let table = Table { columns: &["u", "du", "energy", "is_separatrix"], rows };
    let (path, format) = resolve_output(&args.output, file)?;
    emit::write_artifact(&path, &render(&table, format))
}

fn cmd_spectrum(args: SpectrumArgs, file: &FileConfig) -> Result<(), CliError> {
    let (potential, energy, speed, branch) = resolve_problem(&args.problem, file)?;
    let window_text = require(
        args.window.clone().or_else(|| file.scan.window.clone()),
        "--window",
    )?;
    let window = parse_window(&window_text)?;
    let grid_text = args
        .grid
        .clone()
        .or_else(|| file.scan.grid.clone())
        .unwrap_or_else(|| "256x256".into());
    let grid = parse_grid(&grid_text)?;
    let profile = build_profile(potential, energy, speed, branch, PROFILE_SAMPLES)?;
    let report = spectrum_scan(&profile, &window, grid, DEFAULT_IMAG_TOL)
        .map_err(|e| CliError::from_library("spectrum scan", e))?;
    if report.empty_window {
        eprintln!("note: no spectrum found inside the window");
    }
    let rows = report
        .points
        .iter()
        .map(|p| {
            vec![
                Cell::Num(p.lambda.re),
                Cell::Num(p.lambda.im),
                Cell::Num(p.theta),
                Cell::Num(p.residual),
            ]
        })
        .collect();
    let table = Table {
        columns: &["re_lambda", "im_lambda", "theta", "residual"],
        rows,
    };
    let (path, format) = resolve_output(&args.output, file)?;
    emit::write_artifact(&path, &render(&table, format))
}

fn cmd_krein(args: KreinArgs, file: &FileConfig) -> Result<(), CliError> {
    let (potential, energy, speed, branch) = resolve_problem(&args.problem, file)?;
    let theta_text = require(
        args.theta
            .clone()
            .or_else(|| file.scan.theta.clone().map(|t| t.into_text())),
        "--theta",
    )?;
    let theta_spec = parse_theta(&theta_text)?;
    let zeta_text = args
        .zeta
        .clone()
        .or_else(|| file.scan.zeta.clone())
        .unwrap_or_else(|| "0.001:3".into());
    let interval = parse_zeta(&zeta_text)?;
    let profile = build_profile(potential, energy, speed, branch, PROFILE_SAMPLES)?;

    let mut rows = Vec::new();
    for theta in theta_spec.grid() {
        let ctx = EvansContext::new(&profile, theta);
        let roots = real_characteristic_values(&ctx, interval, SEED_CELLS)
            .map_err(|e| CliError::from_library("characteristic-value search", e))?;
        for root in roots {
            // Signature cells stay empty where simplicity cannot be
            // certified (collisions, zeta = 0, suspected tangencies).
            let (kappa, mu) = if root.suspected_non_simple {
                (Cell::Empty, Cell::Empty)
            } else {
                match krein_signature(&ctx, root.zeta0) {
                    Ok(sig) => (Cell::Int(sig.kappa as i64), Cell::Num(sig.mu_prime)),
                    Err(
                        wavetrain::Error::NonSimple { .. }
                        | wavetrain::Error::ZeroCharacteristicValue
                        | wavetrain::Error::NotACharacteristicValue { .. },
                    ) => (Cell::Empty, Cell::Empty),
                    Err(e) => return Err(CliError::from_library("signature evaluation", e)),
                }
            };
            rows.push(vec![Cell::Num(root.zeta0), kappa, mu, Cell::Num(theta)]);
        }
    }
    let table = Table {
        columns: &["zeta0", "kappa", "mu_prime", "theta"],
        rows,
    };
    let (path, format) = resolve_output(&args.output, file)?;
    emit::write_artifact(&path, &render(&table, format))
}

fn cmd_sweep(args: SweepArgs, file: &FileConfig) -> Result<(), CliError> {
    let (potential, energy, speed, branch) = resolve_problem(&args.problem, file)?;
    let theta_text = require(
        args.theta
            .clone()
            .or_else(|| file.scan.theta.clone().map(|t| t.into_text())),
        "--theta",
    )?;
    let theta_grid = match parse_theta(&theta_text)? {
        ThetaSpec::Range { .. } => parse_theta(&theta_text)?.grid(),
        ThetaSpec::Scalar(_) => {
            return Err(CliError::validation(
                "sweep needs a phase range start:stop:step".to_string(),
            ))
        }
    };
    let zeta_text = args
        .zeta
        .clone()
        .or_else(|| file.scan.zeta.clone())
        .unwrap_or_else(|| "0.001:3".into());
    let interval = parse_zeta(&zeta_text)?;
    let profile = build_profile(potential, energy, speed, branch, PROFILE_SAMPLES)?;

    let outcome = sweep_theta(&profile, &theta_grid, interval)
        .map_err(|e| CliError::from_library("phase sweep", e))?;
    for a in &outcome.ambiguities {
        eprintln!(
            "note: root matching was ambiguous near theta = {:.6}, zeta = {:.6}; \
             the affected track was cut",
            a.theta, a.zeta
        );
    }

    let mut rows = Vec::new();
    for (index, track) in outcome.tracks.iter().enumerate() {
        for p in &track.points {
            rows.push(vec![
                Cell::Int(index as i64),
                Cell::Num(p.theta),
                Cell::Num(p.zeta0),
                p.kappa.map_or(Cell::Empty, |k| Cell::Int(k as i64)),
            ]);
        }
    }
    let tracks = Table {
        columns: &["track", "theta", "zeta0", "kappa"],
        rows,
    };
    let events = emit::events_json(&outcome.events);

    let (path, format) = resolve_output(&args.output, file)?;
    match format {
        Format::Json => {
            // One JSON document carrying both parts.
            let doc = format!(
                "{{\n\"tracks\": {},\n\"events\": {}\n}}\n",
                tracks.to_json().trim_end(),
                events.trim_end()
            );
            emit::write_artifact(&path, &doc)
        }
        Format::Csv if path == "-" => {
            // Tracks as CSV, a blank line, then the event log.
            emit::write_artifact("-", &format!("{}\n{}", tracks.to_csv(), events))
        }
        Format::Csv => {
            emit::write_artifact(&path, &tracks.to_csv())?;
            emit::write_artifact(&emit::events_path(&path), &events)
        }
    }
}

// ---------------------------------------------------------------------------
// Self-checks
// ---------------------------------------------------------------------------

struct SelfCheck {
    failures: usize,
}

impl SelfCheck {
    fn report(&mut self, name: &str, ok: bool, detail: &str) {
        if ok {
            println!("selftest {name}: pass");
        } else {
            self.failures += 1;
            println!("selftest {name}: FAIL ({detail})");
        }
    }
}

/// Built-in numerical self-checks: constant-coefficient monodromy against
/// the closed form, pendulum rotation periods against complete elliptic
/// integrals, and the reduction identity tying the full linearisation
/// determinant to the scalar one.
fn selftest() -> Result<(), CliError> {
    let lib = |e: wavetrain::Error| CliError::numerical("selftest", e);
    let mut check = SelfCheck { failures: 0 };

    // Constant solution u = pi of the pendulum potential at c = 1/2:
    // the scalar problem has constant coefficient v + V''(pi)/(c^2-1).
    let shift = 4.0 / 3.0;
    let probes = [
        Complex64::new(0.3, 0.0),
        Complex64::new(-2.0, 0.0),
        Complex64::new(1.5, 2.5),
        Complex64::new(-0.7, -1.2),
    ];
    let mut trace_ok = true;
    let mut deriv_ok = true;
    let mut worst = 0.0f64;
    for period in [1.3, 2.7] {
        let eq = WaveProfile::equilibrium(Potential::sine_gordon(), 0.5, PI, period)
            .map_err(lib)?;
        for v in probes {
            let (m, variation) = integrate_hill_variational(&eq, v).map_err(lib)?;
            let closed = reference::constant_hill_trace(v + shift, period);
            let d_closed = reference::constant_hill_trace_derivative(v + shift, period);
            let trace_err = (m.trace() - closed).norm() / (1.0 + closed.norm());
            let d_trace = variation[0][0] + variation[1][1];
            let deriv_err = (d_trace - d_closed).norm() / (1.0 + d_closed.norm());
            worst = worst.max(trace_err).max(deriv_err);
            trace_ok &= trace_err <= 1e-7;
            deriv_ok &= deriv_err <= 1e-7;
        }
    }
    check.report(
        "constant-coefficient monodromy trace",
        trace_ok,
        &format!("worst relative error {worst:.3e}"),
    );
    check.report(
        "constant-coefficient trace derivative",
        deriv_ok,
        &format!("worst relative error {worst:.3e}"),
    );

    // Pendulum rotation periods against complete elliptic integrals.
    let sub = WaveParameters::new(Potential::sine_gordon(), -0.5, 0.5, Branch::RotationPositive)
        .and_then(|p| wave_profile(&p, 9))
        .map_err(lib)?;
    let sub_closed = reference::sine_gordon_rotation_period_subluminal(-0.5, 0.5);
    let sub_err = (sub.period() - sub_closed).abs() / sub_closed;
    check.report(
        "pendulum rotation period (subluminal)",
        sub_err <= 1e-8,
        &format!("relative error {sub_err:.3e}"),
    );

    let sup = WaveParameters::new(Potential::sine_gordon(), 6.0, 1.45, Branch::RotationPositive)
        .and_then(|p| wave_profile(&p, 9))
        .map_err(lib)?;
    let sup_closed = reference::sine_gordon_rotation_period_superluminal(6.0, 1.45);
    let sup_err = (sup.period() - sup_closed).abs() / sup_closed;
    check.report(
        "pendulum rotation period (superluminal)",
        sup_err <= 1e-8,
        &format!("relative error {sup_err:.3e}"),
    );

    // The full linearisation determinant reduces to the scalar one times
    // a rotation factor.
    let ctx = EvansContext::new(&sup, 0.7);
    let rate = ctx.rotation_rate();
    let mut ident_ok = true;
    let mut ident_worst = 0.0f64;
    for zeta in [
        Complex64::new(0.3, 0.2),
        Complex64::new(-1.1, 0.05),
        Complex64::new(2.2, -0.4),
    ] {
        let d1 = evans_d1(&ctx, zeta).map_err(lib)?;
        let d2 = evans_d2(&ctx, zeta).map_err(lib)?;
        let factor = (Complex64::i() * (rate * zeta - ctx.theta())).exp();
        let err = (d1 + factor * d2).norm() / (1.0 + d1.norm());
        ident_worst = ident_worst.max(err);
        ident_ok &= err <= 1e-7;
    }
    check.report(
        "determinant reduction identity",
        ident_ok,
        &format!("worst relative residual {ident_worst:.3e}"),
    );

    if check.failures > 0 {
        Err(CliError::numerical(
            "selftest",
            format!("{} check(s) failed", check.failures),
        ))
    } else {
        Ok(())
    }
}
