//! Scratch probe: determinant drift at hard spectral parameters.

use num_complex::Complex64;
use wavetrain::hill::{integrate_hill_with, integrate_linearised, HillCoefficient};
use wavetrain::potential::Potential;
use wavetrain::waves::{wave_profile, Branch, WaveParameters, WaveProfile};
use wavetrain::Integrator;

fn wave(potential: Potential, e: f64, c: f64, branch: Branch) -> WaveProfile {
    let params = WaveParameters::new(potential, e, c, branch).unwrap();
    wave_profile(&params, 33).unwrap()
}

fn main() {
    let sg_stable = wave(Potential::sine_gordon(), -0.5, 0.5, Branch::RotationPositive);
    let sg_lib = wave(Potential::sine_gordon(), 0.5, 0.5, Branch::LeftWell);
    let quartic = wave(Potential::phi4(), -0.082875, 0.95, Branch::LeftWell);

    let cases: Vec<(&str, &WaveProfile, Complex64)> = vec![
        ("stable  zeta=3i      ", &sg_stable, Complex64::new(0.0, 3.0)),
        ("stable  zeta=2+2i    ", &sg_stable, Complex64::new(2.0, 2.0)),
        ("stable  zeta=2i      ", &sg_stable, Complex64::new(0.0, 2.0)),
        ("sublib  zeta=1+0.6i  ", &sg_lib, Complex64::new(1.0, 0.6)),
        ("quartic zeta=1.4+0.2i", &quartic, Complex64::new(1.4, 0.2)),
    ];

    for rtol in [1e-12, 1e-13, 1e-14] {
        let integ = Integrator { atol: rtol * 0.01, rtol, max_steps: 4_000_000 };
        println!("rtol = {rtol:.0e}");
        for (name, profile, zeta) in &cases {
            let v = HillCoefficient::new(profile, *zeta, 0.0).v();
            let t0 = std::time::Instant::now();
            match integrate_hill_with(profile, v, &integ) {
                Ok(m) => println!(
                    "  {name}  drift {:.3e}   ({:.1} ms)",
                    m.det_drift(),
                    t0.elapsed().as_secs_f64() * 1e3
                ),
                Err(e) => println!("  {name}  ERR {e}"),
            }
        }
    }

    // Linearised system drift at the same corners, default tolerances.
    println!("linearised, default integrator");
    for (name, profile, zeta) in &cases {
        match integrate_linearised(profile, *zeta, 0.0) {
            Ok(m) => println!("  {name}  drift {:.3e}", m.det_drift()),
            Err(e) => println!("  {name}  ERR {e}"),
        }
    }
}
