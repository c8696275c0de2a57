//! Runs the monotone sandwich on a small two-bump mixture and prints the
//! iteration trace and the conservation drift.
//!
//! Arguments: points per axis, time steps, sphere order, `classical` or
//! `quantum`. Defaults are 13, 16, 6, quantum.

use std::time::Instant;

use boltzgain::discretization::{Bump, ClosedForm, SphereKind, SphereRule, VelocityGrid};
use boltzgain::operators::{AngularKernel, CrossSection, Mode, OperatorParams};
use boltzgain::solver::{ks_solve, positivity_and_moment_report, SolverSettings, TimeMesh};
use boltzgain::Vec3;

fn main() -> boltzgain::Result<()> {
    let arg = |i: usize| std::env::args().nth(i);
    let n: usize = arg(1).and_then(|s| s.parse().ok()).unwrap_or(13);
    let steps: usize = arg(2).and_then(|s| s.parse().ok()).unwrap_or(16);
    let order: usize = arg(3).and_then(|s| s.parse().ok()).unwrap_or(6);
    let mode = match arg(4).as_deref() {
        Some("classical") => Mode::Classical,
        _ => Mode::QUANTUM,
    };
    let params = OperatorParams::new(
        CrossSection::new(1.0, AngularKernel::Constant(1.0))?,
        SphereRule::build(SphereKind::ProductGauss, order)?,
        VelocityGrid::new(8.0, n)?,
    );
    let f0 = ClosedForm::mixture(vec![
        Bump::new(1e-3, Vec3::new(1.0, 0.0, 0.0), 1.0)?,
        Bump::new(8e-4, Vec3::new(-1.0, 0.5, 0.0), 1.5)?,
    ])?;
    let start = Instant::now();
    let out = ks_solve(&f0.into(), &params, TimeMesh::new(1.0, steps)?, mode, &SolverSettings::default())?;
    println!("gain-only sweeps: {}", out.gain_only_sweeps);
    for row in out.trace() {
        println!(
            "n={:2} gap={:.3e} nesting={:.3e} min={:.3e}",
            row.n, row.gap_sup, row.nesting_violation, row.min_value
        );
    }
    let drift = out.solution.conservation_drift();
    println!("drift: mass {:.3e} momentum {:.3e} energy {:.3e}", drift.mass, drift.momentum, drift.energy);
    let report = positivity_and_moment_report(&out.solution, 9.1)?;
    println!("moment growth {:.6} nonnegative {}", report.max_growth, report.nonnegative);
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
