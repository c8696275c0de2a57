//! Times a whole-grid gain/frequency sweep and prints its conservation defect.

use std::time::Instant;

use boltzgain::discretization::{Bump, ClosedForm, GridData, SphereKind, SphereRule, VelocityGrid};
use boltzgain::operators::{conservation_defect_values, AngularKernel, CrossSection, GridSweep, Mode, OperatorParams};
use boltzgain::Vec3;

fn main() -> boltzgain::Result<()> {
    let lanes: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let n: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(13);
    let grid = VelocityGrid::new(8.0, n)?;
    let params = OperatorParams::new(
        CrossSection::new(1.0, AngularKernel::Constant(1.0))?,
        SphereRule::build(SphereKind::ProductGauss, 6)?,
        grid,
    );
    let f0 = ClosedForm::mixture(vec![
        Bump::new(1e-3, Vec3::new(1.0, 0.0, 0.0), 1.0)?,
        Bump::new(8e-4, Vec3::new(-1.0, 0.5, 0.0), 1.5)?,
    ])?;
    let data = GridData::sample(grid, &f0);
    let columns: Vec<&[f64]> = (0..lanes).map(|_| data.values()).collect();
    let sweep = GridSweep::new(grid, data.envelope(), &columns)?;
    for mode in [Mode::Classical, Mode::QUANTUM] {
        let t = Instant::now();
        let out = sweep.run(&params, mode)?;
        let elapsed = t.elapsed();
        let q: Vec<f64> = out
            .gain_lane(0)
            .iter()
            .zip(out.frequency_lane(0))
            .zip(data.values())
            .map(|((g, r), f)| g - f * r)
            .collect();
        let d = conservation_defect_values(&q, &grid);
        println!("{mode:?}: N={n} lanes={lanes} {elapsed:.2?} defect={d:?}");
    }
    Ok(())
}
