//! Sensitivity of the sandwich solution to its initial data: the weighted
//! sup distance of two solutions over the run, relative to that of the data.

use boltzgain::discretization::{Bump, ClosedForm, SphereKind, SphereRule, VelocityGrid};
use boltzgain::operators::{AngularKernel, CrossSection, Mode, OperatorParams};
use boltzgain::solver::{continuity_probe, SolverSettings, TimeMesh};
use boltzgain::Vec3;

fn main() -> boltzgain::Result<()> {
    let params = OperatorParams::new(
        CrossSection::new(1.0, AngularKernel::Constant(1.0))?,
        SphereRule::build(SphereKind::ProductGauss, 4)?,
        VelocityGrid::new(8.0, 9)?,
    );
    let data = |shift: f64| {
        ClosedForm::mixture(vec![
            Bump::new(1e-3, Vec3::new(1.0 + shift, 0.0, 0.0), 1.0)?,
            Bump::new(8e-4, Vec3::new(-1.0, 0.5, 0.0), 1.5)?,
        ])
    };
    let mesh = TimeMesh::new(1.0, 4)?;
    for shift in [0.1, 0.01] {
        let ratio = continuity_probe(
            &data(0.0)?.into(),
            &data(shift)?.into(),
            &params,
            mesh,
            Mode::QUANTUM,
            &SolverSettings::default(),
            9.1,
        )?;
        println!("shift {shift}: sup distance ratio {ratio:.4}");
    }
    Ok(())
}
