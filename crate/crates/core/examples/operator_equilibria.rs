//! Evaluates the full collision operator pointwise on equilibria: a shifted
//! Maxwellian in classical mode and a Bose-Einstein profile in quantum mode.
//! Both should vanish to rounding relative to the gain.

use boltzgain::discretization::{ClosedForm, Distribution, SphereKind, SphereRule, VelocityGrid};
use boltzgain::operators::{full_q, AngularKernel, CrossSection, Mode, OperatorParams};
use boltzgain::Vec3;

fn main() -> boltzgain::Result<()> {
    let params = OperatorParams::new(
        CrossSection::new(1.0, AngularKernel::Constant(1.0))?,
        SphereRule::build(SphereKind::ProductGauss, 6)?,
        VelocityGrid::new(8.0, 13)?,
    );
    let cases: [(&str, Distribution, Mode); 2] = [
        ("maxwellian", ClosedForm::maxwellian(1.0, Vec3::new(0.5, -0.2, 0.0), 1.2)?.into(), Mode::Classical),
        ("bose-einstein", ClosedForm::bose_einstein(0.5, 1.0)?.into(), Mode::QUANTUM),
    ];
    for (name, f, mode) in &cases {
        for v in [Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.5, 2.0, 0.5)] {
            let (q, gain, freq) = full_q(f, &params, v, *mode);
            println!("{name:14} v = {v:?}: Q = {q:+.2e}, gain = {gain:.4e}, frequency = {freq:.4e}");
        }
    }
    Ok(())
}
