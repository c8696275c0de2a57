//! Empirical constant of the weighted bilinear gain estimate on a small
//! seeded ensemble, with its drift under sphere-order doubling.
//!
//! Arguments: ensemble size and points per axis, defaults 8 and 9.

use boltzgain::discretization::{SphereKind, SphereRule, VelocityGrid};
use boltzgain::estimates::{empirical_constant, gaussian_mixture_ensemble, ExponentTriple};
use boltzgain::operators::{AngularKernel, CrossSection, OperatorParams};

fn main() -> boltzgain::Result<()> {
    let size: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let n: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(9);
    let params = OperatorParams::new(
        CrossSection::new(1.0, AngularKernel::Constant(1.0))?,
        SphereRule::build(SphereKind::ProductGauss, 6)?,
        VelocityGrid::new(8.0, n)?,
    );
    let triple = ExponentTriple::from_young(1.3, 2.2, 3.0, 1.0)?;
    let ensemble = gaussian_mixture_ensemble(size, 20240611);
    let report = empirical_constant(&triple, &ensemble, &params, &VelocityGrid::new(8.0, 49)?, 20240611)?;
    for s in &report.samples {
        println!("sample {:2}: lhs {:.4e} rhs {:.4e} ratio {:?}", s.sample_id, s.lhs, s.rhs, s.ratio);
    }
    println!("max ratio {:.4e}, drift under doubling {:?}", report.max_ratio, report.refinement_drift);
    Ok(())
}
