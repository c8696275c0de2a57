//! One binary collision through the R-maps, the involution applied twice,
//! and the sampled invariant report.

use boltzgain::geometry::{check_invariants, involution_t, post_collision};
use boltzgain::{UnitVector, Vec3};

fn main() -> boltzgain::Result<()> {
    let v = Vec3::new(1.0, -0.5, 2.0);
    let v1 = Vec3::new(-0.3, 0.8, 0.1);
    let sigma = UnitVector::from_angles(0.4, 1.1);
    let c = post_collision(v, v1, sigma);
    println!("v* = {:?}\nv1* = {:?}", c.v_star, c.v1_star);
    println!(
        "residuals: momentum {:.1e} energy {:.1e} relative speed {:.1e}",
        c.momentum_residual(),
        c.energy_residual(),
        c.relative_speed_residual()
    );

    let (a, b, eta) = involution_t(v, v1, sigma)?;
    let (v2, v12, sigma2) = involution_t(a, b, eta)?;
    println!(
        "T(T(x)) - x: {:.1e} {:.1e} {:.1e}",
        (v2 - v).max_abs(),
        (v12 - v1).max_abs(),
        (sigma2.vec() - sigma.vec()).max_abs()
    );

    let report = check_invariants(10_000, 100, 1);
    println!("{report:#?}\npasses: {}", report.passes());
    Ok(())
}
