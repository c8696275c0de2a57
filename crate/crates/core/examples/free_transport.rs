//! Dispersive decay of a transported Gaussian and the time-weighted norm of
//! its trajectory.

use boltzgain::transport::{decay_check, transport_trajectory, x_norm_ledger, SpaceVelocityProfile, XNormParams};

fn main() -> boltzgain::Result<()> {
    let unit = SpaceVelocityProfile::unit();
    for (p, r) in [(f64::INFINITY, 1.0), (6.0, 2.0)] {
        for row in decay_check(&unit, p, r, &[0.5, 1.0, 2.0, 4.0, 8.0])? {
            println!("(p, r) = ({p}, {r}) t = {:4}: norm {:.6e} bound {:.6e} ratio {:.4}", row.t, row.lhs, row.bound, row.ratio);
        }
    }
    let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
    let ledger = x_norm_ledger(&transport_trajectory(&unit.scaled(1e-3), &times), &XNormParams::new(9.1, 5e-3)?)?;
    for c in &ledger.per_time {
        println!("t = {:4}: sup {:.3e} L6 {:.3e} dispersive {:.3e} {:.3e} moment {:.3e}", c.t, c.sup, c.l6, c.dispersive_l6, c.dispersive_sup, c.moment_l1);
    }
    println!("norm of the trajectory {:.4e}", ledger.value);
    Ok(())
}
