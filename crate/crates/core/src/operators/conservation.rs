use serde::Serialize;

use crate::discretization::{compensated_sum, Distribution, VelocityGrid};
use crate::error::Result;
use crate::geometry::Vec3;
use crate::operators::{ClosedSweep, GridSweep, Mode, OperatorParams};

/// Discrete production of mass, momentum and energy, `sum h^3 Q[f] phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationDefect {
    pub mass: f64,
    pub momentum: Vec3,
    pub energy: f64,
}

/// Collision invariants integrated against nodal values of `Q[f]`.
pub fn conservation_defect_values(q: &[f64], grid: &VelocityGrid) -> ConservationDefect {
    let h3 = grid.cell_volume();
    let moment = |phi: &dyn Fn(Vec3) -> f64| {
        h3 * compensated_sum(q.iter().enumerate().map(|(i, x)| x * phi(grid.node(i))))
    };
    ConservationDefect {
        mass: moment(&|_| 1.0),
        momentum: Vec3::new(moment(&|v| v[0]), moment(&|v| v[1]), moment(&|v| v[2])),
        energy: moment(&|v| v.norm_sq()),
    }
}

/// `Q[f]` on every node of the operator grid.
pub fn collision_operator_on_grid(f: &Distribution, params: &OperatorParams, mode: Mode) -> Result<Vec<f64>> {
    let (gain, freq, fv) = match f {
        Distribution::Grid(g) if g.grid() == &params.grid => {
            let out = GridSweep::new(params.grid, g.envelope(), &[g.values()])?.run(params, mode)?;
            (out.gain, out.frequency, g.values().to_vec())
        }
        Distribution::Closed(c) => {
            let out = ClosedSweep::new(&[(c.clone(), c.clone())])?.run(params);
            let (g, r) = out.nordheim_lane(0, mode);
            (g, r, out.f_nodes)
        }
        Distribution::Grid(g) => {
            let values = f.nodal_values(&params.grid);
            let out = GridSweep::new(params.grid, g.envelope(), &[&values])?.run(params, mode)?;
            (out.gain, out.frequency, values)
        }
    };
    Ok(gain.iter().zip(&freq).zip(&fv).map(|((g, r), f)| g - f * r).collect())
}

pub fn conservation_defect(f: &Distribution, params: &OperatorParams, mode: Mode) -> Result<ConservationDefect> {
    let q = collision_operator_on_grid(f, params, mode)?;
    Ok(conservation_defect_values(&q, &params.grid))
}
