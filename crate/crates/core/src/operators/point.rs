use crate::discretization::{Distribution, VelocityGrid};
use crate::geometry::{post_collision, UnitVector, Vec3};
use crate::operators::{chi, BranchFilter, Mode, OperatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainPiece {
    /// `2 f(v) int g(v*) h(v1*)`.
    G0,
    /// `2 int f(v1) g(v*) h(v1*)`.
    G1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossPiece {
    /// `2 f(v) int g(v1) h(v*)`.
    L0,
    /// `2 f(v) int g(v1) h(v1*)`.
    L1,
}

/// Visits every quadrature node `(v1, sigma)` of the collision integral at
/// `v` with the weight `2 h^3 w_sigma |u|^gamma b(u_hat . sigma) chi` and the
/// post-collisional pair. Nodes removed by `branch` are skipped.
///
/// The callback receives `(weight, v1 node index, v1, v*, v1*)`.
pub fn collision_sum<F>(params: &OperatorParams, v: Vec3, branch: BranchFilter, mut visit: F)
where
    F: FnMut(f64, usize, Vec3, Vec3, Vec3),
{
    let grid = &params.grid;
    let cs = &params.cross_section;
    let h3 = grid.cell_volume();
    for j in 0..grid.len() {
        let v1 = grid.node(j);
        let u = v - v1;
        let speed = u.norm();
        let u_hat = if speed > 0.0 {
            u / speed
        } else if cs.gamma() > 0.0 {
            continue;
        } else {
            UnitVector::E3.vec()
        };
        let kin = 2.0 * h3 * cs.speed_factor(speed);
        let energy = v.norm_sq() + v1.norm_sq();
        for (sigma, w) in params.sphere.iter() {
            let c = u_hat.dot(sigma.vec());
            let x = chi(c);
            if x == 0.0 {
                continue;
            }
            let col = post_collision(v, v1, sigma);
            let keep = match branch {
                BranchFilter::Full => true,
                BranchFilter::Q0 => col.v_star.norm_sq() >= 0.5 * energy,
                BranchFilter::Q1 => col.v1_star.norm_sq() >= 0.5 * energy,
            };
            if keep {
                visit(kin * w * cs.b(c) * x, j, v1, col.v_star, col.v1_star);
            }
        }
    }
}

fn at_node(d: &Distribution, grid: &VelocityGrid, idx: usize, v: Vec3) -> f64 {
    match d {
        Distribution::Grid(g) if g.grid() == grid => g.values()[idx],
        _ => d.eval(v),
    }
}

pub fn gain_cl(f: &Distribution, g: &Distribution, params: &OperatorParams, v: Vec3) -> f64 {
    let mut acc = 0.0;
    collision_sum(params, v, params.branch, |w, _, _, vs, v1s| acc += w * f.eval(vs) * g.eval(v1s));
    acc
}

pub fn frequency_cl(g: &Distribution, params: &OperatorParams, v: Vec3) -> f64 {
    let mut acc = 0.0;
    collision_sum(params, v, BranchFilter::Full, |w, j, v1, _, _| {
        acc += w * at_node(g, &params.grid, j, v1)
    });
    acc
}

pub fn loss_cl(f: &Distribution, g: &Distribution, params: &OperatorParams, v: Vec3) -> f64 {
    let fv = f.eval(v);
    if fv == 0.0 {
        return 0.0;
    }
    fv * frequency_cl(g, params, v)
}

pub fn gain_qu(
    f: &Distribution,
    g: &Distribution,
    h: &Distribution,
    params: &OperatorParams,
    v: Vec3,
    which: GainPiece,
) -> f64 {
    match which {
        GainPiece::G0 => {
            let fv = f.eval(v);
            if fv == 0.0 {
                return 0.0;
            }
            fv * gain_cl(g, h, params, v)
        }
        GainPiece::G1 => {
            let mut acc = 0.0;
            collision_sum(params, v, params.branch, |w, j, v1, vs, v1s| {
                acc += w * at_node(f, &params.grid, j, v1) * g.eval(vs) * h.eval(v1s)
            });
            acc
        }
    }
}

pub fn loss_qu(
    f: &Distribution,
    g: &Distribution,
    h: &Distribution,
    params: &OperatorParams,
    v: Vec3,
    which: LossPiece,
) -> f64 {
    let fv = f.eval(v);
    if fv == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    collision_sum(params, v, BranchFilter::Full, |w, j, v1, vs, v1s| {
        let at = match which {
            LossPiece::L0 => vs,
            LossPiece::L1 => v1s,
        };
        acc += w * at_node(g, &params.grid, j, v1) * h.eval(at)
    });
    fv * acc
}

/// Quantum collision frequency `2 int g(v1) (h(v*) + h(v1*))`.
pub fn frequency_qu(g: &Distribution, h: &Distribution, params: &OperatorParams, v: Vec3) -> f64 {
    let mut acc = 0.0;
    collision_sum(params, v, BranchFilter::Full, |w, j, v1, vs, v1s| {
        acc += w * at_node(g, &params.grid, j, v1) * (h.eval(vs) + h.eval(v1s))
    });
    acc
}

/// `Q[f](v) = Q+[f] - f R[f]`, gain and frequency on shared nodes.
///
/// Returns `(Q, Q+, R)`.
pub fn full_q(f: &Distribution, params: &OperatorParams, v: Vec3, mode: Mode) -> (f64, f64, f64) {
    let c = mode.cubic();
    let fv = f.eval(v);
    let mut gain = 0.0;
    let mut freq = 0.0;
    collision_sum(params, v, BranchFilter::Full, |w, j, v1, vs, v1s| {
        let f1 = at_node(f, &params.grid, j, v1);
        let fs = f.eval(vs);
        let f1s = f.eval(v1s);
        gain += w * fs * f1s * (1.0 + c * (fv + f1));
        freq += w * f1 * (1.0 + c * (fs + f1s));
    });
    (gain - fv * freq, gain, freq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{Bump, ClosedForm, GridData, SphereKind, SphereRule};
    use crate::operators::{AngularKernel, CrossSection};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params(gamma: f64, n: usize) -> OperatorParams {
        OperatorParams::new(
            CrossSection::new(gamma, AngularKernel::Constant(1.0)).unwrap(),
            SphereRule::build(SphereKind::ProductGauss, 6).unwrap(),
            VelocityGrid::new(6.0, n).unwrap(),
        )
    }

    fn mixture(seed: u64) -> Distribution {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bumps = (0..2)
            .map(|_| {
                let c = Vec3(std::array::from_fn(|_| rng.gen_range(-1.5..1.5)));
                Bump::new(rng.gen_range(0.2..1.0), c, rng.gen_range(0.6..1.5)).unwrap()
            })
            .collect();
        ClosedForm::mixture(bumps).unwrap().into()
    }

    fn point_mass(grid: VelocityGrid) -> Distribution {
        let mut vals = vec![0.0; grid.len()];
        let n = grid.points_per_axis();
        vals[grid.index(n / 2, n / 2, n / 2)] = 1.0 / grid.cell_volume();
        GridData::new(grid, vals, None).unwrap().into()
    }

    #[test]
    fn point_mass_frequency_is_four_pi_speed() {
        let p = params(1.0, 13);
        let g = point_mass(p.grid);
        let r = frequency_cl(&g, &p, Vec3::new(2.0, 0.0, 0.0));
        assert!((r - 8.0 * PI).abs() < 1e-10, "{r}");
        let one: Distribution = GridData::new(p.grid, vec![1.0; p.grid.len()], None).unwrap().into();
        let l = loss_cl(&one, &g, &p, Vec3::new(2.0, 0.0, 0.0));
        assert!((l - 8.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn maxwell_molecule_frequency_is_mass() {
        let p = params(0.0, 9);
        let g = mixture(4);
        let mass: f64 = p.grid.nodes().map(|v| g.eval(v)).sum::<f64>() * p.grid.cell_volume();
        for v in [Vec3::ZERO, Vec3::new(1.0, -2.0, 0.5), p.grid.node(17)] {
            let r = frequency_cl(&g, &p, v);
            assert!((r - 4.0 * PI * mass).abs() < 1e-12 * r, "{r}");
        }
    }

    #[test]
    fn maxwellian_gain_equals_loss() {
        let p = params(1.0, 9);
        let m: Distribution = ClosedForm::maxwellian(0.7, Vec3::new(0.3, 0.0, -0.2), 1.2).unwrap().into();
        for v in [Vec3::ZERO, Vec3::new(1.0, 0.5, -0.5), Vec3::new(-2.0, 1.0, 0.0)] {
            let (q, gain, _) = full_q(&m, &p, v, Mode::Classical);
            assert!(q.abs() <= 1e-12 * gain.max(1e-300) + 1e-300, "{q} {gain}");
        }
    }

    #[test]
    fn g0_with_unit_first_argument_is_gain() {
        let p = params(1.0, 9);
        let one: Distribution = GridData::new(p.grid, vec![1.0; p.grid.len()], None).unwrap().into();
        let (g, h) = (mixture(1), mixture(2));
        let v = Vec3::new(0.4, -0.3, 1.0);
        assert_eq!(gain_qu(&one, &g, &h, &p, v, GainPiece::G0), gain_cl(&g, &h, &p, v));
    }

    #[test]
    fn l0_with_unit_last_argument_is_loss() {
        let p = params(1.0, 9);
        let one: Distribution = ClosedForm::maxwellian(1.0, Vec3::ZERO, 1e-300).unwrap().into();
        let (f, g) = (mixture(1), mixture(2));
        let v = Vec3::new(0.4, -0.3, 1.0);
        let l0 = loss_qu(&f, &g, &one, &p, v, LossPiece::L0);
        let l1 = loss_qu(&f, &g, &one, &p, v, LossPiece::L1);
        let cl = loss_cl(&f, &g, &p, v);
        assert!((l0 - cl).abs() <= 1e-13 * cl && (l1 - cl).abs() <= 1e-13 * cl);
    }

    #[test]
    fn zero_first_argument_kills_quantum_pieces() {
        let p = params(1.0, 9);
        let zero: Distribution = GridData::new(p.grid, vec![0.0; p.grid.len()], None).unwrap().into();
        let (g, h) = (mixture(5), mixture(6));
        let v = Vec3::new(0.1, 0.2, 0.3);
        for piece in [GainPiece::G0, GainPiece::G1] {
            assert_eq!(gain_qu(&zero, &g, &h, &p, v, piece), 0.0);
        }
        for piece in [LossPiece::L0, LossPiece::L1] {
            assert_eq!(loss_qu(&zero, &g, &h, &p, v, piece), 0.0);
        }
    }

    #[test]
    fn quantum_frequency_splits_into_loss_pieces() {
        let p = params(1.0, 9);
        let (f, g, h) = (mixture(7), mixture(8), mixture(9));
        let v = Vec3::new(-0.5, 0.0, 0.7);
        let lhs = f.eval(v) * frequency_qu(&g, &h, &p, v);
        let rhs = loss_qu(&f, &g, &h, &p, v, LossPiece::L0) + loss_qu(&f, &g, &h, &p, v, LossPiece::L1);
        assert!((lhs - rhs).abs() <= 1e-13 * lhs);
    }

    #[test]
    fn zeroed_cubic_terms_reproduce_classical_bits() {
        let p = params(1.0, 9);
        let f = mixture(3);
        for v in [Vec3::ZERO, Vec3::new(1.0, 2.0, -1.0)] {
            let a = full_q(&f, &p, v, Mode::Classical);
            let b = full_q(&f, &p, v, Mode::Quantum { cubic: 0.0 });
            assert_eq!(a.0.to_bits(), b.0.to_bits());
        }
    }

    #[test]
    fn branch_filters_cover_the_full_gain() {
        let p = params(1.0, 9);
        let (f, g) = (mixture(10), mixture(11));
        for v in [Vec3::ZERO, Vec3::new(1.5, -0.5, 0.2)] {
            let full = gain_cl(&f, &g, &p, v);
            let q0 = gain_cl(&f, &g, &p.with_branch(BranchFilter::Q0), v);
            let q1 = gain_cl(&f, &g, &p.with_branch(BranchFilter::Q1), v);
            assert!(q0 <= full * (1.0 + 1e-14) && q1 <= full * (1.0 + 1e-14));
            assert!(q0 + q1 >= full * (1.0 - 1e-14));
        }
    }
}
