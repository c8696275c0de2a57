use serde::{Deserialize, Serialize};

use crate::discretization::{Distribution, VelocityGrid};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// `|| <v>^k f ||_{L^p}` with `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub p: f64,
    pub k: f64,
}

impl WeightedNormSpec {
    pub fn new(p: f64, k: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::Range(format!("norm exponent must be at least 1, got {p}")));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Range(format!("weight power must be nonnegative, got {k}")));
        }
        Ok(WeightedNormSpec { p, k })
    }
}

/// `<v>^k`.
pub fn bracket_pow(v: Vec3, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        (1.0 + v.norm_sq()).powf(0.5 * k)
    }
}

/// Riemann sum of `(<v>^k |f|)^p` over the grid nodes, in lexicographic node
/// order; the maximum for `p = inf`.
pub fn weighted_lp_norm(dist: &Distribution, spec: WeightedNormSpec, grid: &VelocityGrid) -> f64 {
    weighted_lp_norm_values(&dist.nodal_values(grid), spec, grid)
}

pub fn weighted_lp_norm_values(values: &[f64], spec: WeightedNormSpec, grid: &VelocityGrid) -> f64 {
    debug_assert_eq!(values.len(), grid.len());
    let weighted = values.iter().enumerate().map(|(i, f)| bracket_pow(grid.node(i), spec.k) * f.abs());
    if spec.p.is_infinite() {
        return weighted.fold(0.0, f64::max);
    }
    let sum = if spec.p == 1.0 {
        compensated_sum(weighted)
    } else {
        compensated_sum(weighted.map(|w| w.powf(spec.p)))
    };
    (grid.cell_volume() * sum).powf(1.0 / spec.p)
}

/// Neumaier summation in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{ClosedForm, GridData};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn maxwellian() -> Distribution {
        ClosedForm::maxwellian(1.0, Vec3::ZERO, 1.0).unwrap().into()
    }

    #[test]
    fn constant_sup_norm() {
        let g = VelocityGrid::new(2.0, 5).unwrap();
        let one = GridData::new(g, vec![1.0; g.len()], None).unwrap().into();
        assert_eq!(weighted_lp_norm(&one, WeightedNormSpec::new(f64::INFINITY, 0.0).unwrap(), &g), 1.0);
    }

    #[test]
    fn gaussian_l1_and_l2() {
        let g = VelocityGrid::new(8.0, 65).unwrap();
        let l1 = weighted_lp_norm(&maxwellian(), WeightedNormSpec::new(1.0, 0.0).unwrap(), &g);
        let l2 = weighted_lp_norm(&maxwellian(), WeightedNormSpec::new(2.0, 0.0).unwrap(), &g);
        assert!((l1 - PI.powf(1.5)).abs() < 1e-6);
        assert!((l2 - (PI / 2.0).powf(0.75)).abs() < 1e-6);
    }

    #[test]
    fn refinement_converges_monotonically() {
        for (p, exact) in [(1.0, PI.powf(1.5)), (2.0, (PI / 2.0).powf(0.75))] {
            let spec = WeightedNormSpec::new(p, 0.0).unwrap();
            let errs: Vec<f64> = [17, 33, 65]
                .iter()
                .map(|n| {
                    let g = VelocityGrid::new(8.0, *n).unwrap();
                    (weighted_lp_norm(&maxwellian(), spec, &g) - exact).abs()
                })
                .collect();
            // Past N = 33 the Gaussian sum is exact to rounding.
            let floor = 4.0 * f64::EPSILON * exact;
            assert!(errs[1] < errs[0] && errs[2] <= errs[1].max(floor), "{errs:?}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(WeightedNormSpec::new(0.5, 0.0).is_err());
        assert!(WeightedNormSpec::new(2.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn norms_are_monotone(
            base in proptest::collection::vec(0.0f64..1.0, 125),
            bump in proptest::collection::vec(0.0f64..1.0, 125),
            p in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(6.0), Just(f64::INFINITY)],
            k in 0.0f64..4.0,
        ) {
            let g = VelocityGrid::new(2.0, 5).unwrap();
            let upper: Vec<f64> = base.iter().zip(&bump).map(|(a, b)| a + b).collect();
            let spec = WeightedNormSpec::new(p, k).unwrap();
            prop_assert!(weighted_lp_norm_values(&base, spec, &g) <= weighted_lp_norm_values(&upper, spec, &g));
        }
    }
}
