use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{UnitVector, Vec3};
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereKind {
    /// Gauss-Legendre in `cos(theta)` times a uniform azimuth rule.
    ProductGauss,
    /// Octahedrally symmetric rules of algebraic degree 3, 5 or 7.
    Octahedral,
}

impl fmt::Display for SphereKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SphereKind::ProductGauss => "product-gauss",
            SphereKind::Octahedral => "octahedral",
        })
    }
}

impl FromStr for SphereKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product-gauss" => Ok(SphereKind::ProductGauss),
            "octahedral" => Ok(SphereKind::Octahedral),
            _ => Err(Error::Config(format!("unknown sphere rule kind {s:?}"))),
        }
    }
}

/// Quadrature rule on the unit sphere, closed under `sigma -> -sigma`.
///
/// The first half of the node list holds one representative of every
/// antipodal pair; the second half holds the exact negations in the same
/// order.
#[derive(Debug, Clone)]
pub struct SphereRule {
    kind: SphereKind,
    order: usize,
    nodes: Vec<UnitVector>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn build(kind: SphereKind, order: usize) -> Result<Self> {
        let half = match kind {
            SphereKind::ProductGauss => {
                if !(2..=64).contains(&order) {
                    return Err(Error::Config(format!(
                        "product-gauss order must lie in 2..=64, got {order}"
                    )));
                }
                product_gauss_half(order)
            }
            SphereKind::Octahedral => octahedral_half(order)?,
        };
        let mut nodes: Vec<UnitVector> = half.iter().map(|(s, _)| *s).collect();
        let mut weights: Vec<f64> = half.iter().map(|(_, w)| *w).collect();
        nodes.extend(half.iter().map(|(s, _)| -*s));
        weights.extend(half.iter().map(|(_, w)| *w));
        Ok(SphereRule { kind, order, nodes, weights })
    }

    pub fn kind(&self) -> SphereKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[UnitVector] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UnitVector, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: Fn(Vec3) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(s, w)| w * f(s.vec())).sum()
    }

    /// Same family at twice the order. Octahedral rules cap at degree 7.
    pub fn doubled(&self) -> Result<Self> {
        SphereRule::build(self.kind, 2 * self.order)
    }
}

fn product_gauss_half(n: usize) -> Vec<(UnitVector, f64)> {
    let (x, w) = gauss_legendre(n);
    let m = 2 * n;
    let dphi = 2.0 * PI / m as f64;
    let mut out = Vec::with_capacity(n * n);
    // Nodes are ascending, so the upper hemisphere is the tail.
    for i in n.div_ceil(2)..n {
        for a in 0..m {
            let phi = (a as f64 + 0.5) * dphi;
            out.push((UnitVector::from_angles(x[i], phi), w[i] * dphi));
        }
    }
    if n % 2 == 1 {
        // Equatorial ring: the azimuths a and a + n are antipodal.
        for a in 0..n {
            let phi = (a as f64 + 0.5) * dphi;
            out.push((UnitVector::from_angles(0.0, phi), w[n / 2] * dphi));
        }
    }
    out
}

fn octahedral_half(degree: usize) -> Result<Vec<(UnitVector, f64)>> {
    let four_pi = 4.0 * PI;
    let axes = [Vec3::new(1., 0., 0.), Vec3::new(0., 1., 0.), Vec3::new(0., 0., 1.)];
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let edges = [
        Vec3::new(r2, r2, 0.),
        Vec3::new(r2, -r2, 0.),
        Vec3::new(r2, 0., r2),
        Vec3::new(r2, 0., -r2),
        Vec3::new(0., r2, r2),
        Vec3::new(0., r2, -r2),
    ];
    let r3 = 1.0 / 3f64.sqrt();
    let corners = [
        Vec3::new(r3, r3, r3),
        Vec3::new(r3, r3, -r3),
        Vec3::new(r3, -r3, r3),
        Vec3::new(-r3, r3, r3),
    ];
    let (wa, we, wc) = match degree {
        3 => (1.0 / 6.0, 0.0, 0.0),
        5 => (1.0 / 15.0, 0.0, 3.0 / 40.0),
        7 => (1.0 / 21.0, 4.0 / 105.0, 9.0 / 280.0),
        _ => {
            return Err(Error::Config(format!(
                "octahedral rules exist for degree 3, 5 or 7, got {degree}"
            )))
        }
    };
    let mut out = Vec::new();
    for (set, w) in [(&axes[..], wa), (&edges[..], we), (&corners[..], wc)] {
        if w > 0.0 {
            for v in set {
                out.push((UnitVector::normalize(*v).expect("nonzero"), w * four_pi));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules() -> Vec<SphereRule> {
        let mut r: Vec<_> = (2..=12)
            .map(|n| SphereRule::build(SphereKind::ProductGauss, n).unwrap())
            .collect();
        for d in [3, 5, 7] {
            r.push(SphereRule::build(SphereKind::Octahedral, d).unwrap());
        }
        r
    }

    #[test]
    fn weights_sum_to_four_pi() {
        for r in rules() {
            let s: f64 = r.weights().iter().sum();
            assert!((s - 4.0 * PI).abs() < 1e-12, "{:?} {}", r.kind(), r.order());
            assert!(r.weights().iter().all(|w| *w > 0.0));
        }
        assert_eq!(SphereRule::build(SphereKind::ProductGauss, 6).unwrap().len(), 72);
    }

    #[test]
    fn quadratic_moments_are_exact() {
        for r in rules() {
            let zz = r.integrate(|s| s[2] * s[2]);
            let xy = r.integrate(|s| s[0] * s[1]);
            let x = r.integrate(|s| s[0]);
            assert!((zz - 4.0 * PI / 3.0).abs() < 1e-12);
            assert!(xy.abs() < 1e-12 && x.abs() < 1e-12);
        }
    }

    #[test]
    fn antipodal_closure() {
        for r in rules() {
            let h = r.len() / 2;
            for i in 0..h {
                assert_eq!(r.nodes()[i + h].vec(), -r.nodes()[i].vec());
                assert_eq!(r.weights()[i + h], r.weights()[i]);
            }
        }
    }

    #[test]
    fn half_sphere_sum_is_two_pi() {
        let dir = UnitVector::normalize(Vec3::new(0.31, -0.17, 0.93)).unwrap();
        for r in rules() {
            let s: f64 = r.iter().filter(|(s, _)| s.vec().dot(dir.vec()) > 0.0).map(|(_, w)| w).sum();
            assert!((s - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_rules() {
        assert!(SphereRule::build(SphereKind::ProductGauss, 1).is_err());
        assert!(SphereRule::build(SphereKind::Octahedral, 4).is_err());
        assert!("lebedev".parse::<SphereKind>().is_err());
    }
}
