use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Uniform Cartesian lattice on `[-R, R]^3` with an odd number of points per
/// axis, so the origin is a node. Node `(i, j, k)` is stored at
/// `(i * n + j) * n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    radius: f64,
    n: usize,
}

impl VelocityGrid {
    pub fn new(radius: f64, points_per_axis: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("grid radius must be positive, got {radius}")));
        }
        if points_per_axis < 5 || points_per_axis % 2 == 0 {
            return Err(Error::Config(format!(
                "points per axis must be odd and at least 5, got {points_per_axis}"
            )));
        }
        Ok(VelocityGrid { radius, n: points_per_axis })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.n - 1) as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis(&self, i: usize) -> f64 {
        -self.radius + self.spacing() * i as f64
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn node(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords(idx);
        Vec3::new(self.axis(i), self.axis(j), self.axis(k))
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec3> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Position of `v` in fractional index units.
    pub fn to_index_space(&self, v: Vec3) -> [f64; 3] {
        let h = self.spacing();
        [(v[0] + self.radius) / h, (v[1] + self.radius) / h, (v[2] + self.radius) / h]
    }

    /// Same lattice with the spacing halved.
    pub fn refined(&self) -> Self {
        VelocityGrid { radius: self.radius, n: 2 * self.n - 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_a_node() {
        let g = VelocityGrid::new(8.0, 13).unwrap();
        let mid = g.index(6, 6, 6);
        assert_eq!(g.node(mid), Vec3::ZERO);
        assert!((g.spacing() - 16.0 / 12.0).abs() < 1e-15);
        assert_eq!(g.coords(g.index(3, 7, 11)), [3, 7, 11]);
        assert_eq!(g.refined().points_per_axis(), 25);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(VelocityGrid::new(8.0, 12).is_err());
        assert!(VelocityGrid::new(8.0, 3).is_err());
        assert!(VelocityGrid::new(-1.0, 13).is_err());
    }
}
