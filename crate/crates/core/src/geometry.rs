//! Binary collision kinematics.
//!
//! Everything here is a pure function over `Copy` value types so it can sit in
//! the innermost quadrature loops.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

pub type Velocity = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Japanese bracket `sqrt(1 + |v|^2)`.
    pub fn bracket(self) -> f64 {
        (1.0 + self.norm_sq()).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn direction(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self / n)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3([self.0[0] / s, self.0[1] / s, self.0[2] / s])
    }
}

/// A point of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector(Vec3);

impl UnitVector {
    pub const NORM_TOL: f64 = 1e-12;
    pub const E3: UnitVector = UnitVector(Vec3([0.0, 0.0, 1.0]));

    /// Accepts `v` only if it already has norm one within `NORM_TOL`.
    pub fn new(v: Vec3) -> Result<Self> {
        if !v.is_finite() || (v.norm() - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::Domain(format!("{v:?} is not a unit vector")));
        }
        Ok(UnitVector(v))
    }

    pub fn normalize(v: Vec3) -> Result<Self> {
        v.direction()
            .filter(|d| d.is_finite())
            .map(UnitVector)
            .ok_or_else(|| Error::Domain("cannot normalize the zero vector".into()))
    }

    pub fn from_angles(cos_theta: f64, phi: f64) -> Self {
        let s = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        UnitVector(Vec3([s * phi.cos(), s * phi.sin(), cos_theta]))
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }
}

impl Neg for UnitVector {
    type Output = UnitVector;
    fn neg(self) -> UnitVector {
        UnitVector(-self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionOutcome {
    pub v: Velocity,
    pub v1: Velocity,
    pub sigma: UnitVector,
    pub v_star: Velocity,
    pub v1_star: Velocity,
    pub center: Velocity,
    pub relative: Velocity,
    pub energy: f64,
}

impl CollisionOutcome {
    pub fn momentum_residual(&self) -> f64 {
        ((self.v_star + self.v1_star) - (self.v + self.v1)).max_abs()
    }

    pub fn energy_residual(&self) -> f64 {
        let post = self.v_star.norm_sq() + self.v1_star.norm_sq();
        (post - self.energy).abs() / self.energy.max(f64::MIN_POSITIVE)
    }

    pub fn relative_speed_residual(&self) -> f64 {
        let s = self.relative.norm();
        ((self.v_star - self.v1_star).norm() - s).abs() / s.max(f64::MIN_POSITIVE)
    }
}

/// Post-collisional pair `v* = v - R+(u)`, `v1* = v - R-(u)` with `u = v - v1`.
///
/// Going through the R-maps keeps the kinematics on the same arithmetic path
/// as the grid stencils.
pub fn post_collision(v: Velocity, v1: Velocity, sigma: UnitVector) -> CollisionOutcome {
    let u = v - v1;
    let v_star = v - r_map(u, sigma, Branch::Plus);
    let v1_star = v - r_map(u, sigma, Branch::Minus);
    CollisionOutcome {
        v,
        v1,
        sigma,
        v_star,
        v1_star,
        center: (v + v1) * 0.5,
        relative: u,
        energy: v.norm_sq() + v1.norm_sq(),
    }
}

/// `y/2 +- |y| sigma / 2`.
pub fn r_map(y: Vec3, sigma: UnitVector, branch: Branch) -> Vec3 {
    y * 0.5 + sigma.vec() * (branch.sign() * 0.5 * y.norm())
}

pub fn r_map_inverse(nu: Vec3, sigma: UnitVector, branch: Branch) -> Result<Vec3> {
    let n = nu.norm();
    let along = nu.dot(sigma.vec());
    if n == 0.0 || !(branch.sign() * along > 0.0) {
        return Err(Error::Domain(format!(
            "r_map_inverse needs a signed projection > 0, got {along:e} for {branch:?}"
        )));
    }
    let cos = along / n;
    Ok(nu * 2.0 - sigma.vec() * (n / cos))
}

/// Jacobian `4 / (nu_hat . sigma)^2` of the R-map inverse.
pub fn r_map_jacobian(nu: Vec3, sigma: UnitVector) -> Result<f64> {
    let n = nu.norm();
    let cos = if n > 0.0 { nu.dot(sigma.vec()) / n } else { 0.0 };
    if cos == 0.0 || !cos.is_finite() {
        return Err(Error::Domain("jacobian undefined for nu orthogonal to sigma".into()));
    }
    Ok(4.0 / (cos * cos))
}

/// The involution `(v, v1, sigma) -> (v*, v1*, eta)` with `eta = (v1 - v)/|v - v1|`.
pub fn involution_t(
    v: Velocity,
    v1: Velocity,
    sigma: UnitVector,
) -> Result<(Velocity, Velocity, UnitVector)> {
    if v == v1 {
        return Err(Error::Domain("involution undefined for v = v1".into()));
    }
    let c = post_collision(v, v1, sigma);
    let eta = UnitVector::normalize(v1 - v)?;
    Ok((c.v_star, c.v1_star, eta))
}

fn transverse_factor(w: Vec3, sigma: UnitVector) -> f64 {
    match w.direction() {
        Some(d) => {
            let c = d.dot(sigma.vec());
            (1.0 - c * c).max(0.0).sqrt()
        }
        None => 0.0,
    }
}

/// Slacks of the two kinematic lower bounds
/// `<v*> >= <v1*>/2 (1 - |v1*^ . sigma|^2)^(1/2)` and its mirror.
pub fn kinematic_lower_bound_gap(v: Velocity, v1: Velocity, sigma: UnitVector) -> (f64, f64) {
    let c = post_collision(v, v1, sigma);
    let a = c.v_star.bracket() - 0.5 * c.v1_star.bracket() * transverse_factor(c.v1_star, sigma);
    let b = c.v1_star.bracket() - 0.5 * c.v_star.bracket() * transverse_factor(c.v_star, sigma);
    (a, b)
}

/// Largest residuals of the kinematic identities over a random sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GeometryReport {
    pub samples: usize,
    pub jacobian_samples: usize,
    pub momentum: f64,
    pub energy: f64,
    pub relative_speed: f64,
    /// `R+(y) + R-(y) = y`, relative to `|y|`.
    pub decomposition: f64,
    /// `R+(y) . R-(y) = 0`, relative to `|y|^2`.
    pub orthogonality: f64,
    /// `|R+|^2 + |R-|^2 = |y|^2`, relative to `|y|^2`.
    pub pythagorean: f64,
    /// `e R^e(y) . sigma >= 0`: largest negative part, relative to `|y|`.
    pub sign: f64,
    /// `|y| |unit(R^e(y)) . sigma| = |R^e(y)|`, relative to `|y|`.
    pub magnitude: f64,
    /// `unit(y) . sigma = e (2 |unit(R^e(y)) . sigma|^2 - 1)`.
    pub angle: f64,
    /// `(unit(R+) . sigma)^2 + (unit(R-) . sigma)^2 = 1`.
    pub r_plus_minus: f64,
    /// `T(T(x)) = x`.
    pub involution: f64,
    /// Largest negative slack of the two kinematic lower bounds.
    pub lower_bound: f64,
    /// R-map inverse Jacobian against central differences, relative.
    pub jacobian_fd: f64,
    /// `|det DT| = 1` in angle charts of the sphere, by central differences.
    pub involution_jacobian_fd: f64,
}

impl GeometryReport {
    /// Identities at `1e-12`, the involution and lower bounds at `1e-10`,
    /// Jacobians at `1e-6`.
    pub fn passes(&self) -> bool {
        [self.momentum, self.energy, self.relative_speed, self.decomposition, self.orthogonality]
            .iter()
            .chain(&[self.pythagorean, self.sign, self.magnitude, self.angle, self.r_plus_minus])
            .all(|&x| x <= 1e-12)
            && self.involution <= 1e-10
            && self.lower_bound <= 1e-10
            && self.jacobian_fd <= 1e-6
            && self.involution_jacobian_fd <= 1e-6
    }
}

fn random_velocity<R: rand::Rng>(rng: &mut R, r: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn random_direction<R: rand::Rng>(rng: &mut R) -> UnitVector {
    UnitVector::from_angles(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn determinant<const N: usize>(mut a: [[f64; N]; N]) -> f64 {
    let mut det = 1.0;
    for c in 0..N {
        let p = (c..N).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap_or(c);
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..N {
            let f = a[r][c] / a[c][c];
            for k in c..N {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// `|det|` of the central-difference Jacobian of `nu -> r_map_inverse(nu)`.
pub fn r_map_inverse_jacobian_fd(nu: Vec3, sigma: UnitVector, branch: Branch) -> Result<f64> {
    let h = 1e-5 * nu.norm().max(1.0);
    let mut jac = [[0.0; 3]; 3];
    for c in 0..3 {
        let mut e = Vec3::ZERO;
        e.0[c] = h;
        let d = (r_map_inverse(nu + e, sigma, branch)? - r_map_inverse(nu - e, sigma, branch)?) / (2.0 * h);
        for r in 0..3 {
            jac[r][c] = d[r];
        }
    }
    Ok(determinant(jac).abs())
}

/// `|det|` of the central-difference Jacobian of the involution in the chart
/// `(v, v1, cos theta, phi)` for both sphere arguments. The chart has
/// constant area density, so a measure-preserving involution gives one.
pub fn involution_jacobian_fd(v: Velocity, v1: Velocity, sigma: UnitVector) -> Result<f64> {
    let s = sigma.vec();
    let x0 = [v[0], v[1], v[2], v1[0], v1[1], v1[2], s[2], s[1].atan2(s[0])];
    let map = |x: &[f64; 8]| -> Result<[f64; 8]> {
        let (a, b, e) = involution_t(
            Vec3::new(x[0], x[1], x[2]),
            Vec3::new(x[3], x[4], x[5]),
            UnitVector::from_angles(x[6], x[7]),
        )?;
        let e = e.vec();
        Ok([a[0], a[1], a[2], b[0], b[1], b[2], e[2], e[1].atan2(e[0])])
    };
    let mut jac = [[0.0; 8]; 8];
    for c in 0..8 {
        let h = 1e-6;
        let (mut xp, mut xm) = (x0, x0);
        xp[c] += h;
        xm[c] -= h;
        let (fp, fm) = (map(&xp)?, map(&xm)?);
        for r in 0..8 {
            let mut d = fp[r] - fm[r];
            if r == 7 {
                // Unwrap the azimuth across the branch cut.
                d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
            }
            jac[r][c] = d / (2.0 * h);
        }
    }
    Ok(determinant(jac).abs())
}

/// Checks every kinematic identity on `samples` random triples with
/// velocities in `[-5, 5]^3`, and both Jacobians on `jacobian_samples`
/// triples kept away from the poles of the angle chart.
pub fn check_invariants(samples: usize, jacobian_samples: usize, seed: u64) -> GeometryReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut r = GeometryReport { samples, jacobian_samples, ..Default::default() };
    for _ in 0..samples {
        let (v, v1, s) = (random_velocity(&mut rng, 5.0), random_velocity(&mut rng, 5.0), random_direction(&mut rng));
        let c = post_collision(v, v1, s);
        r.momentum = r.momentum.max(c.momentum_residual());
        r.energy = r.energy.max(c.energy_residual());
        r.relative_speed = r.relative_speed.max(c.relative_speed_residual());
        let y = c.relative;
        let (n, n2) = (y.norm(), y.norm_sq());
        let (p, m) = (r_map(y, s, Branch::Plus), r_map(y, s, Branch::Minus));
        r.decomposition = r.decomposition.max(((p + m) - y).norm() / n);
        r.orthogonality = r.orthogonality.max(p.dot(m).abs() / n2);
        r.pythagorean = r.pythagorean.max((p.norm_sq() + m.norm_sq() - n2).abs() / n2);
        let cos_y = y.dot(s.vec()) / n;
        let mut pm_sum = 0.0;
        for (branch, rv) in [(Branch::Plus, p), (Branch::Minus, m)] {
            let e = branch.sign();
            r.sign = r.sign.max((-e * rv.dot(s.vec()) / n).max(0.0));
            if let Some(d) = rv.direction() {
                let c = d.dot(s.vec());
                pm_sum += c * c;
                // Multiplied through by |c| to stay well conditioned.
                r.magnitude = r.magnitude.max((rv.norm() - n * c.abs()).abs() / n);
                r.angle = r.angle.max((cos_y - e * (2.0 * c * c - 1.0)).abs());
            }
        }
        if p.norm() > 1e-3 * n && m.norm() > 1e-3 * n {
            r.r_plus_minus = r.r_plus_minus.max((pm_sum - 1.0).abs());
        }
        if let Ok((a, b, e)) = involution_t(v, v1, s) {
            if let Ok((v2, v12, s2)) = involution_t(a, b, e) {
                let scale = 1.0 + v.norm() + v1.norm();
                let dv = (v2 - v).max_abs().max((v12 - v1).max_abs()) / scale;
                let ds = (s2.vec() - s.vec()).max_abs() * n / scale;
                r.involution = r.involution.max(dv).max(ds);
            }
        }
        let (a, b) = kinematic_lower_bound_gap(v, v1, s);
        r.lower_bound = r.lower_bound.max(-a.min(b)).max(0.0);
    }
    let mut done = 0;
    while done < jacobian_samples {
        let (v, v1, s) = (random_velocity(&mut rng, 5.0), random_velocity(&mut rng, 5.0), random_direction(&mut rng));
        let eta = (v1 - v).direction().map_or(1.0, |d| d[2]);
        let u = v - v1;
        let cos = u.dot(s.vec()) / u.norm();
        if s.vec()[2].abs() > 0.9 || eta.abs() > 0.9 || u.norm() < 0.5 || cos.abs() < 0.2 || cos.abs() > 0.9 {
            continue;
        }
        let nu = r_map(u, s, Branch::Plus);
        let jac = || -> Result<(f64, f64)> {
            let exact = r_map_jacobian(nu, s)?;
            let fd = r_map_inverse_jacobian_fd(nu, s, Branch::Plus)?;
            Ok(((fd - exact).abs() / exact, (involution_jacobian_fd(v, v1, s)? - 1.0).abs()))
        };
        if let Ok((a, b)) = jac() {
            r.jacobian_fd = r.jacobian_fd.max(a);
            r.involution_jacobian_fd = r.involution_jacobian_fd.max(b);
            done += 1;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uv(x: f64, y: f64, z: f64) -> UnitVector {
        UnitVector::new(Vec3::new(x, y, z)).unwrap()
    }

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn head_on_collision() {
        let c = post_collision(Vec3::new(1., 0., 0.), Vec3::new(-1., 0., 0.), uv(0., 0., 1.));
        assert!(close(c.v_star, Vec3::new(0., 0., -1.), 1e-15));
        assert!(close(c.v1_star, Vec3::new(0., 0., 1.), 1e-15));
        assert!(close(c.center, Vec3::ZERO, 0.0));
        assert_eq!(c.relative.norm(), 2.0);
    }

    #[test]
    fn sigma_along_u_swaps_the_pair() {
        let v = Vec3::new(0.3, -1.2, 2.0);
        let v1 = Vec3::new(-0.7, 0.4, 0.5);
        let s = UnitVector::normalize(v - v1).unwrap();
        let c = post_collision(v, v1, s);
        assert!(close(c.v_star, v1, 1e-14));
        assert!(close(c.v1_star, v, 1e-14));
    }

    #[test]
    fn equal_velocities_are_fixed() {
        let v = Vec3::new(0.5, 1.0, -2.0);
        let c = post_collision(v, v, uv(1., 0., 0.));
        assert_eq!(c.v_star, v);
        assert_eq!(c.v1_star, v);
    }

    #[test]
    fn r_map_examples() {
        let y = Vec3::new(2., 0., 0.);
        let s = uv(0., 1., 0.);
        let p = r_map(y, s, Branch::Plus);
        let m = r_map(y, s, Branch::Minus);
        assert_eq!(p, Vec3::new(1., 1., 0.));
        assert_eq!(m, Vec3::new(1., -1., 0.));
        assert_eq!(p.dot(m), 0.0);
        let s = uv(1., 0., 0.);
        assert_eq!(r_map(y, s, Branch::Plus), Vec3::new(2., 0., 0.));
        assert_eq!(r_map(y, s, Branch::Minus), Vec3::ZERO);
        assert_eq!(r_map(Vec3::ZERO, s, Branch::Plus), Vec3::ZERO);
    }

    #[test]
    fn r_map_inverse_examples() {
        let s = uv(0., 1., 0.);
        let y = r_map_inverse(Vec3::new(1., 1., 0.), s, Branch::Plus).unwrap();
        assert!(close(y, Vec3::new(2., 0., 0.), 1e-15));
        assert!(matches!(
            r_map_inverse(Vec3::new(1., 0., 0.), s, Branch::Plus),
            Err(Error::Domain(_))
        ));
        assert!(r_map_inverse(Vec3::new(1., 1., 0.), s, Branch::Minus).is_err());
        assert!(r_map_inverse(Vec3::ZERO, s, Branch::Plus).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let s = uv(0., 0., 1.);
        assert_eq!(r_map_jacobian(Vec3::new(0., 0., 3.), s).unwrap(), 4.0);
        let j = r_map_jacobian(Vec3::new(1., 0., 1.), s).unwrap();
        assert!((j - 8.0).abs() < 1e-14);
        assert!(r_map_jacobian(Vec3::new(1., 0., 0.), s).is_err());
    }

    #[test]
    fn involution_head_on() {
        let (a, b, e) =
            involution_t(Vec3::new(1., 0., 0.), Vec3::new(-1., 0., 0.), uv(0., 0., 1.)).unwrap();
        assert!(close(a, Vec3::new(0., 0., -1.), 1e-15));
        assert!(close(b, Vec3::new(0., 0., 1.), 1e-15));
        assert!(close(e.vec(), Vec3::new(-1., 0., 0.), 1e-15));
        let (v, v1, s) = involution_t(a, b, e).unwrap();
        assert!(close(v, Vec3::new(1., 0., 0.), 1e-15));
        assert!(close(v1, Vec3::new(-1., 0., 0.), 1e-15));
        assert!(close(s.vec(), Vec3::new(0., 0., 1.), 1e-15));
        let v = Vec3::new(1., 2., 3.);
        assert!(involution_t(v, v, uv(1., 0., 0.)).is_err());
    }

    #[test]
    fn lower_bound_slacks_head_on() {
        // v1* is parallel to sigma, so the transverse factor vanishes and the
        // slack is the full bracket <v*> = sqrt(2).
        let (a, b) =
            kinematic_lower_bound_gap(Vec3::new(1., 0., 0.), Vec3::new(-1., 0., 0.), uv(0., 0., 1.));
        assert!((a - 2f64.sqrt()).abs() < 1e-15);
        assert!((b - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_slacks_equal_velocities() {
        let v = Vec3::new(0.4, -1.0, 2.5);
        let s = uv(0., 0.6, 0.8);
        let (a, b) = kinematic_lower_bound_gap(v, v, s);
        let c = v.direction().unwrap().dot(s.vec());
        let expect = v.bracket() * (1.0 - 0.5 * (1.0 - c * c).sqrt());
        assert!((a - expect).abs() < 1e-14 && (b - expect).abs() < 1e-14);
        assert!(a >= v.bracket() / 2.0);
    }

    #[test]
    fn sampled_invariants() {
        let r = check_invariants(20_000, 200, 7);
        assert!(r.passes(), "{r:?}");
    }

    #[test]
    fn determinant_of_a_permutation() {
        assert_eq!(determinant([[0.0, 1.0], [1.0, 0.0]]), -1.0);
        assert_eq!(determinant([[2.0, 0.0, 0.0], [0.0, 3.0, 0.0], [1.0, 1.0, 4.0]]), 24.0);
    }

    #[test]
    fn unit_vector_validation() {
        assert!(UnitVector::new(Vec3::new(1.0, 1e-5, 0.0)).is_err());
        assert!(UnitVector::normalize(Vec3::ZERO).is_err());
        let s = UnitVector::from_angles(0.3, 1.1);
        assert!((s.vec().norm() - 1.0).abs() < 1e-15);
    }

    fn vel(r: f64) -> impl Strategy<Value = Vec3> {
        [-r..r, -r..r, -r..r].prop_map(Vec3)
    }

    fn sphere() -> impl Strategy<Value = UnitVector> {
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(c, p)| UnitVector::from_angles(c, p))
    }

    proptest! {
        #[test]
        fn conservation_laws(v in vel(5.0), v1 in vel(5.0), s in sphere()) {
            let c = post_collision(v, v1, s);
            prop_assert!(c.momentum_residual() <= 1e-12);
            prop_assert!(c.energy_residual() <= 1e-12);
            if c.relative.norm() > 1e-6 {
                prop_assert!(c.relative_speed_residual() <= 1e-12);
            }
        }

        #[test]
        fn r_map_identities(y in vel(10.0), s in sphere()) {
            let p = r_map(y, s, Branch::Plus);
            let m = r_map(y, s, Branch::Minus);
            let scale = y.norm_sq().max(1e-300);
            prop_assert!(((p + m) - y).max_abs() <= 1e-12 * y.norm().max(1.0));
            prop_assert!(p.dot(m).abs() <= 1e-12 * scale);
            prop_assert!((p.norm_sq() + m.norm_sq() - y.norm_sq()).abs() <= 1e-12 * scale);
        }

        #[test]
        fn r_map_inverse_round_trip(nu in vel(10.0), s in sphere(), plus in any::<bool>()) {
            let b = if plus { Branch::Plus } else { Branch::Minus };
            let n = nu.norm();
            prop_assume!(n > 1e-3 && b.sign() * nu.dot(s.vec()) > 0.05 * n);
            let y = r_map_inverse(nu, s, b).unwrap();
            prop_assert!((r_map(y, s, b) - nu).norm() <= 1e-10 * n);
        }

        #[test]
        fn involution_is_its_own_inverse(v in vel(5.0), v1 in vel(5.0), s in sphere()) {
            prop_assume!((v - v1).norm() > 1e-6);
            let (a, b, e) = involution_t(v, v1, s).unwrap();
            let (v2, v12, s2) = involution_t(a, b, e).unwrap();
            prop_assert!((v2 - v).max_abs() <= 1e-12 * (1.0 + v.max_abs()));
            prop_assert!((v12 - v1).max_abs() <= 1e-12 * (1.0 + v1.max_abs()));
            let tol = 1e-12 * (1.0 + v.norm() + v1.norm()) / (v - v1).norm();
            prop_assert!((s2.vec() - s.vec()).max_abs() <= tol.max(1e-12));
        }

        #[test]
        fn lower_bounds_hold(v in vel(20.0), v1 in vel(20.0), s in sphere()) {
            let (a, b) = kinematic_lower_bound_gap(v, v1, s);
            prop_assert!(a >= -1e-12 && b >= -1e-12);
        }
    }
}
