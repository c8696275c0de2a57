use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::VelocityGrid;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// One Gaussian bump `a exp(-beta |v - v0|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: Vec3,
    pub beta: f64,
}

impl Bump {
    pub fn new(amplitude: f64, center: Vec3, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Range(format!("inverse temperature must be positive, got {beta}")));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) || !center.is_finite() {
            return Err(Error::Range("bump amplitude must be finite and nonnegative".into()));
        }
        Ok(Bump { amplitude, center, beta })
    }

    pub fn eval(&self, v: Vec3) -> f64 {
        self.amplitude * (-self.beta * (v - self.center).norm_sq()).exp()
    }

    pub fn mass(&self) -> f64 {
        self.amplitude * (std::f64::consts::PI / self.beta).powf(1.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClosedForm {
    Maxwellian(Bump),
    /// `1 / (exp(beta |v|^2) / z - 1)` with fugacity `0 < z < 1`.
    BoseEinstein { fugacity: f64, beta: f64 },
    Mixture(Vec<Bump>),
}

impl ClosedForm {
    pub fn maxwellian(amplitude: f64, center: Vec3, beta: f64) -> Result<Self> {
        Ok(ClosedForm::Maxwellian(Bump::new(amplitude, center, beta)?))
    }

    pub fn bose_einstein(fugacity: f64, beta: f64) -> Result<Self> {
        if !(fugacity > 0.0 && fugacity < 1.0) {
            return Err(Error::Range(format!("fugacity must lie in (0, 1), got {fugacity}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Range(format!("inverse temperature must be positive, got {beta}")));
        }
        Ok(ClosedForm::BoseEinstein { fugacity, beta })
    }

    pub fn mixture(bumps: Vec<Bump>) -> Result<Self> {
        if bumps.is_empty() {
            return Err(Error::Range("a mixture needs at least one bump".into()));
        }
        Ok(ClosedForm::Mixture(bumps))
    }

    pub fn eval(&self, v: Vec3) -> f64 {
        match self {
            ClosedForm::Maxwellian(b) => b.eval(v),
            ClosedForm::BoseEinstein { fugacity, beta } => {
                let e = fugacity * (-beta * v.norm_sq()).exp();
                e / (1.0 - e)
            }
            ClosedForm::Mixture(bs) => bs.iter().map(|b| b.eval(v)).sum(),
        }
    }

    /// Gaussian bumps if the family is a finite sum of them.
    pub fn bumps(&self) -> Option<Vec<Bump>> {
        match self {
            ClosedForm::Maxwellian(b) => Some(vec![*b]),
            ClosedForm::Mixture(bs) => Some(bs.clone()),
            ClosedForm::BoseEinstein { .. } => None,
        }
    }

    pub fn scaled(&self, s: f64) -> ClosedForm {
        let scale = |b: &Bump| Bump { amplitude: b.amplitude * s, ..*b };
        match self {
            ClosedForm::Maxwellian(b) => ClosedForm::Maxwellian(scale(b)),
            ClosedForm::Mixture(bs) => ClosedForm::Mixture(bs.iter().map(scale).collect()),
            ClosedForm::BoseEinstein { .. } => {
                panic!("scaling a Bose-Einstein profile leaves the family")
            }
        }
    }

    /// Shifts every bump center by `w`. Panics for Bose-Einstein profiles.
    pub fn translated(&self, w: Vec3) -> ClosedForm {
        let shift = |b: &Bump| Bump { center: b.center + w, ..*b };
        match self {
            ClosedForm::Maxwellian(b) => ClosedForm::Maxwellian(shift(b)),
            ClosedForm::Mixture(bs) => ClosedForm::Mixture(bs.iter().map(shift).collect()),
            ClosedForm::BoseEinstein { .. } => panic!("Bose-Einstein profiles are centered"),
        }
    }

    /// A single Gaussian with the tail behaviour of this profile: the exact
    /// Maxwellian, the leading term of the Bose-Einstein series, or the
    /// moment-matched Gaussian of a mixture.
    pub fn envelope(&self) -> Envelope {
        match self {
            ClosedForm::Maxwellian(b) => Envelope { beta: b.beta, center: b.center },
            ClosedForm::BoseEinstein { beta, .. } => Envelope { beta: *beta, center: Vec3::ZERO },
            ClosedForm::Mixture(bs) => {
                let mass: f64 = bs.iter().map(Bump::mass).sum();
                if mass <= 0.0 {
                    return Envelope { beta: bs[0].beta, center: bs[0].center };
                }
                let mut mean = Vec3::ZERO;
                for b in bs {
                    mean += b.center * (b.mass() / mass);
                }
                let spread: f64 = bs
                    .iter()
                    .map(|b| b.mass() * (1.5 / b.beta + (b.center - mean).norm_sq()))
                    .sum::<f64>()
                    / mass;
                Envelope { beta: 1.5 / spread, center: mean }
            }
        }
    }
}

/// Positive Gaussian weight `exp(-beta |v - c|^2)` factored out of grid data
/// before interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub beta: f64,
    pub center: Vec3,
}

impl Envelope {
    pub fn eval(&self, v: Vec3) -> f64 {
        (-self.beta * (v - self.center).norm_sq()).exp()
    }

    /// Moment-matched Gaussian of nonnegative nodal data.
    pub fn from_moments(grid: &VelocityGrid, values: &[f64]) -> Option<Envelope> {
        let mut mass = 0.0;
        let mut mean = Vec3::ZERO;
        for (i, f) in values.iter().enumerate() {
            mass += f;
            mean += grid.node(i) * *f;
        }
        if !(mass > 0.0) {
            return None;
        }
        let mean = mean / mass;
        let spread: f64 = values
            .iter()
            .enumerate()
            .map(|(i, f)| f * (grid.node(i) - mean).norm_sq())
            .sum::<f64>()
            / mass;
        (spread > 0.0).then(|| Envelope { beta: 1.5 / spread, center: mean })
    }
}

/// Nodal data on a velocity grid.
///
/// Off-grid values are `E(v) * trilinear(f / E)(v)` for the optional envelope
/// `E`, and zero outside the grid box. With no envelope this is plain
/// trilinear interpolation. Both variants are positive linear maps of the
/// nodal values, so nonnegativity and nodewise order carry over to every
/// evaluation point.
#[derive(Debug, Clone)]
pub struct GridData {
    grid: VelocityGrid,
    values: Arc<Vec<f64>>,
    reduced: Arc<Vec<f64>>,
    envelope: Option<Envelope>,
}

impl GridData {
    pub fn new(grid: VelocityGrid, values: Vec<f64>, envelope: Option<Envelope>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("nodal values must be finite".into()));
        }
        let reduced = match envelope {
            None => values.clone(),
            Some(e) => values
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let w = e.eval(grid.node(i));
                    if w > 0.0 {
                        f / w
                    } else {
                        0.0
                    }
                })
                .collect(),
        };
        Ok(GridData { grid, values: Arc::new(values), reduced: Arc::new(reduced), envelope })
    }

    /// Samples a closed form at the nodes, keeping its envelope.
    pub fn sample(grid: VelocityGrid, f: &ClosedForm) -> Self {
        let values = grid.nodes().map(|v| f.eval(v)).collect();
        GridData::new(grid, values, Some(f.envelope())).expect("closed forms are finite")
    }

    /// Samples a closed form with plain trilinear interpolation.
    pub fn sample_plain(grid: VelocityGrid, f: &ClosedForm) -> Self {
        let values = grid.nodes().map(|v| f.eval(v)).collect();
        GridData::new(grid, values, None).expect("closed forms are finite")
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nodal values divided by the envelope.
    pub fn reduced(&self) -> &[f64] {
        &self.reduced
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= 0.0)
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GridData::new(self.grid, values, self.envelope)
    }

    pub fn eval(&self, v: Vec3) -> f64 {
        let n = self.grid.points_per_axis();
        let top = (n - 1) as f64;
        let p = self.grid.to_index_space(v);
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            if !(p[a] >= 0.0 && p[a] <= top) {
                return 0.0;
            }
            let b = (p[a].floor() as usize).min(n - 2);
            base[a] = b;
            frac[a] = p[a] - b as f64;
        }
        if frac.iter().all(|t| *t == 0.0) {
            return self.values[self.grid.index(base[0], base[1], base[2])];
        }
        let mut acc = 0.0;
        for c in 0..8 {
            let (dx, dy, dz) = (c >> 2 & 1, c >> 1 & 1, c & 1);
            let w = if dx == 1 { frac[0] } else { 1.0 - frac[0] }
                * if dy == 1 { frac[1] } else { 1.0 - frac[1] }
                * if dz == 1 { frac[2] } else { 1.0 - frac[2] };
            if w != 0.0 {
                acc += w * self.reduced[self.grid.index(base[0] + dx, base[1] + dy, base[2] + dz)];
            }
        }
        match self.envelope {
            Some(e) => e.eval(v) * acc,
            None => acc,
        }
    }
}

/// A velocity density: nodal data or an exact formula.
#[derive(Debug, Clone)]
pub enum Distribution {
    Grid(GridData),
    Closed(ClosedForm),
}

impl Distribution {
    pub fn eval(&self, v: Vec3) -> f64 {
        match self {
            Distribution::Grid(g) => g.eval(v),
            Distribution::Closed(c) => c.eval(v),
        }
    }

    /// Nodal values on `grid`. Grid data on a different lattice is
    /// interpolated.
    pub fn nodal_values(&self, grid: &VelocityGrid) -> Vec<f64> {
        match self {
            Distribution::Grid(g) if g.grid() == grid => g.values().to_vec(),
            _ => grid.nodes().map(|v| self.eval(v)).collect(),
        }
    }
}

impl From<ClosedForm> for Distribution {
    fn from(c: ClosedForm) -> Self {
        Distribution::Closed(c)
    }
}

impl From<GridData> for Distribution {
    fn from(g: GridData) -> Self {
        Distribution::Grid(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> VelocityGrid {
        VelocityGrid::new(4.0, 9).unwrap()
    }

    #[test]
    fn maxwellian_formula() {
        let m = ClosedForm::maxwellian(1.0, Vec3::ZERO, 1.0).unwrap();
        assert!((m.eval(Vec3::new(1., 0., 0.)) - (-1f64).exp()).abs() < 1e-16);
        assert!(ClosedForm::maxwellian(1.0, Vec3::ZERO, 0.0).is_err());
    }

    #[test]
    fn bose_einstein_formula() {
        let f = ClosedForm::bose_einstein(0.5, 1.0).unwrap();
        let v = Vec3::new(0.5, 0.2, -0.1);
        let exact = 1.0 / ((v.norm_sq()).exp() / 0.5 - 1.0);
        assert!((f.eval(v) - exact).abs() < 1e-15);
        assert!((f.eval(Vec3::ZERO) - 1.0).abs() < 1e-15);
        assert!(ClosedForm::bose_einstein(1.0, 1.0).is_err());
    }

    #[test]
    fn nodes_are_reproduced_exactly() {
        let g = grid();
        let m = ClosedForm::maxwellian(1.0, Vec3::new(0.3, 0., 0.), 0.7).unwrap();
        for data in [GridData::sample(g, &m), GridData::sample_plain(g, &m)] {
            for i in (0..g.len()).step_by(7) {
                assert_eq!(data.eval(g.node(i)), data.values()[i]);
            }
        }
    }

    #[test]
    fn envelope_makes_its_own_gaussian_exact() {
        let g = grid();
        let m = ClosedForm::maxwellian(2.0, Vec3::new(0.2, -0.1, 0.0), 1.3).unwrap();
        let data = GridData::sample(g, &m);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let v = Vec3(std::array::from_fn(|_| rng.gen_range(-3.9..3.9)));
            let (a, b) = (data.eval(v), m.eval(v));
            assert!((a - b).abs() <= 1e-13 * b.max(1e-300), "{a} {b}");
        }
    }

    #[test]
    fn linear_fields_are_reproduced() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let lin = |v: Vec3| c[0] + c[1] * v[0] + c[2] * v[1] + c[3] * v[2];
            let data = GridData::new(g, g.nodes().map(lin).collect(), None).unwrap();
            let h = g.spacing();
            for _ in 0..20 {
                let idx: [usize; 3] = std::array::from_fn(|_| rng.gen_range(0..8));
                let v = Vec3(std::array::from_fn(|a| g.axis(idx[a]) + 0.5 * h));
                assert!((data.eval(v) - lin(v)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_outside_the_box() {
        let g = grid();
        let data = GridData::new(g, vec![1.0; g.len()], None).unwrap();
        assert_eq!(data.eval(Vec3::new(4.0, 4.0, 4.0)), 1.0);
        assert_eq!(data.eval(Vec3::new(4.0 + 1e-9, 0.0, 0.0)), 0.0);
        assert_eq!(data.eval(Vec3::new(0.0, -5.0, 0.0)), 0.0);
    }

    #[test]
    fn mixture_envelope_matches_moments() {
        let mix = ClosedForm::mixture(vec![
            Bump::new(1.0, Vec3::new(1., 0., 0.), 1.0).unwrap(),
            Bump::new(0.8, Vec3::new(-1., 0.5, 0.), 1.5).unwrap(),
        ])
        .unwrap();
        let g = VelocityGrid::new(8.0, 65).unwrap();
        let values: Vec<f64> = g.nodes().map(|v| mix.eval(v)).collect();
        let num = Envelope::from_moments(&g, &values).unwrap();
        let exact = mix.envelope();
        assert!((num.beta - exact.beta).abs() < 1e-8);
        assert!((num.center - exact.center).max_abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn interpolation_preserves_order(
            seed in any::<u64>(),
            x in -4.5f64..4.5, y in -4.5f64..4.5, z in -4.5f64..4.5,
            enveloped in any::<bool>(),
        ) {
            let g = grid();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let b: Vec<f64> = a.iter().map(|v| v + rng.gen_range(0.0..1.0)).collect();
            let env = enveloped.then_some(Envelope { beta: 0.4, center: Vec3::new(0.1, 0., 0.) });
            let fa = GridData::new(g, a, env).unwrap();
            let fb = GridData::new(g, b, env).unwrap();
            let v = Vec3::new(x, y, z);
            prop_assert!(fa.eval(v) >= 0.0);
            prop_assert!(fa.eval(v) <= fb.eval(v));
        }
    }
}
