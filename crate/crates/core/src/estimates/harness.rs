//! Numerical stress test of weighted bilinear gain and loss estimates on
//! closed-form data. The harness cannot prove an inequality; it reports the
//! ratios `lhs / rhs` so that a misimplemented operator or norm shows up as
//! an unstable or unbounded constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{
    bracket_pow, compensated_sum, weighted_lp_norm_values, Bump, ClosedForm, VelocityGrid, WeightedNormSpec,
};
use crate::error::{Error, Result};
use crate::estimates::{check_admissible, ExponentTriple};
use crate::geometry::Vec3;
use crate::operators::{ClosedSums, ClosedSweep, ClosedSweepOutput, OperatorParams};

/// Pairs `(f, g)` of Gaussian mixtures with 1 to 3 bumps, centers in the
/// ball of radius 3, inverse temperatures in `[0.5, 2]` and amplitudes in
/// `[0.5, 1.5]`, drawn from a ChaCha8 stream seeded with `seed`.
pub fn gaussian_mixture_ensemble(size: usize, seed: u64) -> Vec<(ClosedForm, ClosedForm)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| (random_mixture(&mut rng), random_mixture(&mut rng))).collect()
}

fn random_mixture(rng: &mut ChaCha8Rng) -> ClosedForm {
    let count = rng.gen_range(1..=3);
    let bumps = (0..count)
        .map(|_| {
            let center = loop {
                let c = Vec3::new(rng.gen_range(-3.0..=3.0), rng.gen_range(-3.0..=3.0), rng.gen_range(-3.0..=3.0));
                if c.norm() <= 3.0 {
                    break c;
                }
            };
            Bump { amplitude: rng.gen_range(0.5..=1.5), center, beta: rng.gen_range(0.5..=2.0) }
        })
        .collect();
    ClosedForm::Mixture(bumps)
}

/// Several weighted norms of one closed-form profile, sampled once on the
/// norm grid.
fn profile_norms(f: &ClosedForm, specs: &[WeightedNormSpec], grid: &VelocityGrid) -> Vec<f64> {
    let values: Vec<f64> = grid.nodes().map(|v| f.eval(v)).collect();
    specs.iter().map(|s| weighted_lp_norm_values(&values, *s, grid)).collect()
}

/// `lhs / rhs`, `DegenerateInput` when both vanish and `inf` when only the
/// right side does.
pub fn ratio(lhs: f64, rhs: f64) -> Result<f64> {
    if rhs == 0.0 {
        if lhs == 0.0 {
            return Err(Error::DegenerateInput("both sides vanish".into()));
        }
        return Ok(f64::INFINITY);
    }
    Ok(lhs / rhs)
}

/// Operator sums for a whole ensemble at one resolution.
pub struct EnsembleSweep {
    pub params: OperatorParams,
    pub out: ClosedSweepOutput,
}

impl EnsembleSweep {
    pub fn run(ensemble: &[(ClosedForm, ClosedForm)], params: &OperatorParams, sums: ClosedSums) -> Result<Self> {
        let out = ClosedSweep::new(ensemble)?.with_sums(sums).run(params);
        Ok(EnsembleSweep { params: params.clone(), out })
    }

    pub fn sphere_order(&self) -> usize {
        self.params.sphere.order()
    }

    fn lane_norm(&self, values: Vec<f64>, spec: WeightedNormSpec) -> f64 {
        weighted_lp_norm_values(&values, spec, &self.params.grid)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRatio {
    pub sample_id: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` for a degenerate pair.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub triple: ExponentTriple,
    pub seed: u64,
    pub sphere_order: usize,
    pub points_per_axis: usize,
    pub samples: Vec<SampleRatio>,
    pub max_ratio: f64,
    pub degenerate: usize,
    /// Relative change of `max_ratio` at doubled sphere order, when measured.
    pub refinement_drift: Option<f64>,
}

impl EstimateReport {
    pub fn all_finite(&self) -> bool {
        self.samples.iter().all(|s| s.ratio.is_none_or(|r| r.is_finite() && r > 0.0))
    }
}

/// Relative change `|b - a| / |a|`.
pub fn drift(a: f64, b: f64) -> f64 {
    (b - a).abs() / a.abs()
}

fn summarize(samples: &[SampleRatio]) -> (f64, usize) {
    let max = samples.iter().filter_map(|s| s.ratio).fold(0.0, f64::max);
    (max, samples.iter().filter(|s| s.ratio.is_none()).count())
}

/// Ratios of `||<v>^k Q+(f, g)||_r` (on the operator grid) against
/// `||<v>^k f||_p ||<v>^gamma g||_q + ||<v>^gamma f||_p ||<v>^k g||_q`
/// (on `norm_grid`) for every ensemble member of an existing sweep.
pub fn estimate_from_sweep(
    triple: &ExponentTriple,
    ensemble: &[(ClosedForm, ClosedForm)],
    sweep: &EnsembleSweep,
    norm_grid: &VelocityGrid,
    seed: u64,
) -> Result<EstimateReport> {
    if !check_admissible(triple)?.is_admissible() {
        return Err(Error::Config(format!("triple {triple:?} is not admissible")));
    }
    let gamma = sweep.params.cross_section.gamma();
    if (gamma - triple.gamma).abs() > 0.0 {
        return Err(Error::Config(format!("triple gamma {} differs from the kernel's {gamma}", triple.gamma)));
    }
    let lhs_spec = WeightedNormSpec::new(triple.r, triple.k)?;
    let f_specs = [WeightedNormSpec::new(triple.p, triple.k)?, WeightedNormSpec::new(triple.p, gamma)?];
    let g_specs = [WeightedNormSpec::new(triple.q, gamma)?, WeightedNormSpec::new(triple.q, triple.k)?];
    let samples: Vec<SampleRatio> = ensemble
        .par_iter()
        .enumerate()
        .map(|(i, (f, g))| {
            let fa = profile_norms(f, &f_specs, norm_grid);
            let ga = profile_norms(g, &g_specs, norm_grid);
            let rhs = fa[0] * ga[0] + fa[1] * ga[1];
            let lhs = sweep.lane_norm(sweep.out.gain_lane(i), lhs_spec);
            SampleRatio { sample_id: i, lhs, rhs, ratio: ratio(lhs, rhs).ok() }
        })
        .collect();
    let (max_ratio, degenerate) = summarize(&samples);
    Ok(EstimateReport {
        triple: *triple,
        seed,
        sphere_order: sweep.sphere_order(),
        points_per_axis: sweep.params.grid.points_per_axis(),
        samples,
        max_ratio,
        degenerate,
        refinement_drift: None,
    })
}

/// [`estimate_from_sweep`] at `params` and again at doubled sphere order,
/// recording the drift of the maximal ratio.
pub fn empirical_constant(
    triple: &ExponentTriple,
    ensemble: &[(ClosedForm, ClosedForm)],
    params: &OperatorParams,
    norm_grid: &VelocityGrid,
    seed: u64,
) -> Result<EstimateReport> {
    let base = EnsembleSweep::run(ensemble, params, ClosedSums::Classical)?;
    let mut report = estimate_from_sweep(triple, ensemble, &base, norm_grid, seed)?;
    let fine = EnsembleSweep::run(ensemble, &params.with_sphere(params.sphere.doubled()?), ClosedSums::Classical)?;
    let refined = estimate_from_sweep(triple, ensemble, &fine, norm_grid, seed)?;
    report.refinement_drift = Some(drift(report.max_ratio, refined.max_ratio));
    Ok(report)
}

/// Exponents of the moment-increasing gain bound
/// `||<v>^k Q+(f, g)||_r <~ ||<v>^(k+gamma) f||_p ||<v>^(k+gamma) g||_q`
/// and the loss bound `||<v>^k Q-(f, g)||_p <~ ||<v>^(k+gamma) f||_p ||<v>^gamma g||_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossyExponents {
    pub p: f64,
    pub q: f64,
    #[serde(with = "crate::estimates::extended_real")]
    pub r: f64,
    pub k: f64,
}

impl LossyExponents {
    /// Checks `1 <= p <= q <= r`, Young's relation and `p < 2q`.
    pub fn new(p: f64, q: f64, r: f64, k: f64) -> Result<Self> {
        let inv_r = if r.is_infinite() { 0.0 } else { 1.0 / r };
        if !(1.0 <= p && p <= q && q <= r) {
            return Err(Error::Range(format!("need 1 <= p <= q <= r, got ({p}, {q}, {r})")));
        }
        if (1.0 + inv_r - 1.0 / p - 1.0 / q).abs() > 1e-9 {
            return Err(Error::Range(format!("({p}, {q}, {r}) violates Young's relation")));
        }
        if !(p < 2.0 * q) || !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Range(format!("need p < 2q and k >= 0, got p = {p}, q = {q}, k = {k}")));
        }
        Ok(LossyExponents { p, q, r, k })
    }
}

/// The six bounds exercised by [`lossy_bounds_check`]. The quantum pieces
/// carry an extra sup-norm factor of the profile entering the cubic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossyBound {
    GainClassical,
    GainQuantum0,
    GainQuantum1,
    LossClassical,
    LossQuantum0,
    LossQuantum1,
}

impl LossyBound {
    pub const ALL: [LossyBound; 6] = [
        LossyBound::GainClassical,
        LossyBound::GainQuantum0,
        LossyBound::GainQuantum1,
        LossyBound::LossClassical,
        LossyBound::LossQuantum0,
        LossyBound::LossQuantum1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossyBound::GainClassical => "gain_classical",
            LossyBound::GainQuantum0 => "gain_quantum_0",
            LossyBound::GainQuantum1 => "gain_quantum_1",
            LossyBound::LossClassical => "loss_classical",
            LossyBound::LossQuantum0 => "loss_quantum_0",
            LossyBound::LossQuantum1 => "loss_quantum_1",
        }
    }

    fn is_quantum(self) -> bool {
        !matches!(self, LossyBound::GainClassical | LossyBound::LossClassical)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRatios {
    pub bound: LossyBound,
    pub samples: Vec<SampleRatio>,
    pub max_ratio: f64,
    pub degenerate: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LossyReport {
    pub exponents: LossyExponents,
    pub gamma: f64,
    pub sphere_order: usize,
    pub points_per_axis: usize,
    pub bounds: Vec<BoundRatios>,
}

impl LossyReport {
    pub fn bound(&self, b: LossyBound) -> Option<&BoundRatios> {
        self.bounds.iter().find(|x| x.bound == b)
    }

    pub fn all_finite(&self) -> bool {
        self.bounds.iter().all(|b| b.samples.iter().all(|s| s.ratio.is_none_or(|r| r.is_finite() && r > 0.0)))
    }
}

/// Ratios for the moment-increasing gain and loss bounds on each pair
/// `(f, g)` of a sweep. Quantum pieces use the lanes the sweep provides:
/// `G0(f, f, g) = f Q+(f, g)` and `G1(f, f, g)` for the gain with prefactor
/// `||f||_inf`, and `L_i(f, g, f)` for the loss with prefactor `||f||_inf`.
/// Quantum bounds need a sweep run with [`ClosedSums::All`].
pub fn lossy_bounds_check(
    exps: &LossyExponents,
    ensemble: &[(ClosedForm, ClosedForm)],
    sweep: &EnsembleSweep,
    norm_grid: &VelocityGrid,
) -> Result<LossyReport> {
    let gamma = sweep.params.cross_section.gamma();
    let grid = sweep.params.grid;
    let quantum = sweep.out.l0.iter().any(|x| *x != 0.0) || sweep.out.g1.iter().any(|x| *x != 0.0);
    let spec = |p: f64, k: f64| WeightedNormSpec::new(p, k);
    let f_specs = [spec(exps.p, exps.k + gamma)?, spec(f64::INFINITY, 0.0)?];
    let g_specs = [spec(exps.q, exps.k + gamma)?, spec(1.0, gamma)?];
    let gain_spec = spec(exps.r, exps.k)?;
    let loss_spec = spec(exps.p, exps.k)?;
    let per_member: Vec<[SampleRatio; 6]> = ensemble
        .par_iter()
        .enumerate()
        .map(|(i, (f, g))| {
            let fa = profile_norms(f, &f_specs, norm_grid);
            let ga = profile_norms(g, &g_specs, norm_grid);
            let (f_w, f_sup) = (fa[0], fa[1]);
            let (g_w, g_l1) = (ga[0], ga[1]);
            let fv = sweep.out.f_lane(i);
            let times = |a: &[f64], b: Vec<f64>| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
            let gain = sweep.out.gain_lane(i);
            let sides = |b: LossyBound| -> (f64, f64) {
                match b {
                    LossyBound::GainClassical => (sweep.lane_norm(gain.clone(), gain_spec), f_w * g_w),
                    LossyBound::GainQuantum0 => {
                        (sweep.lane_norm(times(&fv, gain.clone()), gain_spec), f_sup * f_w * g_w)
                    }
                    LossyBound::GainQuantum1 => (sweep.lane_norm(sweep.out.g1_lane(i), gain_spec), f_sup * f_w * g_w),
                    LossyBound::LossClassical => {
                        (sweep.lane_norm(times(&fv, sweep.out.frequency_lane(i)), loss_spec), f_w * g_l1)
                    }
                    LossyBound::LossQuantum0 => {
                        (sweep.lane_norm(times(&fv, sweep.out.l0_lane(i)), loss_spec), f_sup * f_w * g_l1)
                    }
                    LossyBound::LossQuantum1 => {
                        (sweep.lane_norm(times(&fv, sweep.out.l1_lane(i)), loss_spec), f_sup * f_w * g_l1)
                    }
                }
            };
            LossyBound::ALL.map(|b| {
                let (lhs, rhs) = sides(b);
                SampleRatio { sample_id: i, lhs, rhs, ratio: ratio(lhs, rhs).ok() }
            })
        })
        .collect();
    let bounds = LossyBound::ALL
        .iter()
        .enumerate()
        .filter(|(_, b)| quantum || !b.is_quantum())
        .map(|(j, b)| {
            let samples: Vec<SampleRatio> = per_member.iter().map(|m| m[j].clone()).collect();
            let (max_ratio, degenerate) = summarize(&samples);
            BoundRatios { bound: *b, samples, max_ratio, degenerate }
        })
        .collect();
    Ok(LossyReport {
        exponents: *exps,
        gamma,
        sphere_order: sweep.sphere_order(),
        points_per_axis: grid.points_per_axis(),
        bounds,
    })
}

/// `||<v>^k f||_1` of a nodal field, used for point-mass style checks.
pub fn weighted_l1(values: &[f64], k: f64, grid: &VelocityGrid) -> f64 {
    grid.cell_volume() * compensated_sum(values.iter().enumerate().map(|(i, x)| bracket_pow(grid.node(i), k) * x.abs()))
}

/// One row of `estimate_runs.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub sample_id: usize,
    pub seed: u64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub k: f64,
    pub gamma: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub sphere_order: usize,
}

impl EstimateReport {
    pub fn rows(&self) -> Vec<EstimateRow> {
        let t = self.triple;
        self.samples
            .iter()
            .map(|s| EstimateRow {
                sample_id: s.sample_id,
                seed: self.seed,
                p: t.p,
                q: t.q,
                r: t.r,
                k: t.k,
                gamma: t.gamma,
                lhs: s.lhs,
                rhs: s.rhs,
                ratio: s.ratio,
                sphere_order: self.sphere_order,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{SphereKind, SphereRule};
    use crate::operators::{AngularKernel, CrossSection};

    fn params(gamma: f64, radius: f64, n: usize, order: usize) -> OperatorParams {
        OperatorParams::new(
            CrossSection::new(gamma, AngularKernel::Constant(1.0)).unwrap(),
            SphereRule::build(SphereKind::ProductGauss, order).unwrap(),
            VelocityGrid::new(radius, n).unwrap(),
        )
    }

    fn triple() -> ExponentTriple {
        ExponentTriple::from_young(1.3, 2.2, 3.0, 1.0).unwrap()
    }

    #[test]
    fn ensemble_is_reproducible_and_in_range() {
        let a = gaussian_mixture_ensemble(20, 7);
        assert_eq!(a, gaussian_mixture_ensemble(20, 7));
        assert_ne!(a, gaussian_mixture_ensemble(20, 8));
        for (f, g) in &a {
            for b in f.bumps().unwrap().iter().chain(g.bumps().unwrap().iter()) {
                assert!(b.center.norm() <= 3.0 && (0.5..=2.0).contains(&b.beta));
            }
            assert!((1..=3).contains(&f.bumps().unwrap().len()));
        }
    }

    #[test]
    fn zero_data_is_degenerate() {
        let zero = ClosedForm::maxwellian(0.0, Vec3::ZERO, 1.0).unwrap();
        let p = params(1.0, 6.0, 7, 3);
        let ens = vec![(zero.clone(), zero)];
        let sweep = EnsembleSweep::run(&ens, &p, ClosedSums::Classical).unwrap();
        let rep = estimate_from_sweep(&triple(), &ens, &sweep, &VelocityGrid::new(6.0, 9).unwrap(), 0).unwrap();
        assert_eq!(rep.degenerate, 1);
        assert_eq!(rep.samples[0].lhs, 0.0);
        assert!(matches!(ratio(0.0, 0.0), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn ratios_are_scale_free() {
        let p = params(1.0, 6.0, 7, 3);
        let norm_grid = VelocityGrid::new(6.0, 17).unwrap();
        let ens = gaussian_mixture_ensemble(3, 11);
        let scaled: Vec<_> = ens.iter().map(|(f, g)| (f.scaled(3.7), g.scaled(0.02))).collect();
        let a = estimate_from_sweep(&triple(), &ens, &EnsembleSweep::run(&ens, &p, ClosedSums::Classical).unwrap(), &norm_grid, 0)
            .unwrap();
        let b = estimate_from_sweep(
            &triple(),
            &scaled,
            &EnsembleSweep::run(&scaled, &p, ClosedSums::Classical).unwrap(),
            &norm_grid,
            0,
        )
        .unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            let (x, y) = (x.ratio.unwrap(), y.ratio.unwrap());
            assert!((x - y).abs() <= 1e-10 * x, "{x} {y}");
        }
    }

    #[test]
    fn lattice_translation_leaves_ratios_alone() {
        // Weightless norms and a constant kernel commute with translations;
        // a shift by one grid spacing moves the discrete problem exactly,
        // up to truncation at the box edge.
        let p = params(0.0, 8.0, 17, 3);
        let h = p.grid.spacing();
        let norm_grid = VelocityGrid::new(8.0, 33).unwrap();
        let t = ExponentTriple::from_young(1.3, 2.2, 0.0, 0.0).unwrap();
        let ens = gaussian_mixture_ensemble(2, 5);
        let moved: Vec<_> = ens
            .iter()
            .map(|(f, g)| (f.translated(Vec3::new(h, 0.0, 0.0)), g.translated(Vec3::new(h, 0.0, 0.0))))
            .collect();
        let run = |e: &[(ClosedForm, ClosedForm)]| {
            estimate_from_sweep(&t, e, &EnsembleSweep::run(e, &p, ClosedSums::Classical).unwrap(), &norm_grid, 0)
                .unwrap()
        };
        let (a, b) = (run(&ens), run(&moved));
        for (x, y) in a.samples.iter().zip(&b.samples) {
            let (x, y) = (x.ratio.unwrap(), y.ratio.unwrap());
            assert!((x - y).abs() <= 1e-6 * x, "{x} {y}");
        }
    }

    #[test]
    fn loss_bound_sees_the_frequency_of_a_narrow_bump() {
        // A bump far narrower than the grid spacing, sitting on a node with
        // unit discrete mass, acts as a point mass: its frequency is
        // 4 pi |v - v0| for hard spheres.
        let p = params(1.0, 6.0, 13, 4);
        let v0 = Vec3::new(1.0, 0.0, 0.0);
        let g = ClosedForm::maxwellian(1.0 / p.grid.cell_volume(), v0, 60.0).unwrap();
        let f = ClosedForm::maxwellian(1.0, Vec3::ZERO, 1.0).unwrap();
        let ens = vec![(f.clone(), g)];
        let sweep = EnsembleSweep::run(&ens, &p, ClosedSums::Classical).unwrap();
        let exps = LossyExponents::new(1.0, 1.0, 1.0, 3.0).unwrap();
        let rep = lossy_bounds_check(&exps, &ens, &sweep, &VelocityGrid::new(6.0, 49).unwrap()).unwrap();
        let lhs = rep.bound(LossyBound::LossClassical).unwrap().samples[0].lhs;
        let expect: Vec<f64> = p
            .grid
            .nodes()
            .map(|v| f.eval(v) * 4.0 * std::f64::consts::PI * (v - v0).norm())
            .collect();
        let expect = weighted_l1(&expect, 3.0, &p.grid);
        assert!((lhs - expect).abs() < 1e-10 * expect, "{lhs} {expect}");
        assert!(rep.bound(LossyBound::GainQuantum0).is_none());
    }

    #[test]
    fn lossy_exponent_validation() {
        assert!(LossyExponents::new(1.5, 2.0, 6.0, 3.0).is_ok());
        assert!(LossyExponents::new(2.0, 1.5, 6.0, 3.0).is_err());
        assert!(LossyExponents::new(1.5, 2.0, 5.0, 3.0).is_err());
    }

    #[test]
    fn quantum_bounds_reduce_to_classical_for_unit_sup() {
        let p = params(1.0, 6.0, 7, 3);
        let ens = gaussian_mixture_ensemble(2, 3);
        let sweep = EnsembleSweep::run(&ens, &p, ClosedSums::All).unwrap();
        let exps = LossyExponents::new(1.5, 2.0, 6.0, 3.0).unwrap();
        let rep = lossy_bounds_check(&exps, &ens, &sweep, &VelocityGrid::new(6.0, 17).unwrap()).unwrap();
        assert!(rep.all_finite());
        // G0(f, f, g) = f Q+(f, g) <= ||f||_inf Q+(f, g) pointwise, so its
        // ratio never exceeds the classical one (both use the same norms).
        let c = rep.bound(LossyBound::GainClassical).unwrap();
        let q0 = rep.bound(LossyBound::GainQuantum0).unwrap();
        for (a, b) in c.samples.iter().zip(&q0.samples) {
            assert!(b.ratio.unwrap() <= a.ratio.unwrap() * (1.0 + 1e-12));
        }
    }
}
