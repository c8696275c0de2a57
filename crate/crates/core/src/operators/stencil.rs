//! Whole-grid sweeps over lattice displacements.
//!
//! For output node `i` and integration node `j = i - m` the post-collisional
//! velocities sit at fractional index positions `i - (m +- |m| sigma)/2`.
//! The fractional parts, hence the trilinear weights, depend only on
//! `(m, sigma)`, so each pair is one fixed 8-tap stencil applied to a box of
//! output nodes. Every output node accumulates pairs in the same order no
//! matter how the grid is split between threads.

use rayon::prelude::*;

use crate::discretization::{Bump, ClosedForm, Envelope, VelocityGrid};
use crate::error::{Error, Result};
use crate::geometry::UnitVector;
use crate::operators::{chi, Mode, OperatorParams};

#[derive(Debug, Clone, Copy)]
struct AxisShift {
    /// Padded base index of the lower tap is `i - k`.
    k: i64,
    /// Weights of the lower and upper taps.
    w: [f64; 2],
    /// Output indices whose sample point lies inside the grid box.
    lo: i64,
    hi: i64,
    shift: f64,
}

impl AxisShift {
    fn new(shift: f64, n: i64) -> Self {
        let k = shift.floor();
        let t = shift - k;
        AxisShift {
            k: k as i64,
            w: [t, 1.0 - t],
            lo: shift.ceil() as i64,
            hi: ((n - 1) as f64 + shift).floor() as i64,
            shift,
        }
    }

    fn inside(&self, i: i64) -> bool {
        i >= self.lo && i <= self.hi
    }
}

struct Pair {
    weight: f64,
    star: [AxisShift; 3],
    one: [AxisShift; 3],
}

/// Runs `body` for every displacement `m` whose overlap box meets the output
/// x-range `[x0, x1)`, and every sphere node with `chi > 0`.
fn for_each_pair<F>(params: &OperatorParams, x0: i64, x1: i64, mut body: F)
where
    F: FnMut([i64; 3], [(i64, i64); 3], &Pair),
{
    let grid = &params.grid;
    let n = grid.points_per_axis() as i64;
    let h = grid.spacing();
    let h3 = grid.cell_volume();
    let cs = &params.cross_section;
    for mx in -(n - 1)..n {
        let rx = (mx.max(0).max(x0), (n - 1 + mx.min(0)).min(x1 - 1));
        if rx.0 > rx.1 {
            continue;
        }
        for my in -(n - 1)..n {
            let ry = (my.max(0), n - 1 + my.min(0));
            for mz in -(n - 1)..n {
                let rz = (mz.max(0), n - 1 + mz.min(0));
                let m = [mx as f64, my as f64, mz as f64];
                let len = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                let u_hat = if len > 0.0 {
                    [m[0] / len, m[1] / len, m[2] / len]
                } else if cs.gamma() > 0.0 {
                    continue;
                } else {
                    UnitVector::E3.vec().0
                };
                let kin = 2.0 * h3 * cs.speed_factor(h * len);
                for (sigma, w) in params.sphere.iter() {
                    let s = sigma.vec().0;
                    let c = u_hat[0] * s[0] + u_hat[1] * s[1] + u_hat[2] * s[2];
                    let x = chi(c);
                    if x == 0.0 {
                        continue;
                    }
                    let pair = Pair {
                        weight: kin * w * cs.b(c) * x,
                        star: std::array::from_fn(|a| AxisShift::new(0.5 * (m[a] + len * s[a]), n)),
                        one: std::array::from_fn(|a| AxisShift::new(0.5 * (m[a] - len * s[a]), n)),
                    };
                    body([mx, my, mz], [rx, ry, rz], &pair);
                }
            }
        }
    }
}

fn x_chunks(n: usize) -> Vec<(usize, usize)> {
    let threads = rayon::current_num_threads();
    let parts = if threads <= 1 { 1 } else { (4 * threads).min(n) };
    let mut out = Vec::with_capacity(parts);
    for p in 0..parts {
        let a = p * n / parts;
        let b = (p + 1) * n / parts;
        if b > a {
            out.push((a, b));
        }
    }
    out
}

/// Splits an x-major `[node][lane]` buffer into the slabs of `chunks`.
fn split_slabs<'a>(
    buf: &'a mut [f64],
    chunks: &[(usize, usize)],
    slab: usize,
) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(chunks.len());
    let mut rest = buf;
    for (a, b) in chunks {
        let (head, tail) = rest.split_at_mut((b - a) * slab);
        out.push(head);
        rest = tail;
    }
    out
}

/// Gain `Q+[f]` and frequency `R[f]` on every grid node for several grid
/// functions at once (the lanes), all sharing one envelope.
pub struct GridSweep {
    grid: VelocityGrid,
    lanes: usize,
    envelope: Option<Envelope>,
    /// Envelope-reduced values on the grid padded by one zero layer.
    reduced: Vec<f64>,
    values: Vec<f64>,
    env_nodes: Vec<f64>,
}

pub struct GridSweepOutput {
    pub lanes: usize,
    /// `[node][lane]`.
    pub gain: Vec<f64>,
    /// `[node][lane]`.
    pub frequency: Vec<f64>,
}

impl GridSweepOutput {
    pub fn gain_lane(&self, l: usize) -> Vec<f64> {
        self.gain.iter().skip(l).step_by(self.lanes).copied().collect()
    }

    pub fn frequency_lane(&self, l: usize) -> Vec<f64> {
        self.frequency.iter().skip(l).step_by(self.lanes).copied().collect()
    }
}

impl GridSweep {
    pub fn new(grid: VelocityGrid, envelope: Option<Envelope>, lanes: &[&[f64]]) -> Result<Self> {
        let n = grid.points_per_axis();
        let l = lanes.len();
        if l == 0 || lanes.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::Config("every lane needs one value per grid node".into()));
        }
        let env_nodes: Vec<f64> = match envelope {
            Some(e) => grid.nodes().map(|v| e.eval(v)).collect(),
            None => vec![1.0; grid.len()],
        };
        let p = n + 2;
        let mut reduced = vec![0.0; p * p * p * l];
        let mut values = vec![0.0; grid.len() * l];
        for idx in 0..grid.len() {
            let [i, j, k] = grid.coords(idx);
            let pidx = ((i + 1) * p + j + 1) * p + k + 1;
            for (lane, vals) in lanes.iter().enumerate() {
                let f = vals[idx];
                values[idx * l + lane] = f;
                reduced[pidx * l + lane] = if env_nodes[idx] > 0.0 { f / env_nodes[idx] } else { 0.0 };
            }
        }
        Ok(GridSweep { grid, lanes: l, envelope, reduced, values, env_nodes })
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    pub fn run(&self, params: &OperatorParams, mode: Mode) -> Result<GridSweepOutput> {
        if params.grid != self.grid {
            return Err(Error::Config("sweep data and operator grid differ".into()));
        }
        let n = self.grid.points_per_axis();
        let l = self.lanes;
        let slab = n * n * l;
        let mut gain = vec![0.0; n * slab];
        let mut frequency = vec![0.0; n * slab];
        let chunks = x_chunks(n);
        let gs = split_slabs(&mut gain, &chunks, slab);
        let fs = split_slabs(&mut frequency, &chunks, slab);
        let cubic = mode.cubic();
        chunks.par_iter().zip(gs).zip(fs).for_each(|((&(x0, x1), g), f)| {
            if cubic == 0.0 && matches!(mode, Mode::Classical) {
                self.run_chunk::<false>(params, 0.0, x0, x1, g, f);
            } else {
                self.run_chunk::<true>(params, cubic, x0, x1, g, f);
            }
        });
        Ok(GridSweepOutput { lanes: l, gain, frequency })
    }

    #[allow(clippy::too_many_arguments)]
    fn run_chunk<const QUANTUM: bool>(
        &self,
        params: &OperatorParams,
        cubic: f64,
        x0: usize,
        x1: usize,
        gain: &mut [f64],
        freq: &mut [f64],
    ) {
        let n = self.grid.points_per_axis();
        let ni = n as i64;
        let l = self.lanes;
        let p = (n + 2) as i64;
        let h = self.grid.spacing();
        let r = self.grid.radius();
        let mut a_buf = vec![0.0; l];
        let mut b_buf = vec![0.0; l];
        // Per-axis envelope factors at the sample points, quantum mode only.
        let mut e_star = [vec![1.0; n], vec![1.0; n], vec![1.0; n]];
        let mut e_one = [vec![1.0; n], vec![1.0; n], vec![1.0; n]];
        for_each_pair(params, x0 as i64, x1 as i64, |m, rng, pair| {
            let star_w = tap_weights(&pair.star);
            let one_w = tap_weights(&pair.one);
            if QUANTUM {
                if let Some(env) = self.envelope {
                    for a in 0..3 {
                        for i in 0..n {
                            let xs = -r + h * (i as f64 - pair.star[a].shift) - env.center[a];
                            let xo = -r + h * (i as f64 - pair.one[a].shift) - env.center[a];
                            e_star[a][i] = (-env.beta * xs * xs).exp();
                            e_one[a][i] = (-env.beta * xo * xo).exp();
                        }
                    }
                }
            }
            let offs = tap_offsets(p, l);
            for ix in rng[0].0..=rng[0].1 {
                let sx = pair.star[0].inside(ix);
                let ox = pair.one[0].inside(ix);
                for iy in rng[1].0..=rng[1].1 {
                    let sxy = sx && pair.star[1].inside(iy);
                    let oxy = ox && pair.one[1].inside(iy);
                    for iz in rng[2].0..=rng[2].1 {
                        let s_ok = sxy && pair.star[2].inside(iz);
                        let o_ok = oxy && pair.one[2].inside(iz);
                        let out = ((ix * ni + iy) * ni + iz) as usize;
                        let src = (((ix - m[0]) * ni + (iy - m[1])) * ni + iz - m[2]) as usize;
                        let local = out - x0 * n * n;
                        let g_row = &mut gain[local * l..(local + 1) * l];
                        let f_row = &mut freq[local * l..(local + 1) * l];
                        let f1 = &self.values[src * l..(src + 1) * l];
                        let w = pair.weight;
                        if !QUANTUM {
                            for (acc, v) in f_row.iter_mut().zip(f1) {
                                *acc += w * v;
                            }
                            if !(s_ok && o_ok) {
                                continue;
                            }
                        }
                        if s_ok {
                            let base = padded(ix - pair.star[0].k, iy - pair.star[1].k, iz - pair.star[2].k, p);
                            gather(&self.reduced, base, l, &offs, &star_w, &mut a_buf);
                        } else {
                            a_buf.iter_mut().for_each(|x| *x = 0.0);
                        }
                        if o_ok {
                            let base = padded(ix - pair.one[0].k, iy - pair.one[1].k, iz - pair.one[2].k, p);
                            gather(&self.reduced, base, l, &offs, &one_w, &mut b_buf);
                        } else {
                            b_buf.iter_mut().for_each(|x| *x = 0.0);
                        }
                        let ke = w * self.env_nodes[out] * self.env_nodes[src];
                        if QUANTUM {
                            let (ux, uy, uz) = (ix as usize, iy as usize, iz as usize);
                            let es = e_star[0][ux] * e_star[1][uy] * e_star[2][uz];
                            let eo = e_one[0][ux] * e_one[1][uy] * e_one[2][uz];
                            let fv = &self.values[out * l..(out + 1) * l];
                            for lane in 0..l {
                                let (a, b) = (a_buf[lane], b_buf[lane]);
                                let q = 1.0 + cubic * (fv[lane] + f1[lane]);
                                g_row[lane] += ke * a * b * q;
                                let qf = 1.0 + cubic * (es * a + eo * b);
                                f_row[lane] += w * f1[lane] * qf;
                            }
                        } else {
                            for ((acc, a), b) in g_row.iter_mut().zip(&a_buf).zip(&b_buf) {
                                *acc += ke * a * b;
                            }
                        }
                    }
                }
            }
        });
    }
}

fn padded(i: i64, j: i64, k: i64, p: i64) -> usize {
    ((i * p + j) * p + k) as usize
}

fn tap_weights(s: &[AxisShift; 3]) -> [f64; 8] {
    std::array::from_fn(|c| s[0].w[c >> 2 & 1] * s[1].w[c >> 1 & 1] * s[2].w[c & 1])
}

fn tap_offsets(p: i64, l: usize) -> [usize; 8] {
    std::array::from_fn(|c| {
        let (dx, dy, dz) = ((c >> 2 & 1) as i64, (c >> 1 & 1) as i64, (c & 1) as i64);
        ((dx * p + dy) * p + dz) as usize * l
    })
}

#[inline(always)]
fn gather(data: &[f64], base: usize, l: usize, offs: &[usize; 8], w: &[f64; 8], out: &mut [f64]) {
    let start = base * l;
    let rows: [&[f64]; 8] = std::array::from_fn(|c| &data[start + offs[c]..start + offs[c] + l]);
    for lane in 0..l {
        out[lane] = w[0] * rows[0][lane]
            + w[1] * rows[1][lane]
            + w[2] * rows[2][lane]
            + w[3] * rows[3][lane]
            + w[4] * rows[4][lane]
            + w[5] * rows[5][lane]
            + w[6] * rows[6][lane]
            + w[7] * rows[7][lane];
    }
}

/// A closed form as a sum of separable Gaussians, optionally passed through
/// `s -> s / (1 - s)` (the Bose-Einstein case).
#[derive(Debug, Clone)]
struct Separable {
    bumps: Vec<Bump>,
    bose: bool,
}

impl Separable {
    fn from_closed(c: &ClosedForm) -> Self {
        match c {
            ClosedForm::BoseEinstein { fugacity, beta } => Separable {
                bumps: vec![Bump { amplitude: *fugacity, center: Default::default(), beta: *beta }],
                bose: true,
            },
            _ => Separable { bumps: c.bumps().expect("gaussian family"), bose: false },
        }
    }
}

/// Bumps of several lanes laid out `[bump][lane]`; lanes with fewer bumps
/// are padded with zero amplitude.
struct LaneBumps {
    nb: usize,
    lanes: usize,
    amplitude: Vec<f64>,
    beta: Vec<f64>,
    center: [Vec<f64>; 3],
    bose: Vec<bool>,
}

impl LaneBumps {
    fn new(sep: &[Separable]) -> Self {
        let lanes = sep.len();
        let nb = sep.iter().map(|s| s.bumps.len()).max().unwrap_or(1).max(1);
        let mut amplitude = vec![0.0; nb * lanes];
        let mut beta = vec![1.0; nb * lanes];
        let mut center: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; nb * lanes]);
        for (lane, s) in sep.iter().enumerate() {
            for (b, bump) in s.bumps.iter().enumerate() {
                let k = b * lanes + lane;
                amplitude[k] = bump.amplitude;
                beta[k] = bump.beta;
                for a in 0..3 {
                    center[a][k] = bump.center[a];
                }
            }
        }
        LaneBumps { nb, lanes, amplitude, beta, center, bose: sep.iter().map(|s| s.bose).collect() }
    }

    fn table(&self, n: usize) -> [Vec<f64>; 3] {
        std::array::from_fn(|_| vec![0.0; n * self.nb * self.lanes])
    }

    /// Fills rows `rng` of the per-axis factor tables `[axis][row][bump][lane]`
    /// for sample coordinates `-r + h (i - shift)`. Each Gaussian row is
    /// generated by a ratio recurrence running outward from the row nearest
    /// its center, so values only shrink and never overflow.
    fn fill(&self, t: &mut [Vec<f64>; 3], shifts: [f64; 3], rng: [(i64, i64); 3], h: f64, r: f64) {
        let width = self.nb * self.lanes;
        for a in 0..3 {
            let (lo, hi) = (rng[a].0 as usize, rng[a].1 as usize);
            let x0 = -r - h * shifts[a];
            let tab = &mut t[a];
            for k in 0..width {
                let beta = self.beta[k];
                let amp = if a == 0 { self.amplitude[k] } else { 1.0 };
                let d0 = x0 - self.center[a][k];
                // Row whose coordinate is closest to the center.
                let start = (-d0 / h).round().clamp(lo as f64, hi as f64) as usize;
                let d = d0 + h * start as f64;
                let e = amp * (-beta * d * d).exp();
                tab[start * width + k] = e;
                let q = (-2.0 * beta * h * h).exp();
                let mut val = e;
                let mut ratio = (-beta * h * (2.0 * d + h)).exp();
                for i in start + 1..=hi {
                    val *= ratio;
                    ratio *= q;
                    tab[i * width + k] = val;
                }
                let mut val = e;
                let mut ratio = (beta * h * (2.0 * d - h)).exp();
                for i in (lo..start).rev() {
                    val *= ratio;
                    ratio *= q;
                    tab[i * width + k] = val;
                }
            }
        }
    }
}

/// Which sums a [`ClosedSweep`] accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedSums {
    /// `gain` and `frequency` only.
    Classical,
    /// All five sums.
    All,
}

/// Whole-grid sums for pairs `(f, g)` of closed-form profiles, evaluated
/// exactly at the post-collisional velocities. Each lane accumulates
/// * `gain`: `sum w f(v*) g(v1*)`
/// * `g1`: `sum w f(v1) f(v*) g(v1*)`
/// * `frequency`: `sum w g(v1)`
/// * `l0`: `sum w g(v1) f(v*)`
/// * `l1`: `sum w g(v1) f(v1*)`
///
/// With [`ClosedSums::Classical`] the last three stay zero.
pub struct ClosedSweep {
    f: LaneBumps,
    g: LaneBumps,
    f_sep: Vec<Separable>,
    g_sep: Vec<Separable>,
    sums: ClosedSums,
}

pub struct ClosedSweepOutput {
    pub lanes: usize,
    pub f_nodes: Vec<f64>,
    pub gain: Vec<f64>,
    pub g1: Vec<f64>,
    pub frequency: Vec<f64>,
    pub l0: Vec<f64>,
    pub l1: Vec<f64>,
}

impl ClosedSweepOutput {
    fn lane(buf: &[f64], lanes: usize, l: usize) -> Vec<f64> {
        buf.iter().skip(l).step_by(lanes).copied().collect()
    }

    pub fn gain_lane(&self, l: usize) -> Vec<f64> {
        Self::lane(&self.gain, self.lanes, l)
    }

    pub fn frequency_lane(&self, l: usize) -> Vec<f64> {
        Self::lane(&self.frequency, self.lanes, l)
    }

    pub fn g1_lane(&self, l: usize) -> Vec<f64> {
        Self::lane(&self.g1, self.lanes, l)
    }

    pub fn l0_lane(&self, l: usize) -> Vec<f64> {
        Self::lane(&self.l0, self.lanes, l)
    }

    pub fn l1_lane(&self, l: usize) -> Vec<f64> {
        Self::lane(&self.l1, self.lanes, l)
    }

    pub fn f_lane(&self, l: usize) -> Vec<f64> {
        Self::lane(&self.f_nodes, self.lanes, l)
    }

    /// `Q+[f]` and `R[f]` for a lane built with `g = f`.
    pub fn nordheim_lane(&self, l: usize, mode: Mode) -> (Vec<f64>, Vec<f64>) {
        let c = mode.cubic();
        let k = self.lanes;
        let nodes = self.gain.len() / k;
        let mut gain = Vec::with_capacity(nodes);
        let mut freq = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let idx = i * k + l;
            let fv = self.f_nodes[idx];
            gain.push(self.gain[idx] + c * (fv * self.gain[idx] + self.g1[idx]));
            freq.push(self.frequency[idx] + c * (self.l0[idx] + self.l1[idx]));
        }
        (gain, freq)
    }
}

impl ClosedSweep {
    pub fn new(pairs: &[(ClosedForm, ClosedForm)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Config("closed sweep needs at least one pair".into()));
        }
        let f_sep: Vec<Separable> = pairs.iter().map(|(f, _)| Separable::from_closed(f)).collect();
        let g_sep: Vec<Separable> = pairs.iter().map(|(_, g)| Separable::from_closed(g)).collect();
        Ok(ClosedSweep {
            f: LaneBumps::new(&f_sep),
            g: LaneBumps::new(&g_sep),
            f_sep,
            g_sep,
            sums: ClosedSums::All,
        })
    }

    pub fn with_sums(mut self, sums: ClosedSums) -> Self {
        self.sums = sums;
        self
    }

    pub fn lanes(&self) -> usize {
        self.f_sep.len()
    }

    pub fn run(&self, params: &OperatorParams) -> ClosedSweepOutput {
        let grid = params.grid;
        let n = grid.points_per_axis();
        let l = self.lanes();
        let nodes = grid.len();
        let at_nodes = |sep: &[Separable]| -> Vec<f64> {
            (0..nodes)
                .flat_map(|i| {
                    let v = grid.node(i);
                    sep.iter().map(move |s| eval_separable(s, v)).collect::<Vec<_>>()
                })
                .collect()
        };
        let f_nodes = at_nodes(&self.f_sep);
        let g_nodes = at_nodes(&self.g_sep);
        let slab = n * n * l;
        let mut bufs: Vec<Vec<f64>> = (0..5).map(|_| vec![0.0; n * slab]).collect();
        let chunks = x_chunks(n);
        {
            let mut split: Vec<std::vec::IntoIter<&mut [f64]>> =
                bufs.iter_mut().map(|b| split_slabs(b, &chunks, slab).into_iter()).collect();
            let per_chunk: Vec<[&mut [f64]; 5]> = (0..chunks.len())
                .map(|_| std::array::from_fn(|b| split[b].next().expect("one slab per chunk")))
                .collect();
            chunks.par_iter().zip(per_chunk).for_each(|(&(x0, x1), out)| {
                self.run_chunk(params, x0, x1, &f_nodes, &g_nodes, out);
            });
        }
        let [gain, g1, frequency, l0, l1]: [Vec<f64>; 5] = bufs.try_into().map_err(|_| ()).expect("five buffers");
        ClosedSweepOutput { lanes: l, f_nodes, gain, g1, frequency, l0, l1 }
    }

    fn run_chunk(
        &self,
        params: &OperatorParams,
        x0: usize,
        x1: usize,
        f_nodes: &[f64],
        g_nodes: &[f64],
        out: [&mut [f64]; 5],
    ) {
        let [gain, g1, freq, l0, l1] = out;
        let all = self.sums == ClosedSums::All;
        let grid = params.grid;
        let n = grid.points_per_axis();
        let ni = n as i64;
        let l = self.lanes();
        let h = grid.spacing();
        let r = grid.radius();
        let (fb, gb) = (self.f.nb, self.g.nb);
        let mut fs = vec![0.0; l];
        let mut fo = vec![0.0; l];
        let mut go = vec![0.0; l];
        let (mut fs_xy, mut fo_xy, mut go_xy) = (vec![0.0; fb * l], vec![0.0; fb * l], vec![0.0; gb * l]);
        let (mut tf_s, mut tf_o, mut tg_o) = (self.f.table(n), self.f.table(n), self.g.table(n));
        for_each_pair(params, x0 as i64, x1 as i64, |m, rng, pair| {
            let ss = [pair.star[0].shift, pair.star[1].shift, pair.star[2].shift];
            let so = [pair.one[0].shift, pair.one[1].shift, pair.one[2].shift];
            self.f.fill(&mut tf_s, ss, rng, h, r);
            if all {
                self.f.fill(&mut tf_o, so, rng, h, r);
            }
            self.g.fill(&mut tg_o, so, rng, h, r);
            let w = pair.weight;
            for ix in rng[0].0..=rng[0].1 {
                for iy in rng[1].0..=rng[1].1 {
                    let (ux, uy) = (ix as usize, iy as usize);
                    row_product(&tf_s, fb * l, ux, uy, &mut fs_xy);
                    if all {
                        row_product(&tf_o, fb * l, ux, uy, &mut fo_xy);
                    }
                    row_product(&tg_o, gb * l, ux, uy, &mut go_xy);
                    for iz in rng[2].0..=rng[2].1 {
                        let uz = iz as usize;
                        finish(&tf_s[2], &fs_xy, fb, l, uz, &self.f.bose, &mut fs);
                        finish(&tg_o[2], &go_xy, gb, l, uz, &self.g.bose, &mut go);
                        let out = ((ix * ni + iy) * ni + iz) as usize;
                        let src = (((ix - m[0]) * ni + (iy - m[1])) * ni + iz - m[2]) as usize;
                        let local = (out - x0 * n * n) * l;
                        let g1n = &g_nodes[src * l..(src + 1) * l];
                        if !all {
                            for lane in 0..l {
                                gain[local + lane] += w * fs[lane] * go[lane];
                                freq[local + lane] += w * g1n[lane];
                            }
                            continue;
                        }
                        finish(&tf_o[2], &fo_xy, fb, l, uz, &self.f.bose, &mut fo);
                        let f1 = &f_nodes[src * l..(src + 1) * l];
                        for lane in 0..l {
                            let t = w * fs[lane] * go[lane];
                            gain[local + lane] += t;
                            g1[local + lane] += t * f1[lane];
                            let wg = w * g1n[lane];
                            freq[local + lane] += wg;
                            l0[local + lane] += wg * fs[lane];
                            l1[local + lane] += wg * fo[lane];
                        }
                    }
                }
            }
        });
    }
}

#[inline(always)]
fn row_product(t: &[Vec<f64>; 3], width: usize, ix: usize, iy: usize, out: &mut [f64]) {
    let rx = &t[0][ix * width..(ix + 1) * width];
    let ry = &t[1][iy * width..(iy + 1) * width];
    for ((o, a), b) in out.iter_mut().zip(rx).zip(ry) {
        *o = a * b;
    }
}

#[inline(always)]
fn finish(tz: &[f64], xy: &[f64], nb: usize, l: usize, iz: usize, bose: &[bool], out: &mut [f64]) {
    let rz = &tz[iz * nb * l..(iz + 1) * nb * l];
    for ((o, a), b) in out.iter_mut().zip(&xy[..l]).zip(&rz[..l]) {
        *o = a * b;
    }
    for b in 1..nb {
        let (xb, zb) = (&xy[b * l..(b + 1) * l], &rz[b * l..(b + 1) * l]);
        for lane in 0..l {
            out[lane] += xb[lane] * zb[lane];
        }
    }
    for lane in 0..l {
        if bose[lane] {
            out[lane] /= 1.0 - out[lane];
        }
    }
}

fn eval_separable(s: &Separable, v: crate::geometry::Vec3) -> f64 {
    let sum: f64 = s.bumps.iter().map(|b| b.eval(v)).sum();
    if s.bose {
        sum / (1.0 - sum)
    } else {
        sum
    }
}
