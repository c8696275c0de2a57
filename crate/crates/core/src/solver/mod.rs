//! Space-homogeneous solver: gain-only Picard construction and the
//! Kaniel-Shinbrot monotone sandwich, both iterating on whole trajectories
//! stored at the nodes of a uniform time mesh.
//!
//! Every time integral is a trapezoid sum on the mesh, including the
//! cumulative frequency integrals inside the exponential weights. All grid
//! functions of one run share the envelope of the initial data, so the
//! discrete gain and frequency are the same positive, monotone maps at every
//! iteration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{
    bracket_pow, compensated_sum, weighted_lp_norm_values, Distribution, Envelope, GridData, VelocityGrid,
    WeightedNormSpec,
};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::operators::{GridSweep, Mode, OperatorParams};

/// Nesting and positivity slack relative to the largest trajectory value.
pub const MONO_RELATIVE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeMesh {
    t_final: f64,
    steps: usize,
}

impl TimeMesh {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Range(format!("final time must be positive, got {t_final}")));
        }
        if steps < 4 {
            return Err(Error::Range(format!("need at least 4 time steps, got {steps}")));
        }
        Ok(TimeMesh { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// Number of time nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    pub fn refined(&self) -> Self {
        TimeMesh { t_final: self.t_final, steps: 2 * self.steps }
    }
}

/// Mass, momentum and energy `sum h^3 f (1, v, |v|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mass: f64,
    pub momentum: Vec3,
    pub energy: f64,
}

impl Moments {
    pub fn of(values: &[f64], grid: &VelocityGrid) -> Self {
        let h3 = grid.cell_volume();
        let moment = |phi: &dyn Fn(Vec3) -> f64| {
            h3 * compensated_sum(values.iter().enumerate().map(|(i, x)| x * phi(grid.node(i))))
        };
        Moments {
            mass: moment(&|_| 1.0),
            momentum: Vec3::new(moment(&|v| v[0]), moment(&|v| v[1]), moment(&|v| v[2])),
            energy: moment(&|v| v.norm_sq()),
        }
    }
}

/// Grid functions at every node of a time mesh.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: VelocityGrid,
    envelope: Option<Envelope>,
    mesh: TimeMesh,
    values: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(grid: VelocityGrid, envelope: Option<Envelope>, mesh: TimeMesh, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != mesh.len() || values.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::Config("trajectory needs one grid function per time node".into()));
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("trajectory values must be finite".into()));
        }
        Ok(Trajectory { grid, envelope, mesh, values })
    }

    /// The initial data held constant in time.
    pub fn constant(data: &GridData, mesh: TimeMesh) -> Self {
        Trajectory {
            grid: *data.grid(),
            envelope: data.envelope(),
            mesh,
            values: vec![data.values().to_vec(); mesh.len()],
        }
    }

    pub fn zeros(grid: VelocityGrid, envelope: Option<Envelope>, mesh: TimeMesh) -> Self {
        Trajectory { grid, envelope, mesh, values: vec![vec![0.0; grid.len()]; mesh.len()] }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    pub fn mesh(&self) -> &TimeMesh {
        &self.mesh
    }

    pub fn values(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn at(&self, j: usize) -> Result<GridData> {
        GridData::new(self.grid, self.values[j].clone(), self.envelope)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().fold(f64::INFINITY, |m, &x| m.min(x))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().flatten().all(|&x| x >= 0.0)
    }

    fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|&x| x == 0.0)
    }

    pub fn moments(&self) -> Vec<Moments> {
        self.values.iter().map(|v| Moments::of(v, &self.grid)).collect()
    }

    pub fn conservation_rows(&self) -> Vec<ConservationRow> {
        self.moments()
            .iter()
            .enumerate()
            .map(|(j, m)| ConservationRow {
                t: self.mesh.time(j),
                mass: m.mass,
                momentum_x: m.momentum[0],
                momentum_y: m.momentum[1],
                momentum_z: m.momentum[2],
                energy: m.energy,
            })
            .collect()
    }

    /// Largest relative change of mass, momentum and energy from time zero.
    /// Momentum changes are measured against `sqrt(mass * energy)`, which
    /// bounds the momentum of any nonnegative density.
    pub fn conservation_drift(&self) -> ConservationDrift {
        let m = self.moments();
        let m0 = m[0];
        let pscale = (m0.mass * m0.energy).sqrt();
        let rel = |a: f64, s: f64| if s > 0.0 { a / s } else { a };
        let mut d = ConservationDrift { mass: 0.0, momentum: 0.0, energy: 0.0 };
        for mj in &m {
            d.mass = d.mass.max(rel((mj.mass - m0.mass).abs(), m0.mass));
            d.momentum = d.momentum.max(rel((mj.momentum - m0.momentum).norm(), pscale));
            d.energy = d.energy.max(rel((mj.energy - m0.energy).abs(), m0.energy));
        }
        d
    }

    /// Pointwise mean of two trajectories on the same mesh.
    pub fn midpoint(&self, other: &Trajectory) -> Trajectory {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
            .collect();
        Trajectory { values, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationDrift {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl ConservationDrift {
    pub fn max(&self) -> f64 {
        self.mass.max(self.momentum).max(self.energy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationRow {
    pub t: f64,
    pub mass: f64,
    pub momentum_x: f64,
    pub momentum_y: f64,
    pub momentum_z: f64,
    pub energy: f64,
}

/// Tolerances and iteration caps. `picard_tol` and `ks_tol` are relative to
/// the largest value of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub picard_tol: f64,
    pub max_sweeps: usize,
    pub ks_tol: f64,
    pub max_iters: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { picard_tol: 1e-13, max_sweeps: 40, ks_tol: 1e-8, max_iters: 30 }
    }
}

/// Nodal values and envelope of the initial data on the operator grid. The
/// envelope stays fixed for the whole run.
pub fn initial_grid_data(f0: &Distribution, grid: &VelocityGrid) -> Result<GridData> {
    match f0 {
        Distribution::Closed(c) => Ok(GridData::sample(*grid, c)),
        Distribution::Grid(g) => {
            let values = f0.nodal_values(grid);
            let env = g.envelope().or_else(|| Envelope::from_moments(grid, &values));
            GridData::new(*grid, values, env)
        }
    }
}

/// Gain and frequency of every time node of several trajectories in one
/// grid sweep. Identically zero trajectories are skipped; their gain and
/// frequency are zero.
fn evaluate(params: &OperatorParams, mode: Mode, trajs: &[&Trajectory]) -> Result<Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)>> {
    let live: Vec<usize> = (0..trajs.len()).filter(|&i| !trajs[i].is_zero()).collect();
    let n_nodes = params.grid.len();
    let mut out: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = trajs
        .iter()
        .map(|t| (vec![vec![0.0; n_nodes]; t.mesh.len()], vec![vec![0.0; n_nodes]; t.mesh.len()]))
        .collect();
    if live.is_empty() {
        return Ok(out);
    }
    let lanes: Vec<&[f64]> = live.iter().flat_map(|&i| trajs[i].values.iter().map(|v| v.as_slice())).collect();
    let sweep = GridSweep::new(params.grid, trajs[live[0]].envelope, &lanes)?.run(params, mode)?;
    let mut lane = 0;
    for &i in &live {
        for j in 0..trajs[i].mesh.len() {
            out[i].0[j] = sweep.gain_lane(lane);
            out[i].1[j] = sweep.frequency_lane(lane);
            lane += 1;
        }
    }
    Ok(out)
}

/// `f0 exp(-int_0^t R) + int_0^t G(s) exp(-int_s^t R) ds` at every time node,
/// trapezoid in time, nodewise over the grid. `R = 0` gives the gain-only
/// Duhamel map.
fn duhamel(f0: &[f64], gain: &[Vec<f64>], freq: &[Vec<f64>], mesh: &TimeMesh) -> Vec<Vec<f64>> {
    let dt = mesh.dt();
    let nt = mesh.len();
    let nodes = f0.len();
    let mut out = vec![vec![0.0; nodes]; nt];
    let cols: Vec<Vec<f64>> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let mut cum = vec![0.0; nt];
            for j in 1..nt {
                cum[j] = cum[j - 1] + 0.5 * dt * (freq[j - 1][k] + freq[j][k]);
            }
            (0..nt)
                .map(|j| {
                    let mut acc = f0[k] * (-cum[j]).exp();
                    for i in 0..=j {
                        let w = if j == 0 {
                            0.0
                        } else if i == 0 || i == j {
                            0.5 * dt
                        } else {
                            dt
                        };
                        acc += w * gain[i][k] * (cum[i] - cum[j]).exp();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    for (k, col) in cols.iter().enumerate() {
        for j in 0..nt {
            out[j][k] = col[j];
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct GainOnlyOutcome {
    pub trajectory: Trajectory,
    pub sweeps: usize,
    pub last_change: f64,
}

/// Picard iteration for `f = f0 + int_0^t Q+[f]` on whole trajectories,
/// starting from the constant trajectory `f0`. The iterates must increase
/// nodewise within the monotonicity slack.
pub fn gain_only_solve(
    f0: &Distribution,
    params: &OperatorParams,
    mesh: TimeMesh,
    mode: Mode,
    settings: &SolverSettings,
) -> Result<GainOnlyOutcome> {
    let data = initial_grid_data(f0, &params.grid)?;
    if !data.is_nonnegative() {
        return Err(Error::Domain("initial data must be nonnegative".into()));
    }
    let scale = data.values().iter().fold(0.0f64, |m, x| m.max(*x));
    let eps = MONO_RELATIVE * scale;
    let mut current = Trajectory::constant(&data, mesh);
    let zero_freq = vec![vec![0.0; params.grid.len()]; mesh.len()];
    let mut last_change = f64::INFINITY;
    for sweep in 1..=settings.max_sweeps {
        let (gain, _) = evaluate(params, mode, &[&current])?.remove(0);
        let next = duhamel(data.values(), &gain, &zero_freq, &mesh);
        let mut change = 0.0f64;
        for (j, (a, b)) in current.values.iter().zip(&next).enumerate() {
            for (k, (x, y)) in a.iter().zip(b).enumerate() {
                if !y.is_finite() {
                    return Err(Error::AssertionFailure(format!(
                        "gain-only iterate {sweep} is not finite at time index {j}, node {k}"
                    )));
                }
                if y - x < -eps || *y < -eps {
                    return Err(Error::AssertionFailure(format!(
                        "gain-only iterate {sweep} decreased at time index {j}, node {k} by {:.3e}",
                        x - y
                    )));
                }
                change = change.max((y - x).abs());
            }
        }
        current.values = next;
        last_change = change;
        if change <= settings.picard_tol * scale {
            return Ok(GainOnlyOutcome { trajectory: current, sweeps: sweep, last_change });
        }
    }
    Err(Error::NoConvergence { sweeps: settings.max_sweeps, last_change })
}

/// Diagnostics of one Kaniel-Shinbrot iteration.
#[derive(Debug, Clone, Serialize)]
pub struct SchemeState {
    pub iteration: usize,
    /// `max (u_n - l_n)` over times and nodes.
    pub gap_sup: f64,
    /// `max (l_{n-1} - l_n, l_n - u_n, u_n - u_{n-1})` over times and nodes.
    pub nesting_violation: f64,
    /// Smallest value of `l_n` and `u_n`.
    pub min_value: f64,
    /// Moments of `(l_n + u_n)/2` per time node.
    pub conservation: Vec<Moments>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTraceRow {
    pub n: usize,
    #[serde(rename = "gapSup")]
    pub gap_sup: f64,
    #[serde(rename = "nestingViolation")]
    pub nesting_violation: f64,
    #[serde(rename = "minValue")]
    pub min_value: f64,
}

#[derive(Debug, Clone)]
pub struct KsOutcome {
    /// `(l + u)/2` at the last iteration.
    pub solution: Trajectory,
    pub lower: Trajectory,
    pub upper: Trajectory,
    pub history: Vec<SchemeState>,
    pub gain_only_sweeps: usize,
    /// Largest value of the gain-only solution.
    pub scale: f64,
    pub eps_mono: f64,
}

impl KsOutcome {
    pub fn trace(&self) -> Vec<KsTraceRow> {
        self.history
            .iter()
            .map(|s| KsTraceRow {
                n: s.iteration,
                gap_sup: s.gap_sup,
                nesting_violation: s.nesting_violation,
                min_value: s.min_value,
            })
            .collect()
    }

    pub fn gap_is_monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1].gap_sup <= w[0].gap_sup)
    }
}

/// Kaniel-Shinbrot iteration from `l_0 = 0` and `u_0` the gain-only
/// solution:
///
/// `l_n = f0 exp(-int R[u_{n-1}]) + int Q+[l_{n-1}] exp(-int_s^t R[u_{n-1}])`
/// and the same for `u_n` with the roles of `l` and `u` swapped. Every
/// iteration checks `l_{n-1} <= l_n <= u_n <= u_{n-1}` within the
/// monotonicity slack; the first one is the beginning condition.
pub fn ks_solve(
    f0: &Distribution,
    params: &OperatorParams,
    mesh: TimeMesh,
    mode: Mode,
    settings: &SolverSettings,
) -> Result<KsOutcome> {
    let gain_only = gain_only_solve(f0, params, mesh, mode, settings)?;
    let upper0 = gain_only.trajectory;
    let data = upper0.at(0)?;
    let scale = upper0.max_value();
    let eps = MONO_RELATIVE * scale;
    let tol = settings.ks_tol * data.values().iter().fold(0.0f64, |m, x| m.max(*x));
    let mut lower = Trajectory::zeros(params.grid, upper0.envelope, mesh);
    let mut upper = upper0;
    let mut history = Vec::new();
    for n in 1..=settings.max_iters {
        let mut ev = evaluate(params, mode, &[&lower, &upper])?;
        let (gain_u, freq_u) = ev.pop().expect("two trajectories");
        let (gain_l, freq_l) = ev.pop().expect("two trajectories");
        let next_l = duhamel(data.values(), &gain_l, &freq_u, &mesh);
        let next_u = duhamel(data.values(), &gain_u, &freq_l, &mesh);
        let mut worst = (0.0f64, 0usize, 0usize);
        let mut gap = f64::NEG_INFINITY;
        let mut min_value = f64::INFINITY;
        for j in 0..mesh.len() {
            for k in 0..params.grid.len() {
                let (lp, up) = (lower.values[j][k], upper.values[j][k]);
                let (l, u) = (next_l[j][k], next_u[j][k]);
                if !(l.is_finite() && u.is_finite()) {
                    return Err(Error::AssertionFailure(format!(
                        "iterate {n} is not finite at time index {j}, node {k}"
                    )));
                }
                let v = (lp - l).max(l - u).max(u - up);
                if v > worst.0 || (j == 0 && k == 0 && n == 1) {
                    worst = (v.max(worst.0), j, k);
                }
                gap = gap.max(u - l);
                min_value = min_value.min(l).min(u);
            }
        }
        if worst.0 > eps {
            return Err(Error::NestingViolation { iteration: n, time_index: worst.1, node: worst.2, amount: worst.0 });
        }
        if min_value < -eps {
            return Err(Error::AssertionFailure(format!("iterate {n} has negative value {min_value:.3e}")));
        }
        lower.values = next_l;
        upper.values = next_u;
        let mid = lower.midpoint(&upper);
        history.push(SchemeState {
            iteration: n,
            gap_sup: gap,
            nesting_violation: worst.0,
            min_value,
            conservation: mid.moments(),
        });
        if gap < tol {
            return Ok(KsOutcome {
                solution: mid,
                lower,
                upper,
                history,
                gain_only_sweeps: gain_only.sweeps,
                scale,
                eps_mono: eps,
            });
        }
    }
    let last = history.last().map_or(f64::INFINITY, |s| s.gap_sup);
    Err(Error::NoConvergence { sweeps: settings.max_iters, last_change: last })
}

/// `sup_t ||<v>^(M-1) (f - g)(t)||_inf / ||<v>^(M-1) (f0 - g0)||_inf` for the
/// solutions started from `f0` and `g0`.
pub fn continuity_probe(
    f0: &Distribution,
    g0: &Distribution,
    params: &OperatorParams,
    mesh: TimeMesh,
    mode: Mode,
    settings: &SolverSettings,
    weight: f64,
) -> Result<f64> {
    let grid = params.grid;
    let a0 = initial_grid_data(f0, &grid)?;
    let b0 = initial_grid_data(g0, &grid)?;
    let spec = WeightedNormSpec::new(f64::INFINITY, (weight - 1.0).max(0.0))?;
    let diff_norm = |a: &[f64], b: &[f64]| {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        weighted_lp_norm_values(&d, spec, &grid)
    };
    let denom = diff_norm(a0.values(), b0.values());
    if denom == 0.0 {
        return Err(Error::DegenerateInput("the two initial data coincide on the grid".into()));
    }
    let f = ks_solve(f0, params, mesh, mode, settings)?.solution;
    let g = ks_solve(g0, params, mesh, mode, settings)?.solution;
    let sup = (0..mesh.len()).map(|j| diff_norm(f.values(j), g.values(j))).fold(0.0, f64::max);
    Ok(sup / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub t: f64,
    pub min_value: f64,
    /// `||<v>^M f||_{L^6}`.
    pub weighted_l6: f64,
    /// `||<v>^M f||_{L^inf}`.
    pub weighted_sup: f64,
    /// `||<v>^3 f||_{L^1}`.
    pub moment_l1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub weight: f64,
    pub rows: Vec<MomentRow>,
    /// Smallest value over the trajectory is at least `-1e-10 * max`.
    pub nonnegative: bool,
    /// Every norm stays within `1.1` times its initial value.
    pub bounded: bool,
    /// Largest ratio of a norm to its initial value.
    pub max_growth: f64,
}

pub fn positivity_and_moment_report(traj: &Trajectory, weight: f64) -> Result<MomentReport> {
    let grid = traj.grid;
    let l6 = WeightedNormSpec::new(6.0, weight)?;
    let sup = WeightedNormSpec::new(f64::INFINITY, weight)?;
    let l1 = WeightedNormSpec::new(1.0, 3.0)?;
    let rows: Vec<MomentRow> = (0..traj.mesh.len())
        .map(|j| {
            let v = traj.values(j);
            MomentRow {
                t: traj.mesh.time(j),
                min_value: v.iter().fold(f64::INFINITY, |m, &x| m.min(x)),
                weighted_l6: weighted_lp_norm_values(v, l6, &grid),
                weighted_sup: weighted_lp_norm_values(v, sup, &grid),
                moment_l1: weighted_lp_norm_values(v, l1, &grid),
            }
        })
        .collect();
    let first = rows[0];
    let growth = |a: f64, b: f64| if b > 0.0 { a / b } else if a > 0.0 { f64::INFINITY } else { 1.0 };
    let max_growth = rows
        .iter()
        .map(|r| {
            growth(r.weighted_l6, first.weighted_l6)
                .max(growth(r.weighted_sup, first.weighted_sup))
                .max(growth(r.moment_l1, first.moment_l1))
        })
        .fold(1.0, f64::max);
    let slack = MONO_RELATIVE * traj.max_value();
    Ok(MomentReport {
        weight,
        nonnegative: rows.iter().all(|r| r.min_value >= -slack),
        bounded: max_growth <= 1.1,
        max_growth,
        rows,
    })
}

/// Largest nodewise deviation from the initial data relative to its maximum.
pub fn relative_deviation(traj: &Trajectory) -> f64 {
    let v0 = traj.values(0);
    let scale = v0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dev = (0..traj.mesh.len())
        .flat_map(|j| traj.values(j).iter().zip(v0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    if scale > 0.0 {
        dev / scale
    } else {
        dev
    }
}

/// Weighted sup norm `||<v>^k f||_inf` of nodal values, used by reports.
pub fn weighted_sup(values: &[f64], k: f64, grid: &VelocityGrid) -> f64 {
    values.iter().enumerate().map(|(i, f)| bracket_pow(grid.node(i), k) * f.abs()).fold(0.0, f64::max)
}
