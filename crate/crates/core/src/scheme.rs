//! Upwind finite-volume scheme with explicit Euler stepping.
//!
//! Edges are indexed `0..=N`; edge `e` separates cells `e - 1` and `e`, and the
//! two boundary edges carry zero flux.

use crate::error::{invalid, Error, Result, Species};
use crate::grid::{CellField, Grid};
use crate::potential::{ClosedForm, KernelTable, Kernels, ModelParams};
use crate::state::SystemState;
use serde::{Deserialize, Serialize};

/// Cells below this after a step count as a CFL violation; values in between are flushed to zero.
pub const REJECT_BELOW: f64 = -1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVelocities {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFluxes {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControls {
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub steady_tol: f64,
    pub t_end: f64,
    /// Time between recorded snapshots; zero records only the first and last state.
    pub snapshot_interval: f64,
    /// Also cap the step by the explicit-diffusion bound of [`diffusive_dt`].
    /// Without it the positivity bound alone lets grid-scale oscillations grow
    /// wherever the total density is smooth and positive.
    pub diffusion_limit: bool,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            cfl_safety: 0.9,
            dt_max: 0.1,
            steady_tol: 1e-8,
            t_end: 100.0,
            snapshot_interval: 0.0,
            diffusion_limit: true,
        }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(invalid(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        for (name, v) in [
            ("dt_max", self.dt_max),
            ("steady_tol", self.steady_tol),
            ("t_end", self.t_end),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.snapshot_interval.is_finite() && self.snapshot_interval >= 0.0) {
            return Err(invalid("snapshot_interval must be non-negative"));
        }
        Ok(())
    }
}

/// Fixed-order dot product over eight interleaved partial sums.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 8];
    let chunks = n / 8;
    for c in 0..chunks {
        let (x, y) = (&a[8 * c..8 * c + 8], &b[8 * c..8 * c + 8]);
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for k in 8 * chunks..n {
        tail += a[k] * b[k];
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

fn span_of(values: &[f64]) -> Option<(usize, usize)> {
    let lo = values.iter().position(|&v| v != 0.0)?;
    let hi = values.iter().rposition(|&v| v != 0.0)? + 1;
    Some((lo, hi))
}

/// `dx * sum_k (Wa[i-k] a_k + Wb[i-k] b_k) + eps (a_i + b_i)` for `i` in `rows`.
#[allow(clippy::too_many_arguments)]
fn potential_rows(
    out: &mut [f64],
    rows: std::ops::Range<usize>,
    wa: &KernelTable,
    a: &[f64],
    wb: &KernelTable,
    b: &[f64],
    dx: f64,
    eps: f64,
) {
    let sa = span_of(a);
    let sb = span_of(b);
    for i in rows {
        let ca = sa.map_or(0.0, |(lo, hi)| dot(&wa.row(i)[lo..hi], &a[lo..hi]));
        let cb = sb.map_or(0.0, |(lo, hi)| dot(&wb.row(i)[lo..hi], &b[lo..hi]));
        out[i] = dx * (ca + cb) + eps * (a[i] + b[i]);
    }
}

/// Adds `dx * sum_k (W(x_e - x_k) - W(x_{e-1} - x_k)) a_k` to `out[e]` for `e` in `edges`.
///
/// Quadratic and absolute-value kernels use running sums; others go through
/// the table, one row per cell.
fn add_kernel_differences(
    out: &mut [f64],
    edges: std::ops::Range<usize>,
    table: &KernelTable,
    a: &[f64],
    dx: f64,
    rows: &mut [f64],
) {
    let Some((lo, hi)) = span_of(a) else {
        return;
    };
    if edges.is_empty() {
        return;
    }
    match table.closed_form() {
        Some((ClosedForm::Abs, sign)) => {
            // each k < e contributes +dx, each k >= e contributes -dx
            let total: f64 = a[lo..hi].iter().sum();
            let mut below: f64 = a[lo.min(edges.start)..edges.start].iter().sum();
            let c = sign * dx * dx;
            for e in edges {
                out[e] += c * (2.0 * below - total);
                below += a[e];
            }
        }
        Some((ClosedForm::Quadratic, sign)) => {
            // difference is dx^2 (e - 1/2 - k); moments taken about the span start
            let s0: f64 = a[lo..hi].iter().sum();
            let s1: f64 = a[lo..hi].iter().enumerate().map(|(j, &v)| j as f64 * v).sum();
            let c = sign * dx * dx * dx;
            for e in edges {
                out[e] += c * ((e as f64 - 0.5 - lo as f64) * s0 - s1);
            }
        }
        None => {
            let first = edges.start - 1;
            for i in first..edges.end {
                rows[i] = dot(&table.row(i)[lo..hi], &a[lo..hi]);
            }
            for e in edges {
                out[e] += dx * (rows[e] - rows[e - 1]);
            }
        }
    }
}

fn check_lengths(state: &SystemState, kernels: &Kernels) -> Result<()> {
    let n = state.grid.len();
    if state.rho.len() != n || state.eta.len() != n || kernels.cells() != n {
        return Err(invalid(format!(
            "length mismatch: grid {n}, rho {}, eta {}, kernels {}",
            state.rho.len(),
            state.eta.len(),
            kernels.cells()
        )));
    }
    Ok(())
}

/// The potentials `xi` and `zeta` on every cell.
pub fn compute_potential_fields(state: &SystemState, kernels: &Kernels, params: &ModelParams) -> Result<PotentialField> {
    check_lengths(state, kernels)?;
    let n = state.grid.len();
    let dx = state.grid.dx();
    let (rho, eta) = (state.rho.values(), state.eta.values());
    let mut xi = vec![0.0; n];
    let mut zeta = vec![0.0; n];
    potential_rows(&mut xi, 0..n, &kernels.w11, rho, &kernels.w12, eta, dx, params.epsilon);
    potential_rows(&mut zeta, 0..n, &kernels.w22, eta, &kernels.w21, rho, dx, params.epsilon);
    Ok(PotentialField { xi, zeta })
}

/// Centred differences of the potentials; boundary edges are zero.
pub fn compute_velocities(fields: &PotentialField, grid: &Grid) -> EdgeVelocities {
    let n = grid.len();
    let dx = grid.dx();
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    for e in 1..n {
        u[e] = -(fields.xi[e] - fields.xi[e - 1]) / dx;
        v[e] = -(fields.zeta[e] - fields.zeta[e - 1]) / dx;
    }
    EdgeVelocities { u, v }
}

fn upwind(vel: &[f64], q: &[f64], out: &mut [f64]) {
    let n = q.len();
    out[0] = 0.0;
    out[n] = 0.0;
    for e in 1..n {
        let w = vel[e];
        out[e] = w.max(0.0) * q[e - 1] + w.min(0.0) * q[e];
    }
}

pub fn compute_fluxes(vel: &EdgeVelocities, state: &SystemState) -> EdgeFluxes {
    let n = state.grid.len();
    let mut f = vec![0.0; n + 1];
    let mut g = vec![0.0; n + 1];
    upwind(&vel.u, state.rho.values(), &mut f);
    upwind(&vel.v, state.eta.values(), &mut g);
    EdgeFluxes { f, g }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `min(dt_max, safety * dx / (2 max(|U|, |V|)))`.
pub fn cfl_dt(vel: &EdgeVelocities, grid: &Grid, controls: &StepControls) -> f64 {
    cfl_from_speed(max_abs(&vel.u).max(max_abs(&vel.v)), grid.dx(), controls)
}

fn cfl_from_speed(speed: f64, dx: f64, controls: &StepControls) -> f64 {
    if speed > 0.0 {
        controls.dt_max.min(controls.cfl_safety * dx / (2.0 * speed))
    } else {
        controls.dt_max
    }
}

/// `safety * dx^2 / (2 eps max(rho + eta))`, or infinity for an empty state.
///
/// Linearising the update about a flat state of total density `s` multiplies
/// the alternating mode by `1 - 4 dt eps s / dx^2`.
pub fn diffusive_dt(state: &SystemState, epsilon: f64, controls: &StepControls) -> f64 {
    let smax = state
        .rho
        .values()
        .iter()
        .zip(state.eta.values())
        .fold(0.0f64, |m, (a, b)| m.max(a + b));
    diffusive_from_peak(smax, epsilon, state.grid.dx(), controls)
}

fn diffusive_from_peak(smax: f64, epsilon: f64, dx: f64, controls: &StepControls) -> f64 {
    if smax > 0.0 {
        controls.cfl_safety * dx * dx / (2.0 * epsilon * smax)
    } else {
        f64::INFINITY
    }
}

/// Flux-difference update in place; flushes roundoff negatives and rejects real ones.
///
/// Subnormal results are flushed to zero as well: exponentially draining
/// tails otherwise spend most of a run in slow subnormal arithmetic.
fn apply_update(q: &mut [f64], flux: &[f64], ratio: f64, species: Species) -> Result<()> {
    for (i, c) in q.iter_mut().enumerate() {
        let next = *c - ratio * (flux[i + 1] - flux[i]);
        if next < f64::MIN_POSITIVE {
            if next < REJECT_BELOW || next.is_nan() {
                return Err(Error::StepRejected {
                    species,
                    cell: i,
                    value: next,
                });
            }
            *c = 0.0;
        } else {
            *c = next;
        }
    }
    Ok(())
}

/// One explicit Euler step of size `dt`.
pub fn step(state: &SystemState, dt: f64, kernels: &Kernels, params: &ModelParams) -> Result<SystemState> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(invalid(format!("time step must be non-negative, got {dt}")));
    }
    let fields = compute_potential_fields(state, kernels, params)?;
    let vel = compute_velocities(&fields, &state.grid);
    let flux = compute_fluxes(&vel, state);
    let ratio = dt / state.grid.dx();
    let mut rho = state.rho.values().to_vec();
    let mut eta = state.eta.values().to_vec();
    apply_update(&mut rho, &flux.f, ratio, Species::Rho)?;
    apply_update(&mut eta, &flux.g, ratio, Species::Eta)?;
    Ok(SystemState {
        grid: state.grid.clone(),
        rho: CellField::from_vec_unchecked(rho),
        eta: CellField::from_vec_unchecked(eta),
        time: state.time + dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    TimeReached,
    SteadyState,
    StepRejected { species: Species, cell: usize, value: f64 },
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::TimeReached => "time_reached",
            Termination::SteadyState => "steady_state",
            Termination::StepRejected { .. } => "step_rejected",
        }
    }
}

/// Receives snapshots as the run proceeds.
pub trait SnapshotSink {
    fn record(&mut self, state: &SystemState) -> Result<()>;
}

impl SnapshotSink for Vec<SystemState> {
    fn record(&mut self, state: &SystemState) -> Result<()> {
        self.push(state.clone());
        Ok(())
    }
}

/// Discards snapshots.
pub struct NullSink;

impl SnapshotSink for NullSink {
    fn record(&mut self, _state: &SystemState) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: SystemState,
    pub termination: Termination,
    pub steps: usize,
    /// Last value of the relative L1 rate of change.
    pub last_rate: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<SystemState>,
    pub final_state: SystemState,
    pub termination: Termination,
    pub steps: usize,
}

impl Trajectory {
    /// Converts a rejected run into its error.
    pub fn into_result(self) -> Result<Self> {
        match self.termination {
            Termination::StepRejected { species, cell, value } => Err(Error::StepRejected { species, cell, value }),
            _ => Ok(self),
        }
    }
}

/// Grid, model and kernel tables bundled for repeated stepping.
#[derive(Debug, Clone)]
pub struct Simulator {
    grid: Grid,
    params: ModelParams,
    kernels: Kernels,
}

struct Work {
    xi: Vec<f64>,
    zeta: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl Simulator {
    pub fn new(params: ModelParams, grid: Grid) -> Self {
        let kernels = Kernels::build(&params, &grid);
        Self { grid, params, kernels }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kernels(&self) -> &Kernels {
        &self.kernels
    }

    /// Velocities restricted to edges touching mass of the species they move.
    ///
    /// Edges between two empty cells carry no flux, so their velocity plays no
    /// part in the update or in the positivity bound.
    fn active_velocities(&self, rho: &[f64], eta: &[f64], w: &mut Work) {
        w.u.iter_mut().for_each(|x| *x = 0.0);
        w.v.iter_mut().for_each(|x| *x = 0.0);
        let k = &self.kernels;
        self.species_velocity(rho, eta, &k.w11, &k.w12, &mut w.u, &mut w.xi, &mut w.zeta);
        self.species_velocity(eta, rho, &k.w22, &k.w21, &mut w.v, &mut w.xi, &mut w.zeta);
    }

    /// `vel[e] = -(phi_e - phi_{e-1}) / dx` on the edges around `own`'s mass,
    /// built from per-kernel differences rather than from `phi` itself.
    #[allow(clippy::too_many_arguments)]
    fn species_velocity(
        &self,
        own: &[f64],
        other: &[f64],
        w_own: &KernelTable,
        w_other: &KernelTable,
        vel: &mut [f64],
        diff: &mut [f64],
        rows: &mut [f64],
    ) {
        let n = self.grid.len();
        let dx = self.grid.dx();
        let eps = self.params.epsilon;
        let Some((lo, hi)) = span_of(own) else {
            return;
        };
        let edges = lo.max(1)..(hi + 1).min(n);
        for e in edges.clone() {
            diff[e] = eps * ((own[e] + other[e]) - (own[e - 1] + other[e - 1]));
        }
        add_kernel_differences(diff, edges.clone(), w_own, own, dx, rows);
        add_kernel_differences(diff, edges.clone(), w_other, other, dx, rows);
        for e in edges {
            if own[e - 1] > 0.0 || own[e] > 0.0 {
                vel[e] = -diff[e] / dx;
            }
        }
    }

    /// Runs from `state0`, handing snapshots to `sink`.
    pub fn run_with_sink(
        &self,
        state0: &SystemState,
        controls: &StepControls,
        sink: &mut dyn SnapshotSink,
    ) -> Result<RunSummary> {
        controls.validate()?;
        if !self.grid.matches(&state0.grid) {
            return Err(invalid("initial state lives on a different grid"));
        }
        if state0.min_cell() < 0.0 {
            return Err(invalid("initial state has negative cells"));
        }
        let n = self.grid.len();
        let dx = self.grid.dx();
        let mut rho = state0.rho.values().to_vec();
        let mut eta = state0.eta.values().to_vec();
        let mut t = state0.time;
        let mass = dx * (rho.iter().sum::<f64>() + eta.iter().sum::<f64>());
        let mut w = Work {
            xi: vec![0.0; n],
            zeta: vec![0.0; n],
            u: vec![0.0; n + 1],
            v: vec![0.0; n + 1],
            f: vec![0.0; n + 1],
            g: vec![0.0; n + 1],
        };
        let snap = |rho: &[f64], eta: &[f64], t: f64| SystemState {
            grid: self.grid.clone(),
            rho: CellField::from_vec_unchecked(rho.to_vec()),
            eta: CellField::from_vec_unchecked(eta.to_vec()),
            time: t,
        };
        sink.record(&snap(&rho, &eta, t))?;
        let interval = controls.snapshot_interval;
        let mut next_snap = if interval > 0.0 { t + interval } else { f64::INFINITY };
        let mut steps = 0usize;
        let mut last_rate = 0.0;
        let t_end = controls.t_end;
        let termination = loop {
            if mass <= 0.0 {
                break Termination::SteadyState;
            }
            if t >= t_end * (1.0 - 1e-15) {
                break Termination::TimeReached;
            }
            self.active_velocities(&rho, &eta, &mut w);
            upwind(&w.u, &rho, &mut w.f);
            upwind(&w.v, &eta, &mut w.g);
            let change: f64 = (0..n)
                .map(|i| (w.f[i + 1] - w.f[i]).abs() + (w.g[i + 1] - w.g[i]).abs())
                .sum();
            last_rate = change / mass;
            if last_rate < controls.steady_tol {
                break Termination::SteadyState;
            }
            let speed = max_abs(&w.u).max(max_abs(&w.v));
            let mut dt = cfl_from_speed(speed, dx, controls);
            if controls.diffusion_limit {
                let smax = rho.iter().zip(&eta).fold(0.0f64, |m, (a, b)| m.max(a + b));
                dt = dt.min(diffusive_from_peak(smax, self.params.epsilon, dx, controls));
            }
            let dt = dt.min(t_end - t).min(next_snap - t);
            let ratio = dt / dx;
            let r1 = apply_update(&mut rho, &w.f, ratio, Species::Rho);
            let r2 = r1.and_then(|_| apply_update(&mut eta, &w.g, ratio, Species::Eta));
            if let Err(Error::StepRejected { species, cell, value }) = r2 {
                break Termination::StepRejected { species, cell, value };
            }
            r2?;
            steps += 1;
            t = if next_snap - t <= dt { next_snap } else { t + dt };
            if t >= next_snap {
                sink.record(&snap(&rho, &eta, t))?;
                next_snap += interval;
            }
        };
        let final_state = snap(&rho, &eta, t);
        sink.record(&final_state)?;
        Ok(RunSummary {
            final_state,
            termination,
            steps,
            last_rate,
        })
    }

    pub fn run(&self, state0: &SystemState, controls: &StepControls) -> Result<Trajectory> {
        let mut snapshots = Vec::new();
        let summary = self.run_with_sink(state0, controls, &mut snapshots)?;
        // The closing record duplicates a snapshot taken exactly at the final time.
        if snapshots.len() >= 2 {
            let k = snapshots.len();
            if snapshots[k - 2].time == snapshots[k - 1].time {
                snapshots.remove(k - 2);
            }
        }
        Ok(Trajectory {
            snapshots,
            final_state: summary.final_state,
            termination: summary.termination,
            steps: summary.steps,
        })
    }
}

/// Builds the kernel tables and runs to termination.
pub fn run(state0: &SystemState, params: &ModelParams, controls: &StepControls) -> Result<Trajectory> {
    Simulator::new(params.clone(), state0.grid.clone()).run(state0, controls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;

    fn state(grid: &Grid, rho: Vec<f64>, eta: Vec<f64>) -> SystemState {
        SystemState::new(grid.clone(), CellField::new(rho).unwrap(), CellField::new(eta).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn zero_state_has_zero_fields() {
        let g = Grid::new(1.0, 6).unwrap();
        let p = ModelParams::attractive_attractive(0.3).unwrap();
        let k = Kernels::build(&p, &g);
        let f = compute_potential_fields(&SystemState::zeros(g), &k, &p).unwrap();
        assert!(f.xi.iter().chain(&f.zeta).all(|&v| v == 0.0));
    }

    #[test]
    fn single_cell_potential_is_distance() {
        let g = Grid::new(1.0, 10).unwrap();
        let eps = 0.25;
        let p = ModelParams::new(
            eps,
            PotentialSpec::abs(),
            PotentialSpec::abs(),
            PotentialSpec::abs(),
            PotentialSpec::quadratic(),
        )
        .unwrap();
        let k = Kernels::build(&p, &g);
        let j = 3;
        let mut rho = vec![0.0; 10];
        rho[j] = 1.0 / g.dx();
        let s = state(&g, rho.clone(), vec![0.0; 10]);
        let f = compute_potential_fields(&s, &k, &p).unwrap();
        for i in 0..10 {
            let expect = (g.center(i) - g.center(j)).abs() + eps * rho[i];
            assert!((f.xi[i] - expect).abs() < 1e-14, "{i}");
        }
    }

    #[test]
    fn velocity_difference_quotient() {
        let g = Grid::new(0.5, 2).unwrap();
        let f = PotentialField {
            xi: vec![0.0, 1.0],
            zeta: vec![3.0, 3.0],
        };
        let v = compute_velocities(&f, &g);
        assert_eq!(v.u, vec![0.0, -2.0, 0.0]);
        assert_eq!(v.v, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn upwind_selects_upstream_cell() {
        let g = Grid::new(1.0, 2).unwrap();
        let s = state(&g, vec![2.0, 5.0], vec![2.0, 5.0]);
        let vel = EdgeVelocities {
            u: vec![0.0, 1.0, 0.0],
            v: vec![0.0, -1.0, 0.0],
        };
        let fl = compute_fluxes(&vel, &s);
        assert_eq!(fl.f, vec![0.0, 2.0, 0.0]);
        assert_eq!(fl.g, vec![0.0, -5.0, 0.0]);
        let zero = EdgeVelocities {
            u: vec![0.0; 3],
            v: vec![0.0; 3],
        };
        let fl = compute_fluxes(&zero, &s);
        assert!(fl.f.iter().chain(&fl.g).all(|&x| x == 0.0));
    }

    #[test]
    fn cfl_examples() {
        let g = Grid::new(1.0, 200).unwrap();
        assert!((g.dx() - 0.01).abs() < 1e-15);
        let vel = EdgeVelocities {
            u: vec![0.0, -1.0, 0.3, 0.0],
            v: vec![0.0, 0.5, 0.0, 0.0],
        };
        let mut c = StepControls {
            cfl_safety: 1.0,
            dt_max: 1.0,
            ..StepControls::default()
        };
        assert!((cfl_dt(&vel, &g, &c) - 0.005).abs() < 1e-15);
        c.cfl_safety = 0.5;
        assert!((cfl_dt(&vel, &g, &c) - 0.0025).abs() < 1e-15);
        let zero = EdgeVelocities {
            u: vec![0.0; 4],
            v: vec![0.0; 4],
        };
        assert_eq!(cfl_dt(&zero, &g, &c), 1.0);
    }

    #[test]
    fn zero_velocity_step_leaves_state() {
        let g = Grid::new(1.0, 4).unwrap();
        // A single uniform field under a constant kernel has no gradient.
        let p = ModelParams::new(
            1.0,
            PotentialSpec::new(crate::potential::PotentialFamily::PowerLaw(1e-300), 1.0).unwrap(),
            PotentialSpec::abs(),
            PotentialSpec::abs(),
            PotentialSpec::abs(),
        )
        .unwrap();
        let k = Kernels::build(&p, &g);
        let s = SystemState::zeros(g);
        let s2 = step(&s, 0.1, &k, &p).unwrap();
        assert_eq!(s2.rho, s.rho);
        assert!((s2.time - 0.1).abs() < 1e-15);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = Grid::new(1.0, 20).unwrap();
        let p = ModelParams::attractive_attractive(0.1).unwrap();
        let k = Kernels::build(&p, &g);
        let mut rho = vec![0.0; 20];
        rho[2] = 5.0;
        rho[3] = 1.0;
        let s = state(&g, rho, vec![0.0; 20]);
        match step(&s, 10.0, &k, &p) {
            Err(Error::StepRejected { species: Species::Rho, .. }) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn zero_data_terminates_as_steady() {
        let g = Grid::new(1.0, 16).unwrap();
        let p = ModelParams::attractive_attractive(0.1).unwrap();
        let tr = run(&SystemState::zeros(g), &p, &StepControls::default()).unwrap();
        assert_eq!(tr.termination, Termination::SteadyState);
        assert_eq!(tr.steps, 0);
    }

    #[test]
    fn restricted_and_full_paths_agree() {
        let g = Grid::new(2.0, 64).unwrap();
        let p = ModelParams::attractive_repulsive(0.2).unwrap();
        let sim = Simulator::new(p.clone(), g.clone());
        let mut rho = vec![0.0; 64];
        let mut eta = vec![0.0; 64];
        for i in 20..30 {
            rho[i] = 1.0 + 0.1 * i as f64;
        }
        for i in 33..41 {
            eta[i] = 0.7;
        }
        let s = state(&g, rho, eta);
        let c = StepControls {
            t_end: 0.05,
            ..StepControls::default()
        };
        let tr = sim.run(&s, &c).unwrap();
        // Same steps through the public single-step path.
        let mut cur = s.clone();
        for _ in 0..tr.steps {
            let f = compute_potential_fields(&cur, sim.kernels(), &p).unwrap();
            let v = compute_velocities(&f, &g);
            let mut masked = v.clone();
            for e in 1..64 {
                if cur.rho[e - 1] == 0.0 && cur.rho[e] == 0.0 {
                    masked.u[e] = 0.0;
                }
                if cur.eta[e - 1] == 0.0 && cur.eta[e] == 0.0 {
                    masked.v[e] = 0.0;
                }
            }
            let dt = cfl_dt(&masked, &g, &c)
                .min(diffusive_dt(&cur, p.epsilon, &c))
                .min(c.t_end - cur.time);
            cur = step(&cur, dt, sim.kernels(), &p).unwrap();
        }
        for i in 0..64 {
            assert!((cur.rho[i] - tr.final_state.rho[i]).abs() < 1e-12);
            assert!((cur.eta[i] - tr.final_state.eta[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_differences_match_table() {
        let g = Grid::new(3.0, 97).unwrap();
        let a: Vec<f64> = (0..97)
            .map(|i| if (30..71).contains(&i) { 1.0 + ((i * 7) % 5) as f64 * 0.3 } else { 0.0 })
            .collect();
        for spec in [PotentialSpec::quadratic(), PotentialSpec::abs(), PotentialSpec::neg_abs()] {
            let table = KernelTable::build(&spec, &g);
            assert!(table.closed_form().is_some());
            let plain = table.clone().tabulated_only();
            let mut rows = vec![0.0; 97];
            let mut fast = vec![0.0; 97];
            let mut slow = vec![0.0; 97];
            for edges in [1..97, 20..50, 60..61] {
                fast.iter_mut().for_each(|x| *x = 0.0);
                slow.iter_mut().for_each(|x| *x = 0.0);
                add_kernel_differences(&mut fast, edges.clone(), &table, &a, g.dx(), &mut rows);
                add_kernel_differences(&mut slow, edges.clone(), &plain, &a, g.dx(), &mut rows);
                for e in edges {
                    assert!((fast[e] - slow[e]).abs() < 1e-13, "{spec} edge {e}: {} vs {}", fast[e], slow[e]);
                }
            }
        }
    }

    fn total_variation(s: &SystemState) -> f64 {
        s.sigma().windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    #[test]
    fn diffusion_limit_suppresses_alternating_mode() {
        let g = Grid::new(3.0, 100).unwrap();
        let p = ModelParams::attractive_attractive(0.12).unwrap();
        let rho = crate::projection::project_segments(&[crate::Segment::new(-0.5, 0.0, 1.2)], &g).unwrap();
        let eta = crate::projection::project_segments(&[crate::Segment::new(0.0, 0.5, 0.2)], &g).unwrap();
        let s0 = SystemState::new(g.clone(), rho, eta, 0.0).unwrap();
        let mut c = StepControls {
            t_end: 40.0,
            snapshot_interval: 0.5,
            ..StepControls::default()
        };
        // whole support, skipping the start-up transient
        let worst = |tr: Trajectory| {
            tr.snapshots
                .iter()
                .filter(|s| s.time >= 5.0)
                .map(total_variation)
                .fold(0.0, f64::max)
        };
        let smooth = worst(run(&s0, &p, &c).unwrap());
        c.diffusion_limit = false;
        let tr = run(&s0, &p, &c).unwrap();
        let rough_min = tr.snapshots.iter().map(|s| s.min_cell()).fold(f64::INFINITY, f64::min);
        let rough = worst(tr);
        assert!(smooth < 3.0, "{smooth}");
        assert!(rough > 4.0, "{rough}");
        assert!(rough_min >= 0.0);
    }

    #[test]
    fn diffusive_bound_formula() {
        let g = Grid::new(1.0, 100).unwrap();
        let s = state(&g, vec![0.5; 100], vec![0.25; 100]);
        let c = StepControls::default();
        let want = 0.9 * 0.02 * 0.02 / (2.0 * 0.1 * 0.75);
        assert!((diffusive_dt(&s, 0.1, &c) - want).abs() < 1e-15);
        assert_eq!(diffusive_dt(&SystemState::zeros(g), 0.1, &c), f64::INFINITY);
    }
}
