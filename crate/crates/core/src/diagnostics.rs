//! Conserved quantities, entropy, error norms, supports and pulse speeds.

use crate::analytic::{project_profile, Profile};
use crate::error::{invalid, Result};
use crate::grid::{CellField, Grid};
use crate::state::SystemState;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Cells below this fraction of the field maximum count as empty.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-4;

/// Fewest snapshots accepted by [`measure_speed`] in its fitting window.
pub const MIN_SPEED_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    Linf,
}

impl FromStr for Norm {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "linf" | "max" => Ok(Norm::Linf),
            _ => Err(invalid(format!("unknown norm '{s}' (expected l1 or linf)"))),
        }
    }
}

pub fn total_mass(field: &CellField, grid: &Grid) -> f64 {
    grid.dx() * field.values().iter().sum::<f64>()
}

/// First and second moments `(sum x f dx, sum x^2 f dx)`.
pub fn moments(field: &CellField, grid: &Grid) -> (f64, f64) {
    let mut m = 0.0;
    let mut mbar = 0.0;
    for (&x, &v) in grid.centers().iter().zip(field.values()) {
        m += x * v;
        mbar += x * x * v;
    }
    (grid.dx() * m, grid.dx() * mbar)
}

pub fn center_of_mass(field: &CellField, grid: &Grid) -> Option<f64> {
    let mass = total_mass(field, grid);
    (mass > 0.0).then(|| moments(field, grid).0 / mass)
}

fn entropy(values: &[f64], species: &str) -> Result<f64> {
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if v < 0.0 {
            return Err(invalid(format!("{species} cell {i} is negative ({v:e})")));
        }
        if v > 0.0 {
            sum += v * v.ln();
        }
    }
    Ok(sum)
}

/// Discrete `int rho log rho + eta log eta`, with `0 log 0 = 0`.
pub fn energy(state: &SystemState) -> Result<f64> {
    let dx = state.grid.dx();
    Ok(dx * (entropy(state.rho.values(), "rho")? + entropy(state.eta.values(), "eta")?))
}

/// Distance between a numeric state and an analytic profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileComparison {
    pub l1: f64,
    pub linf: f64,
    /// Translation applied to the profile before comparing.
    pub shift: f64,
}

fn cross_correlation(a: &[f64], b: &[f64], k: isize) -> f64 {
    // sum_i a[i] b[i - k]
    let n = a.len() as isize;
    let lo = k.max(0);
    let hi = (n + k).min(n);
    (lo..hi).map(|i| a[i as usize] * b[(i - k) as usize]).sum()
}

fn best_integer_shift(num: &SystemState, ana: &SystemState) -> isize {
    let (Some(sn), Some(sa)) = (span(num), span(ana)) else {
        return 0;
    };
    // shifts that make the two spans overlap at all
    let kmin = sn.0 as isize - sa.1 as isize;
    let kmax = sn.1 as isize - sa.0 as isize;
    let mut best = (f64::NEG_INFINITY, 0isize);
    for k in kmin..=kmax {
        let c = cross_correlation(num.rho.values(), ana.rho.values(), k)
            + cross_correlation(num.eta.values(), ana.eta.values(), k);
        // ties go to the smallest |k|
        if c > best.0 || (c == best.0 && k.abs() < best.1.abs()) {
            best = (c, k);
        }
    }
    best.1
}

fn span(s: &SystemState) -> Option<(usize, usize)> {
    match (s.rho.nonzero_span(), s.eta.nonzero_span()) {
        (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
        (a, b) => a.or(b),
    }
}

fn total_center(s: &SystemState) -> Option<f64> {
    let m = total_mass(&s.rho, &s.grid) + total_mass(&s.eta, &s.grid);
    (m > 0.0).then(|| (moments(&s.rho, &s.grid).0 + moments(&s.eta, &s.grid).0) / m)
}

fn distances(a: &SystemState, b: &SystemState) -> (f64, f64) {
    let dx = a.grid.dx();
    let mut l1 = 0.0;
    let mut linf = 0.0;
    for (x, y) in [(&a.rho, &b.rho), (&a.eta, &b.eta)] {
        let mut s = 0.0;
        let mut m: f64 = 0.0;
        for (p, q) in x.values().iter().zip(y.values()) {
            let d = (p - q).abs();
            s += d;
            m = m.max(d);
        }
        l1 += dx * s;
        linf += m;
    }
    (l1, linf)
}

/// L1 and max-norm distances, summed over species.
///
/// The profile is projected at the state's time. With `align`, it is first
/// translated by the integer cell shift maximising the cross-correlation, then
/// moved sub-cell to match the total centre of mass when that lies within one
/// and a half cells of the integer shift.
pub fn compare_profile(numeric: &SystemState, profile: &dyn Profile, align: bool) -> Result<ProfileComparison> {
    let grid = &numeric.grid;
    let base = profile.speed() * numeric.time;
    let mut shift = base;
    if align {
        let ana = project_profile(profile, grid, base)?;
        let k = best_integer_shift(numeric, &ana);
        shift = base + k as f64 * grid.dx();
        if let (Some(cn), Some(ca)) = (total_center(numeric), total_center(&ana)) {
            let s = base + (cn - ca);
            if (s - shift).abs() <= 1.5 * grid.dx() {
                shift = s;
            }
        }
    }
    let ana = project_profile(profile, grid, shift)?;
    let (l1, linf) = distances(numeric, &ana);
    Ok(ProfileComparison {
        l1,
        linf,
        shift: shift - base,
    })
}

/// Distances to `profile` translated by exactly `shift` (plus its own motion).
pub fn compare_profile_shifted(numeric: &SystemState, profile: &dyn Profile, shift: f64) -> Result<ProfileComparison> {
    let base = profile.speed() * numeric.time;
    let ana = project_profile(profile, &numeric.grid, base + shift)?;
    let (l1, linf) = distances(numeric, &ana);
    Ok(ProfileComparison { l1, linf, shift })
}

pub fn profile_error(numeric: &SystemState, profile: &dyn Profile, norm: Norm, align: bool) -> Result<f64> {
    let c = compare_profile(numeric, profile, align)?;
    Ok(match norm {
        Norm::L1 => c.l1,
        Norm::Linf => c.linf,
    })
}

/// Inclusive cell ranges above `threshold_fraction * max`, merging single-cell gaps.
pub fn support_cells(field: &CellField, threshold_fraction: f64) -> Vec<(usize, usize)> {
    let max = field.max();
    if !(max > 0.0) {
        return Vec::new();
    }
    let cut = threshold_fraction * max;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &v) in field.values().iter().enumerate() {
        if v <= cut {
            continue;
        }
        match runs.last_mut() {
            Some(last) if i <= last.1 + 2 => last.1 = i,
            _ => runs.push((i, i)),
        }
    }
    runs
}

/// Support intervals as `(left edge, right edge)` pairs.
pub fn extract_support(field: &CellField, grid: &Grid, threshold_fraction: f64) -> Result<Vec<(f64, f64)>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(invalid(format!(
            "threshold fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    Ok(support_cells(field, threshold_fraction)
        .into_iter()
        .map(|(a, b)| (grid.edge(a), grid.edge(b + 1)))
        .collect())
}

/// Number of cells above threshold in both species.
pub fn shared_cells(state: &SystemState, threshold_fraction: f64) -> usize {
    let (r, e) = (state.rho.values(), state.eta.values());
    let (cr, ce) = (threshold_fraction * state.rho.max(), threshold_fraction * state.eta.max());
    r.iter().zip(e).filter(|&(&a, &b)| a > cr && b > ce).count()
}

/// Cells of shared runs at least two cells long.
///
/// A contact point between the two supports falls inside one cell, whose
/// average then holds both species; only longer runs mean the supports
/// overlap on an interval.
pub fn interior_overlap_cells(state: &SystemState, threshold_fraction: f64) -> usize {
    let (r, e) = (state.rho.values(), state.eta.values());
    let (cr, ce) = (threshold_fraction * state.rho.max(), threshold_fraction * state.eta.max());
    let mut total = 0;
    let mut run = 0;
    for (&a, &b) in r.iter().zip(e) {
        if a > cr && b > ce {
            run += 1;
        } else {
            if run >= 2 {
                total += run;
            }
            run = 0;
        }
    }
    if run >= 2 {
        total += run;
    }
    total
}

/// Least-squares slope of `positions` against `times` over the final half.
pub fn measure_speed(times: &[f64], positions: &[f64]) -> Result<f64> {
    if times.len() != positions.len() {
        return Err(invalid("times and positions differ in length"));
    }
    let start = times.len() / 2;
    let (t, x) = (&times[start..], &positions[start..]);
    if t.len() < MIN_SPEED_SAMPLES {
        return Err(invalid(format!(
            "speed fit needs at least {MIN_SPEED_SAMPLES} snapshots in the final half, got {}",
            t.len()
        )));
    }
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stx = 0.0;
    for (a, b) in t.iter().zip(x) {
        stt += (a - tm) * (a - tm);
        stx += (a - tm) * (b - xm);
    }
    if stt <= 0.0 {
        return Err(invalid("snapshot times in the fitting window are all equal"));
    }
    Ok(stx / stt)
}

/// Speed of the centre of mass of rho across a list of snapshots.
pub fn trajectory_speed(snapshots: &[SystemState]) -> Result<f64> {
    let mut t = Vec::with_capacity(snapshots.len());
    let mut x = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        if let Some(c) = center_of_mass(&s.rho, &s.grid) {
            t.push(s.time);
            x.push(c);
        }
    }
    measure_speed(&t, &x)
}

/// Per-snapshot summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub time: f64,
    pub mass_rho: f64,
    pub mass_eta: f64,
    pub first_moment_rho: f64,
    pub first_moment_eta: f64,
    pub second_moment_rho: f64,
    pub second_moment_eta: f64,
    pub energy: f64,
    pub min_cell: f64,
    pub l1_error: Option<f64>,
    pub linf_error: Option<f64>,
    pub measured_speed: Option<f64>,
}

impl DiagnosticsReport {
    pub fn of(state: &SystemState) -> Result<Self> {
        let g = &state.grid;
        let (m1, mbar1) = moments(&state.rho, g);
        let (m2, mbar2) = moments(&state.eta, g);
        Ok(Self {
            time: state.time,
            mass_rho: total_mass(&state.rho, g),
            mass_eta: total_mass(&state.eta, g),
            first_moment_rho: m1,
            first_moment_eta: m2,
            second_moment_rho: mbar1,
            second_moment_eta: mbar2,
            energy: energy(state)?,
            min_cell: state.min_cell(),
            l1_error: None,
            linf_error: None,
            measured_speed: None,
        })
    }

    /// Adds the distances to `profile` (aligned).
    pub fn with_profile(mut self, state: &SystemState, profile: &dyn Profile) -> Result<Self> {
        let c = compare_profile(state, profile, true)?;
        self.l1_error = Some(c.l1);
        self.linf_error = Some(c.linf);
        Ok(self)
    }
}
