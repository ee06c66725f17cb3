//! Parameter scans over the analytic families.

use crate::error::{CliError, CliResult};
use crossdiff_core::analytic::{bifurcation_scan, critical_epsilon, envelope_range, max_m2, BifurcationScan};
use crossdiff_core::roots::brent;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanSpec {
    /// Existence of Batman and second-kind profiles along an `eps` grid.
    Bifurcation {
        m1: f64,
        m2: f64,
        eps_min: f64,
        eps_max: f64,
        steps: usize,
    },
    /// `p_min(eps)` and `p_max(eps)` of the second-kind family.
    Envelopes {
        m1: f64,
        m2: f64,
        eps_min: f64,
        eps_max: f64,
        steps: usize,
    },
    /// Closed-form `eps_c` against the root of `M2_max(eps) = 0` on an `m1 x m2` grid.
    Critical { m_min: f64, m_max: f64, steps: usize },
}

/// A rendered table plus a small summary.
#[derive(Debug, Clone, Serialize)]
pub struct ScanTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub summary: serde_json::Value,
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| v.map(|x| format!("{x:?}")).unwrap_or_default()).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

fn grid(lo: f64, hi: f64, steps: usize) -> CliResult<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) || steps < 2 {
        return Err(CliError::Usage(format!(
            "scan range must satisfy 0 < min <= max with at least 2 steps, got [{lo}, {hi}] with {steps}"
        )));
    }
    Ok((0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect())
}

fn flag(b: bool) -> Option<f64> {
    Some(if b { 1.0 } else { 0.0 })
}

pub fn run_scan(spec: &ScanSpec) -> CliResult<ScanTable> {
    match *spec {
        ScanSpec::Bifurcation {
            m1,
            m2,
            eps_min,
            eps_max,
            steps,
        } => {
            grid(eps_min, eps_max, steps)?;
            let s: BifurcationScan = bifurcation_scan(m1, m2, (eps_min, eps_max), steps)?;
            let rows = (0..s.eps_grid.len())
                .map(|k| {
                    vec![
                        Some(s.eps_grid[k]),
                        flag(s.batman_exists[k]),
                        flag(s.second_kind_exists[k]),
                        s.p_min[k],
                        s.p_max[k],
                    ]
                })
                .collect();
            let ordered = match (s.eps1, s.eps2) {
                (Some(a), Some(b)) => Some(a < b),
                _ => None,
            };
            let envelopes_ordered = s
                .p_min
                .iter()
                .zip(&s.p_max)
                .all(|(lo, hi)| match (lo, hi) {
                    (Some(a), Some(b)) => a <= b,
                    _ => true,
                });
            Ok(ScanTable {
                columns: ["eps", "batman", "second_kind", "p_min", "p_max"].map(String::from).to_vec(),
                rows,
                summary: serde_json::json!({
                    "m1": m1, "m2": m2,
                    "eps1": s.eps1, "eps2": s.eps2,
                    "eps1_below_eps2": ordered,
                    "p_min_le_p_max": envelopes_ordered,
                }),
            })
        }
        ScanSpec::Envelopes {
            m1,
            m2,
            eps_min,
            eps_max,
            steps,
        } => {
            let eps = grid(eps_min, eps_max, steps)?;
            let rows = eps
                .iter()
                .map(|&e| {
                    let r = envelope_range(m1, m2, e).ok();
                    vec![Some(e), r.as_ref().map(|r| r.p_min), r.as_ref().map(|r| r.p_max)]
                })
                .collect::<Vec<_>>();
            let found = rows.iter().filter(|r| r[1].is_some()).count();
            Ok(ScanTable {
                columns: ["eps", "p_min", "p_max"].map(String::from).to_vec(),
                rows,
                summary: serde_json::json!({ "m1": m1, "m2": m2, "points_with_window": found }),
            })
        }
        ScanSpec::Critical { m_min, m_max, steps } => {
            let ms = grid(m_min, m_max, steps)?;
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for &m1 in &ms {
                for &m2 in &ms {
                    let closed = critical_epsilon(m1, m2);
                    // M2_max is decreasing in eps, positive at 0
                    let mut hi = 1.0;
                    while max_m2(m1, m2, hi).m2_max > 0.0 {
                        hi *= 2.0;
                    }
                    let root = brent(|e| max_m2(m1, m2, e).m2_max, 0.0, hi, 1e-16 * closed.max(1e-300))?;
                    let diff = (root - closed).abs();
                    worst = worst.max(diff);
                    rows.push(vec![Some(m1), Some(m2), Some(closed), Some(root), Some(diff)]);
                }
            }
            Ok(ScanTable {
                columns: ["m1", "m2", "eps_c", "eps_c_root", "abs_diff"].map(String::from).to_vec(),
                rows,
                summary: serde_json::json!({ "max_abs_diff": worst }),
            })
        }
    }
}
