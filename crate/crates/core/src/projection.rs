//! Cell-average projection of initial densities.

use crate::error::{invalid, Result};
use crate::grid::{CellField, Grid};
use crate::quadrature::gauss_legendre5_nodes;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A point-wise density together with the points where it may jump or kink.
pub trait Density {
    fn value(&self, x: f64) -> f64;

    /// Locations of jumps or derivative kinks. Projection never integrates across them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> Density for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Constant `value` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl Segment {
    pub fn new(lo: f64, hi: f64, value: f64) -> Self {
        Self { lo, hi, value }
    }

    /// Indicator of `[lo, hi]` scaled to carry `mass`.
    pub fn with_mass(lo: f64, hi: f64, mass: f64) -> Self {
        Self {
            lo,
            hi,
            value: mass / (hi - lo),
        }
    }

    pub fn mass(&self) -> f64 {
        self.value * (self.hi - self.lo)
    }
}

#[derive(Clone)]
pub enum InitialData {
    Zero,
    /// Sum of constant pieces; overlapping pieces add up.
    Segments(Vec<Segment>),
    /// Closed-form density, integrated by 5-point Gauss–Legendre per smooth piece of each cell.
    Closed(Arc<dyn Density + Send + Sync>),
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialData::Zero => f.write_str("Zero"),
            InitialData::Segments(s) => f.debug_tuple("Segments").field(s).finish(),
            InitialData::Closed(_) => f.write_str("Closed(..)"),
        }
    }
}

pub fn project_initial_data(data: &InitialData, grid: &Grid) -> Result<CellField> {
    match data {
        InitialData::Zero => Ok(CellField::zeros(grid.len())),
        InitialData::Segments(segments) => project_segments(segments, grid),
        InitialData::Closed(density) => project_density(density.as_ref(), grid),
    }
}

/// Exact interval-overlap averages of a piecewise-constant density.
pub fn project_segments(segments: &[Segment], grid: &Grid) -> Result<CellField> {
    let l = grid.half_width();
    let mut values = vec![0.0; grid.len()];
    for s in segments {
        if !(s.lo.is_finite() && s.hi.is_finite() && s.value.is_finite()) {
            return Err(invalid("segment bounds and value must be finite"));
        }
        if s.value < 0.0 {
            return Err(invalid(format!("negative density {} on [{}, {}]", s.value, s.lo, s.hi)));
        }
        if s.lo >= s.hi {
            return Err(invalid(format!("empty segment [{}, {}]", s.lo, s.hi)));
        }
        if s.lo < -l || s.hi > l {
            return Err(invalid(format!(
                "segment [{}, {}] leaves the domain [{}, {}]",
                s.lo, s.hi, -l, l
            )));
        }
        let first = grid.locate(s.lo).unwrap_or(0);
        let last = grid.locate(s.hi).unwrap_or(grid.len() - 1);
        for (i, v) in values.iter_mut().enumerate().take(last + 1).skip(first) {
            let (a, b) = grid.cell_bounds(i);
            let overlap = b.min(s.hi) - a.max(s.lo);
            if overlap > 0.0 {
                *v += s.value * overlap / grid.dx();
            }
        }
    }
    CellField::new(values)
}

/// Cell averages of a closed-form density.
pub fn project_density(density: &dyn Density, grid: &Grid) -> Result<CellField> {
    let mut breaks = density.breakpoints();
    breaks.retain(|b| b.is_finite());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let dx = grid.dx();
    let mut values = Vec::with_capacity(grid.len());
    let mut cursor = 0;
    for i in 0..grid.len() {
        let (a, b) = grid.cell_bounds(i);
        while cursor < breaks.len() && breaks[cursor] <= a {
            cursor += 1;
        }
        let mut lo = a;
        let mut integral = 0.0;
        let mut j = cursor;
        loop {
            let hi = if j < breaks.len() && breaks[j] < b { breaks[j] } else { b };
            if hi > lo {
                let half = 0.5 * (hi - lo);
                for (x, w) in gauss_legendre5_nodes(lo, hi).zip(GL5_W.iter()) {
                    let v = density.value(x);
                    if !v.is_finite() {
                        return Err(invalid(format!("density is not finite at x = {x}")));
                    }
                    if v < -1e-12 {
                        return Err(invalid(format!("negative density {v} at x = {x}")));
                    }
                    integral += w * v.max(0.0) * half;
                }
            }
            if hi >= b {
                break;
            }
            lo = hi;
            j += 1;
        }
        values.push(integral / dx);
    }
    CellField::new(values)
}

const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn split_indicator_on_coarse_grid() {
        let g = Grid::new(1.0, 4).unwrap();
        let f = project_segments(&[Segment::new(-0.5, 0.0, 2.0 * 0.5)], &g).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_data() {
        let g = Grid::new(1.0, 8).unwrap();
        let f = project_initial_data(&InitialData::Zero, &g).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
        let f = project_initial_data(&InitialData::Segments(vec![]), &g).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_density_is_rejected() {
        let g = Grid::new(1.0, 8).unwrap();
        assert!(project_segments(&[Segment::new(-0.5, 0.0, -1.0)], &g).is_err());
        assert!(project_segments(&[Segment::new(-0.5, 2.0, 1.0)], &g).is_err());
        assert!(project_density(&|x: f64| x, &g).is_err());
    }

    #[test]
    fn closed_form_respects_breakpoints() {
        struct Tent;
        impl Density for Tent {
            fn value(&self, x: f64) -> f64 {
                (1.0 - (x - 0.13).abs()).max(0.0)
            }
            fn breakpoints(&self) -> Vec<f64> {
                vec![-0.87, 0.13, 1.13]
            }
        }
        let g = Grid::new(2.0, 37).unwrap();
        let f = project_density(&Tent, &g).unwrap();
        let mass: f64 = f.values().iter().sum::<f64>() * g.dx();
        assert!((mass - 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn segment_projection_conserves_mass(
            pieces in proptest::collection::vec((-2.9f64..2.9, 0.01f64..1.0, 0.0f64..5.0), 1..6),
            n in 3usize..300,
        ) {
            let g = Grid::new(3.0, n).unwrap();
            let segs: Vec<Segment> = pieces
                .iter()
                .map(|&(lo, w, v)| Segment::new(lo, (lo + w).min(3.0), v))
                .filter(|s| s.hi > s.lo)
                .collect();
            let f = project_segments(&segs, &g).unwrap();
            let mass: f64 = f.values().iter().sum::<f64>() * g.dx();
            let exact: f64 = segs.iter().map(Segment::mass).sum();
            prop_assert!((mass - exact).abs() <= 1e-13 * (1.0 + exact));
            prop_assert!(f.min() >= 0.0);
        }
    }
}
