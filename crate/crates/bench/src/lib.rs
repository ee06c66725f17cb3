//! Fixtures shared by the benchmarks.

use crossdiff_core::projection::project_segments;
use crossdiff_core::{Grid, ModelParams, Segment, SystemState};

/// Split indicator data on `[-3, 3]`: `rho` left of the origin, `eta` right of it.
pub fn split_state(cells: usize, m1: f64, m2: f64) -> SystemState {
    let g = Grid::new(3.0, cells).expect("valid grid");
    let rho = project_segments(&[Segment::with_mass(-0.5, 0.0, m1)], &g).expect("inside grid");
    let eta = project_segments(&[Segment::with_mass(0.0, 0.5, m2)], &g).expect("inside grid");
    SystemState::new(g, rho, eta, 0.0).expect("non-negative data")
}

/// Attractive-attractive model with every kernel replaced by `|x|^p`.
pub fn power_model(eps: f64, p: f64) -> ModelParams {
    let w: crossdiff_core::PotentialSpec = format!("power:{p}").parse().expect("valid spec");
    ModelParams::new(eps, w, w, w, w).expect("valid model")
}
