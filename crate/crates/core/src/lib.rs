//! Finite-volume solver and exact steady states for a two-species
//! aggregation system with cross-diffusion.

pub mod analytic;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod newton;
pub mod potential;
pub mod projection;
pub mod quadrature;
pub mod roots;
pub mod scheme;
pub mod state;

pub use diagnostics::{DiagnosticsReport, Norm};
pub use error::{Error, Result, Species};
pub use grid::{CellField, Grid};
pub use potential::{KernelTable, Kernels, ModelParams, PotentialFamily, PotentialSpec};
pub use projection::{project_initial_data, Density, InitialData, Segment};
pub use scheme::{
    cfl_dt, compute_fluxes, diffusive_dt, compute_potential_fields, compute_velocities, run, step, EdgeFluxes, EdgeVelocities,
    PotentialField, SnapshotSink, Simulator, StepControls, Termination, Trajectory,
};
pub use state::SystemState;
