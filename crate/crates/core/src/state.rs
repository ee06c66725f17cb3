use crate::error::{invalid, Result};
use crate::grid::{CellField, Grid};
use serde::{Deserialize, Serialize};

/// Both densities on a common grid at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub grid: Grid,
    pub rho: CellField,
    pub eta: CellField,
    pub time: f64,
}

impl SystemState {
    pub fn new(grid: Grid, rho: CellField, eta: CellField, time: f64) -> Result<Self> {
        if rho.len() != grid.len() || eta.len() != grid.len() {
            return Err(invalid(format!(
                "field lengths ({}, {}) do not match the grid ({})",
                rho.len(),
                eta.len(),
                grid.len()
            )));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(invalid(format!("time must be non-negative, got {time}")));
        }
        Ok(Self { grid, rho, eta, time })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            rho: CellField::zeros(n),
            eta: CellField::zeros(n),
            time: 0.0,
        }
    }

    /// Pointwise `rho + eta`.
    pub fn sigma(&self) -> Vec<f64> {
        self.rho
            .values()
            .iter()
            .zip(self.eta.values())
            .map(|(r, e)| r + e)
            .collect()
    }

    pub fn min_cell(&self) -> f64 {
        self.rho.min().min(self.eta.min())
    }

    /// Mirror image of both species about `x = 0`.
    pub fn reflected(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            rho: self.rho.reflected(),
            eta: self.eta.reflected(),
            time: self.time,
        }
    }

    pub fn shifted(&self, cells: isize) -> Self {
        Self {
            grid: self.grid.clone(),
            rho: self.rho.shifted(cells),
            eta: self.eta.shifted(cells),
            time: self.time,
        }
    }

    /// Exchanges the roles of the two species.
    pub fn swapped(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            rho: self.eta.clone(),
            eta: self.rho.clone(),
            time: self.time,
        }
    }
}
