//! Uniform cell-centred grid on `[-L, L]` and per-cell density arrays.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    cells: usize,
    dx: f64,
    centers: Vec<f64>,
}

impl Grid {
    /// Splits `[-half_width, half_width]` into `cells` equal control volumes.
    pub fn new(half_width: f64, cells: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid(format!("grid half-width must be positive, got {half_width}")));
        }
        if cells < 2 {
            return Err(invalid(format!("grid needs at least 2 cells, got {cells}")));
        }
        let dx = 2.0 * half_width / cells as f64;
        let centers = (0..cells)
            .map(|i| -half_width + (i as f64 + 0.5) * dx)
            .collect();
        Ok(Self {
            half_width,
            cells,
            dx,
            centers,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn center(&self, i: usize) -> f64 {
        self.centers[i]
    }

    /// Position of edge `x_{i-1/2}` for `i = 0..=N` (edge 0 is `-L`, edge N is `L`).
    pub fn edge(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    /// Cell `[x_{i-1/2}, x_{i+1/2}]`.
    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.edge(i), self.edge(i + 1))
    }

    /// Index of the cell containing `x`, if inside the domain.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= -self.half_width && x <= self.half_width) {
            return None;
        }
        let i = ((x + self.half_width) / self.dx).floor() as usize;
        Some(i.min(self.cells - 1))
    }

    /// True when both grids describe the same cells.
    pub fn matches(&self, other: &Grid) -> bool {
        self.cells == other.cells && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width
    }
}

/// Cell averages of one species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellField {
    values: Vec<f64>,
}

impl CellField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("cell {i} holds a non-finite value")));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Half-open index range `[lo, hi)` spanning every non-zero cell, or `None` for a zero field.
    pub fn nonzero_span(&self) -> Option<(usize, usize)> {
        let lo = self.values.iter().position(|&v| v != 0.0)?;
        let hi = self.values.iter().rposition(|&v| v != 0.0)? + 1;
        Some((lo, hi))
    }

    /// Mirror image about the domain centre.
    pub fn reflected(&self) -> Self {
        let mut v = self.values.clone();
        v.reverse();
        Self { values: v }
    }

    /// Shifts by `cells` (positive to the right), filling with zeros.
    pub fn shifted(&self, cells: isize) -> Self {
        let n = self.values.len() as isize;
        let values = (0..n)
            .map(|i| {
                let src = i - cells;
                if (0..n).contains(&src) {
                    self.values[src as usize]
                } else {
                    0.0
                }
            })
            .collect();
        Self { values }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

impl std::ops::Index<usize> for CellField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
