use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Uniform quantity grid `0 = q_0 < q_1 < ... < q_n = q_max`, MWh.
///
/// Cell `i` is `[q_i, q_{i+1})`. Payments accumulate left-Riemann sums of the
/// per-cell marginal price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantityGrid {
    q_max: f64,
    n_cells: usize,
}

pub const DEFAULT_CELLS: usize = 2000;

impl QuantityGrid {
    pub fn new(q_max: f64, n_cells: usize) -> Result<Self> {
        if !(q_max > 0.0) || !q_max.is_finite() {
            return Err(config(format!("grid q_max must be finite and > 0, got {q_max}")));
        }
        if n_cells == 0 {
            return Err(config("grid needs at least one cell"));
        }
        Ok(QuantityGrid { q_max, n_cells })
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_points(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dq(&self) -> f64 {
        self.q_max / self.n_cells as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.q_max
        } else {
            self.q_max * i as f64 / self.n_cells as f64
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.point(i)).collect()
    }

    /// Edges `(q_i, q_{i+1})` of cell `i`.
    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.point(i), self.point(i + 1))
    }
}
