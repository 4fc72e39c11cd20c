use crate::error::{config, Result};

use super::QuantityGrid;

/// Nonlinear pricing scheme on a quantity grid.
///
/// Cells `0..open_cells()` carry a marginal price in k$/MWh; from
/// `closed_from()` on the buyer procures nothing more and the payment stays
/// flat. `t(q_k) = t0 + Σ_{i<k} p_i Δq`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSchedule {
    grid: QuantityGrid,
    prices: Vec<f64>,
    cumulative: Vec<f64>,
    t0: f64,
}

impl PriceSchedule {
    /// Schedule from per-cell prices; the first `None` closes procurement and
    /// later entries are ignored.
    pub fn from_cells(grid: QuantityGrid, cells: &[Option<f64>], t0: f64) -> Result<Self> {
        if cells.len() != grid.n_cells() {
            return Err(config(format!(
                "schedule has {} cells, grid has {}",
                cells.len(),
                grid.n_cells()
            )));
        }
        let prices: Vec<f64> = cells.iter().map_while(|c| *c).collect();
        Self::from_open_prices(grid, prices, t0)
    }

    pub fn from_open_prices(grid: QuantityGrid, prices: Vec<f64>, t0: f64) -> Result<Self> {
        if prices.len() > grid.n_cells() {
            return Err(config("more prices than grid cells"));
        }
        if let Some(bad) = prices.iter().find(|p| !p.is_finite()) {
            return Err(config(format!("marginal price {bad} is not finite")));
        }
        let dq = grid.dq();
        let mut cumulative = Vec::with_capacity(prices.len() + 1);
        let mut acc = 0.0;
        cumulative.push(acc);
        for p in &prices {
            acc += p * dq;
            cumulative.push(acc);
        }
        Ok(PriceSchedule {
            grid,
            prices,
            cumulative,
            t0,
        })
    }

    pub fn grid(&self) -> &QuantityGrid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// Number of leading open cells; the seller may deliver any `q_k` with
    /// `k <= open_cells()`.
    pub fn open_cells(&self) -> usize {
        self.prices.len()
    }

    pub fn closed_from(&self) -> Option<usize> {
        (self.prices.len() < self.grid.n_cells()).then_some(self.prices.len())
    }

    pub fn price(&self, cell: usize) -> Option<f64> {
        self.prices.get(cell).copied()
    }

    pub fn open_prices(&self) -> &[f64] {
        &self.prices
    }

    /// `∫_0^{q_k} p`: the payment above `t0` at grid point `k`.
    pub fn integral_to(&self, k: usize) -> f64 {
        self.cumulative[k.min(self.prices.len())]
    }

    /// `t(q_k)`.
    pub fn payment(&self, k: usize) -> f64 {
        self.t0 + self.integral_to(k)
    }

    /// Copy with the open prices of cells `from..` scaled by `factor`.
    /// Used to build negative-control fixtures.
    pub fn scaled_from(&self, from: usize, factor: f64) -> Self {
        let prices = self
            .prices
            .iter()
            .enumerate()
            .map(|(i, p)| if i >= from { p * factor } else { *p })
            .collect();
        PriceSchedule::from_open_prices(self.grid, prices, self.t0).expect("scaled prices stay finite")
    }
}
