//! The optimal pricing mechanism.
//!
//! On a uniform quantity grid the buyer's problem separates by cell: the
//! marginal price of cell `i` maximizes `S_i(p) (v_i - p)`, where `S_i(p)` is
//! the prior mass of admissible types whose cell marginal cost is at most `p`
//! and `v_i` is the buyer's average marginal utility over the cell. Because
//! `S_i` is a step function of `p`, the maximum sits at one of the types' cell
//! costs. The payment anchor `t0` then makes participation binding for the
//! worst type, or for the tightest type when no worst type exists, and every
//! type picks its profit-maximizing grid quantity.
//!
//! Cell marginal costs are exact averages `(E C(q_{i+1}) - E C(q_i)) / Δq`,
//! so a type facing a price equal to its own cell cost is exactly indifferent
//! about producing that cell.

mod exclusion;
mod grid;
mod schedule;
mod utility;

pub use exclusion::ExclusionResult;
pub use grid::{QuantityGrid, DEFAULT_CELLS};
pub use schedule::PriceSchedule;
pub use utility::BuyerUtility;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::costmodel::{
    check_model_invariants, compare_cost_curves, worst_of_curves, CostModel, Dominance, SellerType,
    TypeSpace,
};
use crate::error::{config, Error, Result};
use crate::weather::WeatherModel;

/// Relative tolerance under which two seller profits count as a tie.
pub const PROFIT_TIE_TOL: f64 = 1e-10;

/// How `t0` was pinned down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AnchorRule {
    /// `t0` is the start-up cost of the worst admissible type.
    WorstType { index: usize },
    /// No worst type: `t0` is the largest participation deficit, attained by `binding`.
    Posterior { binding: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub t0: f64,
    pub rule: AnchorRule,
}

/// A type's choice from the menu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    /// Grid index of the profit-maximizing quantity (largest on ties).
    pub q_index: usize,
    pub q: f64,
    pub payment: f64,
    pub expected_cost: f64,
    pub utility: f64,
    /// Grid index reached by the marginal rule: one past the last open cell
    /// whose price covers the type's cell cost.
    pub threshold_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeOutcome {
    pub id: String,
    pub q_index: usize,
    pub q: f64,
    pub payment: f64,
    pub expected_cost: f64,
    pub utility: f64,
    pub threshold_index: usize,
    pub admissible: bool,
    /// False when a type outside the admissible set prefers its outside option.
    pub participates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractOutcome {
    pub types: Vec<TypeOutcome>,
    /// `Σ prior (V(q(x)) - t(q(x)))` over participating types.
    pub buyer_utility: f64,
    /// The same quantity written as `-t0 + Σ_i S_i (V'(q_i) - p_i) Δq`, with
    /// `S_i` the mass of types whose cell cost the price covers.
    pub buyer_utility_survival: f64,
    pub t0: f64,
    pub anchor: AnchorRule,
    pub admissible: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub schedule: PriceSchedule,
    pub outcome: ContractOutcome,
}

/// A fully specified procurement instance with tabulated costs.
#[derive(Debug, Clone)]
pub struct ProcurementProblem {
    space: TypeSpace,
    model: Arc<dyn CostModel>,
    weather: WeatherModel,
    buyer: BuyerUtility,
    grid: QuantityGrid,
    expected_costs: Vec<Vec<f64>>,
    cell_costs: Vec<Vec<f64>>,
    dominance: Vec<Vec<Dominance>>,
}

impl ProcurementProblem {
    pub fn new(
        space: TypeSpace,
        model: Arc<dyn CostModel>,
        weather: WeatherModel,
        buyer: BuyerUtility,
        grid: QuantityGrid,
    ) -> Result<Self> {
        buyer.validate()?;
        for x in space.types() {
            model.validate_type(x)?;
        }
        let points = grid.points();
        check_model_invariants(model.as_ref(), &space, &weather, &points)?;

        let expected_costs: Vec<Vec<f64>> = space
            .types()
            .par_iter()
            .map(|x| points.iter().map(|&q| model.expected_cost(x, q, &weather)).collect())
            .collect();
        let cell_costs: Vec<Vec<f64>> = space
            .types()
            .par_iter()
            .map(|x| {
                (0..grid.n_cells())
                    .map(|i| {
                        let (lo, hi) = grid.cell(i);
                        model.cell_marginal_cost(x, lo, hi, &weather)
                    })
                    .collect()
            })
            .collect();
        for (x, cells) in space.types().iter().zip(&cell_costs) {
            if let Some(i) = cells.windows(2).position(|w| w[1] < w[0] - 1e-9 * w[0].abs().max(1.0)) {
                return Err(Error::Invariant(format!(
                    "type {}: expected marginal cost decreases after cell {i}",
                    x.id
                )));
            }
        }
        let n = space.len();
        let dominance = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| compare_cost_curves(&expected_costs[x], &expected_costs[y]))
                    .collect()
            })
            .collect();
        Ok(ProcurementProblem {
            space,
            model,
            weather,
            buyer,
            grid,
            expected_costs,
            cell_costs,
            dominance,
        })
    }

    /// Grid from the buyer's zero crossing of `V'`, or an explicit `q_max`.
    pub fn default_grid(buyer: &BuyerUtility, q_max: Option<f64>, n_cells: usize) -> Result<QuantityGrid> {
        let q_max = match q_max.or_else(|| buyer.zero_crossing()) {
            Some(q) => q,
            None => {
                return Err(config(
                    "grid q_max is required when the marginal utility never reaches zero",
                ))
            }
        };
        QuantityGrid::new(q_max, n_cells)
    }

    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    pub fn types(&self) -> &[SellerType] {
        self.space.types()
    }

    pub fn model(&self) -> &dyn CostModel {
        self.model.as_ref()
    }

    pub fn model_arc(&self) -> Arc<dyn CostModel> {
        Arc::clone(&self.model)
    }

    pub fn weather(&self) -> &WeatherModel {
        &self.weather
    }

    pub fn buyer(&self) -> &BuyerUtility {
        &self.buyer
    }

    pub fn grid(&self) -> &QuantityGrid {
        &self.grid
    }

    /// Same instance on a different grid.
    pub fn with_grid(&self, grid: QuantityGrid) -> Result<Self> {
        ProcurementProblem::new(
            self.space.clone(),
            Arc::clone(&self.model),
            self.weather.clone(),
            self.buyer.clone(),
            grid,
        )
    }

    pub fn all_types(&self) -> Vec<usize> {
        (0..self.space.len()).collect()
    }

    /// `E_W C(q_k, W, x)`.
    pub fn expected_cost_at(&self, x: usize, k: usize) -> f64 {
        self.expected_costs[x][k]
    }

    /// Average expected marginal cost of type `x` over cell `i`.
    pub fn cell_cost(&self, x: usize, cell: usize) -> f64 {
        self.cell_costs[x][cell]
    }

    pub fn cell_costs(&self, x: usize) -> &[f64] {
        &self.cell_costs[x]
    }

    /// Buyer's average marginal utility over cell `i`.
    pub fn cell_value(&self, cell: usize) -> f64 {
        let (lo, hi) = self.grid.cell(cell);
        self.buyer.cell_average(lo, hi)
    }

    /// `Δq · max_x max_i c_i(x)`: the grid tolerance used by certificates.
    pub fn tol_grid(&self) -> f64 {
        let max_c = self
            .cell_costs
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0_f64, f64::max);
        self.grid.dq() * max_c
    }

    pub fn dominance(&self, x: usize, y: usize) -> Dominance {
        self.dominance[x][y]
    }

    /// Ordered pairs `(better, worse)` among `subset`.
    pub fn dominance_pairs(&self, subset: &[usize]) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for &x in subset {
            for &y in subset {
                if x != y && self.dominance[x][y] == Dominance::Better {
                    pairs.push((x, y));
                }
            }
        }
        pairs
    }

    /// Worst type of `subset` by expected cost on the grid.
    pub fn worst_type(&self, subset: &[usize]) -> Option<usize> {
        let curves: Vec<Vec<f64>> = subset.iter().map(|&x| self.expected_costs[x].clone()).collect();
        worst_of_curves(&curves).map(|i| subset[i])
    }

    /// Worst type of `subset` that also has the highest cell marginal cost in
    /// every cell. Only such a type is priced at its own marginal cost and so
    /// earns exactly zero when `t0` is its start-up cost. A level-worst type
    /// whose marginal cost is overtaken somewhere does not qualify.
    pub fn anchoring_worst_type(&self, subset: &[usize]) -> Option<usize> {
        let w = self.worst_type(subset)?;
        let highest = (0..self.grid.n_cells()).all(|i| {
            let cw = self.cell_costs[w][i];
            subset.iter().all(|&x| self.cell_costs[x][i] <= cw + 1e-12 * cw.abs().max(1.0))
        });
        highest.then_some(w)
    }

    /// `P[x ∈ admissible | p_hat >= c_i(x)]`, ties counting as producing.
    pub fn survival_probability(&self, p_hat: f64, cell: usize, admissible: &[usize]) -> f64 {
        admissible
            .iter()
            .filter(|&&x| p_hat >= self.cell_costs[x][cell])
            .map(|&x| self.space.types()[x].prior)
            .sum()
    }

    /// Pointwise objective `S_i(p_hat) (v_i - p_hat)`.
    pub fn price_objective(&self, cell: usize, p_hat: f64, admissible: &[usize]) -> f64 {
        self.survival_probability(p_hat, cell, admissible) * (self.cell_value(cell) - p_hat)
    }

    /// Optimal marginal price for `cell`, or `None` when the cell is closed.
    ///
    /// The maximizer is searched over the admissible types' cell costs; the
    /// smallest maximizing candidate wins ties.
    pub fn optimal_marginal_price(&self, cell: usize, admissible: &[usize]) -> Result<Option<f64>> {
        if admissible.is_empty() {
            return Err(config("admissible type set is empty"));
        }
        let mut candidates: Vec<f64> = admissible.iter().map(|&x| self.cell_costs[x][cell]).collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        let v = self.cell_value(cell);
        if v < candidates[0] {
            return Ok(None);
        }
        let mut best = candidates[0];
        let mut best_obj = self.price_objective(cell, best, admissible);
        for &p in &candidates[1..] {
            let obj = self.price_objective(cell, p, admissible);
            if obj > best_obj {
                best = p;
                best_obj = obj;
            }
        }
        Ok(Some(best))
    }

    /// Pointwise-optimal schedule for `admissible`, anchored.
    pub fn build_price_schedule(&self, admissible: &[usize]) -> Result<PriceSchedule> {
        if admissible.is_empty() {
            return Err(config("admissible type set is empty"));
        }
        let cells: Vec<Option<f64>> = (0..self.grid.n_cells())
            .into_par_iter()
            .map(|i| self.optimal_marginal_price(i, admissible))
            .collect::<Result<_>>()?;
        if let Some(first) = cells.iter().position(Option::is_none) {
            if let Some(reopen) = cells[first..].iter().position(Option::is_some) {
                return Err(Error::Invariant(format!(
                    "procurement closes at cell {first} but reopens at cell {}",
                    first + reopen
                )));
            }
        }
        let schedule = PriceSchedule::from_cells(self.grid, &cells, 0.0)?;
        let anchor = self.anchor_payment(&schedule, admissible);
        Ok(schedule.with_t0(anchor.t0))
    }

    /// Chooses `t0` so participation binds.
    ///
    /// With a worst admissible type (see [`Self::anchoring_worst_type`]), `t0`
    /// is its start-up cost. Otherwise the best responses are computed with
    /// `t0 = 0` (they do not depend on `t0`) and `t0` covers the largest
    /// shortfall `E C(q(x)) - ∫_0^{q(x)} p`.
    pub fn anchor_payment(&self, schedule: &PriceSchedule, admissible: &[usize]) -> Anchor {
        if let Some(w) = self.anchoring_worst_type(admissible) {
            return Anchor {
                t0: self.space.types()[w].startup_cost(),
                rule: AnchorRule::WorstType { index: w },
            };
        }
        let unanchored = schedule.clone().with_t0(0.0);
        let mut t0 = f64::NEG_INFINITY;
        let mut binding = admissible[0];
        for &x in admissible {
            let br = self.best_response(x, &unanchored);
            let deficit = br.expected_cost - br.payment;
            if deficit > t0 {
                t0 = deficit;
                binding = x;
            }
        }
        Anchor {
            t0,
            rule: AnchorRule::Posterior { binding },
        }
    }

    /// Profit-maximizing grid quantity of type `x` under `schedule`.
    pub fn best_response(&self, x: usize, schedule: &PriceSchedule) -> BestResponse {
        let open = schedule.open_cells();
        let ec = &self.expected_costs[x];
        let profits: Vec<f64> = (0..=open).map(|k| schedule.integral_to(k) - ec[k]).collect();
        let scale = (0..=open)
            .map(|k| schedule.integral_to(k).abs().max(ec[k].abs()))
            .fold(1.0_f64, f64::max);
        let best = profits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = PROFIT_TIE_TOL * scale;
        let q_index = profits.iter().rposition(|p| *p >= best - tol).unwrap_or(0);
        let cells = &self.cell_costs[x];
        let threshold_index = (0..open)
            .rev()
            .find(|&i| covers(schedule.open_prices()[i], cells[i]))
            .map_or(0, |i| i + 1);
        let payment = schedule.payment(q_index);
        BestResponse {
            q_index,
            q: self.grid.point(q_index),
            payment,
            expected_cost: ec[q_index],
            utility: payment - ec[q_index],
            threshold_index,
        }
    }

    /// Full pipeline on `admissible` (all types when `None`).
    pub fn solve(&self, admissible: Option<&[usize]>) -> Result<Solution> {
        let admissible: Vec<usize> = match admissible {
            Some(a) => {
                if let Some(bad) = a.iter().find(|&&x| x >= self.space.len()) {
                    return Err(config(format!("admissible index {bad} out of range")));
                }
                let mut a = a.to_vec();
                a.sort_unstable();
                a.dedup();
                a
            }
            None => self.all_types(),
        };
        let schedule = self.build_price_schedule(&admissible)?;
        let anchor = self.anchor_payment(&schedule, &admissible);
        let outcome = self.evaluate(&schedule, &admissible, anchor.rule);
        Ok(Solution { schedule, outcome })
    }

    /// Outcome induced by an arbitrary anchored schedule.
    pub fn evaluate(&self, schedule: &PriceSchedule, admissible: &[usize], anchor: AnchorRule) -> ContractOutcome {
        let types: Vec<TypeOutcome> = self
            .space
            .types()
            .iter()
            .enumerate()
            .map(|(x, st)| {
                let br = self.best_response(x, schedule);
                let is_admissible = admissible.contains(&x);
                let tol = PROFIT_TIE_TOL * br.payment.abs().max(br.expected_cost.abs()).max(1.0);
                let participates = is_admissible || br.utility >= -tol;
                if participates {
                    TypeOutcome {
                        id: st.id.clone(),
                        q_index: br.q_index,
                        q: br.q,
                        payment: br.payment,
                        expected_cost: br.expected_cost,
                        utility: br.utility,
                        threshold_index: br.threshold_index,
                        admissible: is_admissible,
                        participates,
                    }
                } else {
                    TypeOutcome {
                        id: st.id.clone(),
                        q_index: 0,
                        q: 0.0,
                        payment: 0.0,
                        expected_cost: 0.0,
                        utility: 0.0,
                        threshold_index: br.threshold_index,
                        admissible: false,
                        participates: false,
                    }
                }
            })
            .collect();

        let priors: Vec<f64> = self.space.types().iter().map(|x| x.prior).collect();
        let buyer_utility = types
            .iter()
            .zip(&priors)
            .filter(|(o, _)| o.participates)
            .map(|(o, f)| f * (self.buyer.value(o.q) - o.payment))
            .sum();

        let participating_mass: f64 = types
            .iter()
            .zip(&priors)
            .filter(|(o, _)| o.participates)
            .map(|(_, f)| f)
            .sum();
        let dq = self.grid.dq();
        let integral: f64 = schedule
            .open_prices()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let s: f64 = types
                    .iter()
                    .enumerate()
                    .filter(|(x, o)| o.participates && covers(p, self.cell_costs[*x][i]))
                    .map(|(x, _)| priors[x])
                    .sum();
                s * (self.buyer.marginal(self.grid.point(i)) - p) * dq
            })
            .sum();

        ContractOutcome {
            types,
            buyer_utility,
            buyer_utility_survival: integral - schedule.t0() * participating_mass,
            t0: schedule.t0(),
            anchor,
            admissible: admissible.to_vec(),
        }
    }
}

/// Whether price `p` covers cost `c`, allowing for round-off in stored prices.
pub(crate) fn covers(p: f64, c: f64) -> bool {
    p >= c - PROFIT_TIE_TOL * c.abs().max(1.0)
}
