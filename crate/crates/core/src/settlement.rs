//! Weather-indexed payments built on top of a solved schedule.
//!
//! Both transformations add a mean-zero correction to `t(q)`, so every type
//! keeps choosing the same quantity. They only move risk between the seller
//! and the buyer.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::mechanism::{AnchorRule, ProcurementProblem, Solution};

/// Payment `t(q) - t(q(x̲)) + C(q(x̲), w, x̲)`, indexed by weather state.
#[derive(Debug, Clone)]
pub struct ExPostPayment {
    worst: usize,
    worst_q_index: usize,
    /// `t(q_k)` for every grid point.
    base: Vec<f64>,
    /// `C(q(x̲), w_j, x̲)` for every weather state `j`.
    worst_costs: Vec<f64>,
}

impl ExPostPayment {
    /// Requires the solution to have been anchored on a worst type.
    pub fn new(problem: &ProcurementProblem, solution: &Solution) -> Result<Self> {
        let worst = match solution.outcome.anchor {
            AnchorRule::WorstType { index } => index,
            AnchorRule::Posterior { .. } => {
                return Err(Error::Unsupported(
                    "ex-post payment needs a worst type; none exists for this admissible set".into(),
                ))
            }
        };
        let worst_q_index = solution.outcome.types[worst].q_index;
        let q_worst = problem.grid().point(worst_q_index);
        let x = &problem.types()[worst];
        let worst_costs = problem
            .weather()
            .states()
            .iter()
            .map(|s| problem.model().cost(x, q_worst, s.speed))
            .collect();
        let base = (0..problem.grid().n_points()).map(|k| solution.schedule.payment(k)).collect();
        Ok(ExPostPayment {
            worst,
            worst_q_index,
            base,
            worst_costs,
        })
    }

    pub fn worst(&self) -> usize {
        self.worst
    }

    pub fn worst_q_index(&self) -> usize {
        self.worst_q_index
    }

    /// `t̃(q_k, w_j)`.
    pub fn payment(&self, k: usize, state: usize) -> f64 {
        self.base[k] - self.base[self.worst_q_index] + self.worst_costs[state]
    }

    /// `E_W t̃(q_k, W)`.
    pub fn expected_payment(&self, problem: &ProcurementProblem, k: usize) -> f64 {
        problem
            .weather()
            .states()
            .iter()
            .enumerate()
            .map(|(j, s)| s.prob * self.payment(k, j))
            .sum()
    }
}

/// `t(q(x)) + α [C(q(x), w, x) - E_W C(q(x), W, x)]` for type `x` choosing grid point `k`.
pub fn risk_payment(problem: &ProcurementProblem, solution: &Solution, x: usize, k: usize, state: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let st = &problem.types()[x];
    let w = problem.weather().states()[state].speed;
    let realized = problem.model().cost(st, problem.grid().point(k), w);
    Ok(solution.schedule.payment(k) + alpha * (realized - problem.expected_cost_at(x, k)))
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(domain(format!("risk-sharing alpha = {alpha} must lie in [0, 1]")))
    }
}

/// One (type, weather state) line of a settlement report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettlementRow {
    pub type_id: String,
    pub w: f64,
    pub prob: f64,
    /// Renewable output at `w`, when the model has one.
    pub generation: Option<f64>,
    pub q: f64,
    pub realized_cost: f64,
    pub payment_base: f64,
    /// Absent when no worst type exists.
    pub payment_expost: Option<f64>,
    pub payment_risk: f64,
    /// `payment_risk - realized_cost`.
    pub profit: f64,
}

/// Enumerates every participating type against every weather state.
pub fn settlement_rows(problem: &ProcurementProblem, solution: &Solution, alpha: f64) -> Result<Vec<SettlementRow>> {
    check_alpha(alpha)?;
    let expost = match ExPostPayment::new(problem, solution) {
        Ok(e) => Some(e),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let mut rows = Vec::new();
    for (x, o) in solution.outcome.types.iter().enumerate() {
        if !o.participates {
            continue;
        }
        let st = &problem.types()[x];
        for (j, s) in problem.weather().states().iter().enumerate() {
            let realized = problem.model().cost(st, o.q, s.speed);
            let payment_risk = risk_payment(problem, solution, x, o.q_index, j, alpha)?;
            rows.push(SettlementRow {
                type_id: o.id.clone(),
                w: s.speed,
                prob: s.prob,
                generation: problem.model().generation(st, s.speed),
                q: o.q,
                realized_cost: realized,
                payment_base: o.payment,
                payment_expost: expost.as_ref().map(|e| e.payment(o.q_index, j)),
                payment_risk,
                profit: payment_risk - realized,
            });
        }
    }
    Ok(rows)
}

/// Mean and variance over the weather of a type's realized profit under `risk_payment`.
pub fn risk_profit_moments(problem: &ProcurementProblem, solution: &Solution, x: usize, alpha: f64) -> Result<(f64, f64)> {
    let k = solution.outcome.types[x].q_index;
    let q = problem.grid().point(k);
    let st = &problem.types()[x];
    let profits: Vec<(f64, f64)> = problem
        .weather()
        .states()
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let pay = risk_payment(problem, solution, x, k, j, alpha)?;
            Ok((s.prob, pay - problem.model().cost(st, q, s.speed)))
        })
        .collect::<Result<_>>()?;
    let mean: f64 = profits.iter().map(|(p, v)| p * v).sum();
    let var = profits.iter().map(|(p, v)| p * (v - mean).powi(2)).sum();
    Ok((mean, var))
}
