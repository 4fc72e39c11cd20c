//! Numerical certificates for a solved instance.
//!
//! Each check produces a [`CheckEntry`] with the worst violation found, the
//! tolerance applied and a witness. Tolerances derive from the grid: most use
//! `tol_grid = Δq · max c`, the error a single grid cell can introduce.
//!
//! [`oracle_solve`] is a brute-force solver for tiny instances. It shares no
//! code with the mechanism beyond raw cost evaluation: it tabulates expected
//! costs itself, enumerates all candidate schedules, recomputes every type's
//! best response and anchors `t0` at the largest participation deficit.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::costmodel::audit_directions;
use crate::error::{config, Result};
use crate::mechanism::{AnchorRule, PriceSchedule, ProcurementProblem, Solution};
use crate::settlement::{risk_profit_moments, ExPostPayment};

/// Tolerance for equalities that should hold up to round-off only.
pub const ROUNDOFF_TOL: f64 = 1e-9;

/// Oracle agreement required with the mechanism, k$.
pub const ORACLE_TOL: f64 = 1e-9;

/// Relative gap allowed between the two forms of the buyer's utility.
pub const IDENTITY_REL_TOL: f64 = 0.005;

pub const ORACLE_MAX_TYPES: usize = 4;
pub const ORACLE_MAX_CELLS: usize = 8;

/// Risk-sharing levels exercised by [`check_settlement`].
pub const DEFAULT_ALPHAS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub witness: String,
}

impl CheckEntry {
    /// Passes when `worst_violation <= tolerance`.
    pub fn bounded(name: &str, worst_violation: f64, tolerance: f64, witness: impl Into<String>) -> Self {
        CheckEntry {
            name: name.to_string(),
            passed: worst_violation <= tolerance,
            worst_violation,
            tolerance,
            witness: witness.into(),
        }
    }

    fn skipped(name: &str, why: &str) -> Self {
        CheckEntry {
            name: name.to_string(),
            passed: true,
            worst_violation: 0.0,
            tolerance: 0.0,
            witness: format!("skipped: {why}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckEntry> {
        self.entries.iter().filter(|e| !e.passed).collect()
    }

    /// One `key=value` line per check.
    pub fn records(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "check={} passed={} worst_violation={:e} tolerance={:e} witness={:?}",
                e.name, e.passed, e.worst_violation, e.tolerance, e.witness
            );
        }
        out
    }

    pub fn summary_table(&self) -> String {
        let width = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:<6}  {:>12}  {:>12}  witness", "check", "status", "violation", "tolerance");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{:<width$}  {:<6}  {:>12.4e}  {:>12.4e}  {}",
                e.name,
                if e.passed { "ok" } else { "FAIL" },
                e.worst_violation,
                e.tolerance,
                e.witness
            );
        }
        let failed = self.failures().len();
        let _ = writeln!(out, "{} checks, {} failed", self.entries.len(), failed);
        out
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary_table())
    }
}

fn participating(solution: &Solution) -> Vec<usize> {
    (0..solution.outcome.types.len())
        .filter(|&x| solution.outcome.types[x].participates)
        .collect()
}

/// No type gains by taking another type's contract, and each claimed
/// quantity is a best response on the whole grid.
pub fn check_ic(problem: &ProcurementProblem, solution: &Solution) -> Vec<CheckEntry> {
    let s = &solution.schedule;
    let tol = problem.tol_grid();
    let types = &solution.outcome.types;
    let who = participating(solution);
    let profit = |x: usize, k: usize| s.payment(k) - problem.expected_cost_at(x, k);

    let mut worst = f64::NEG_INFINITY;
    let mut witness = String::from("no deviation exists");
    for &x in &who {
        let own = profit(x, types[x].q_index);
        for &y in &who {
            if x == y {
                continue;
            }
            let gain = profit(x, types[y].q_index) - own;
            if gain > worst {
                worst = gain;
                witness = format!("{} mimicking {}", types[x].id, types[y].id);
            }
        }
    }
    let ic = CheckEntry::bounded("ic", worst.max(0.0), tol, witness);

    let mut worst = 0.0_f64;
    let mut witness = String::from("all claimed quantities are grid optima");
    for &x in &who {
        let own = profit(x, types[x].q_index);
        for k in 0..=s.open_cells() {
            let gain = profit(x, k) - own;
            if gain > worst {
                worst = gain;
                witness = format!("{} gains at grid point {k} over claimed {}", types[x].id, types[x].q_index);
            }
        }
    }
    vec![ic, CheckEntry::bounded("best_response", worst, tol, witness)]
}

/// Interim participation of the admissible types, binding for at least one.
pub fn check_vp(problem: &ProcurementProblem, solution: &Solution) -> Vec<CheckEntry> {
    let tol = problem.tol_grid();
    let s = &solution.schedule;
    let adm = &solution.outcome.admissible;
    let utility = |x: usize| {
        let k = solution.outcome.types[x].q_index;
        s.payment(k) - problem.expected_cost_at(x, k)
    };
    let (mut min_u, mut arg) = (f64::INFINITY, String::new());
    for &x in adm {
        let u = utility(x);
        if u < min_u {
            min_u = u;
            arg = solution.outcome.types[x].id.clone();
        }
    }
    let mut out = vec![
        CheckEntry::bounded("vp", (-min_u).max(0.0), tol, format!("min U = {min_u:e} at {arg}")),
        CheckEntry::bounded("vp_binding", min_u.abs(), tol, format!("min U = {min_u:e} at {arg}")),
    ];
    if let AnchorRule::WorstType { index } = solution.outcome.anchor {
        let u = utility(index);
        out.push(CheckEntry::bounded(
            "worst_type_zero_utility",
            u.abs(),
            tol,
            format!("U({}) = {u:e}", solution.outcome.types[index].id),
        ));
    }
    out
}

/// A better type earns at least as much and produces at least as much.
pub fn check_monotone(problem: &ProcurementProblem, solution: &Solution) -> Vec<CheckEntry> {
    let tol = problem.tol_grid();
    let types = &solution.outcome.types;
    let pairs = problem.dominance_pairs(&participating(solution));
    if pairs.is_empty() {
        return vec![
            CheckEntry::skipped("utility_monotone", "no dominance-ordered pair"),
            CheckEntry::skipped("quantity_monotone", "no dominance-ordered pair"),
        ];
    }
    let (mut du, mut wu) = (0.0_f64, String::new());
    let (mut dq, mut wq) = (0.0_f64, String::new());
    for &(b, w) in &pairs {
        let gap = types[w].utility - types[b].utility;
        if gap > du || wu.is_empty() {
            du = du.max(gap);
            wu = format!("{} better than {}: U {} vs {}", types[b].id, types[w].id, types[b].utility, types[w].utility);
        }
        let gap = types[w].q - types[b].q;
        if gap > dq || wq.is_empty() {
            dq = dq.max(gap);
            wq = format!("{} better than {}: q {} vs {}", types[b].id, types[w].id, types[b].q, types[w].q);
        }
    }
    vec![
        CheckEntry::bounded("utility_monotone", du, tol, wu),
        CheckEntry::bounded("quantity_monotone", dq, 0.0, wq),
    ]
}

/// Direct buyer utility against the survival-integral form.
pub fn check_identity(problem: &ProcurementProblem, solution: &Solution) -> CheckEntry {
    let o = &solution.outcome;
    let diff = (o.buyer_utility - o.buyer_utility_survival).abs();
    let scale = o.buyer_utility.abs().max(o.buyer_utility_survival.abs()).max(o.t0.abs()).max(1e-12);
    // the gap is first order in dq, so coarse grids get the grid tolerance
    let tol = (IDENTITY_REL_TOL * scale).max(problem.tol_grid());
    CheckEntry::bounded(
        "utility_identity",
        diff,
        tol,
        format!(
            "direct {} survival {} relative {:e} C = |diff|/dq = {:e}",
            o.buyer_utility,
            o.buyer_utility_survival,
            diff / scale,
            diff / problem.grid().dq()
        ),
    )
}

/// Each open price maximizes its cell objective over the candidate costs,
/// each open price is one of the candidates, and closed cells are unprofitable.
pub fn check_pointwise(problem: &ProcurementProblem, solution: &Solution) -> Vec<CheckEntry> {
    let adm = &solution.outcome.admissible;
    let s = &solution.schedule;
    let (mut gap, mut wg) = (0.0_f64, String::from("every open cell optimal"));
    let (mut miss, mut wm) = (0.0_f64, String::from("every open price is a candidate"));
    for i in 0..problem.grid().n_cells() {
        let cands: Vec<f64> = adm.iter().map(|&x| problem.cell_cost(x, i)).collect();
        let best = cands
            .iter()
            .map(|&c| problem.price_objective(i, c, adm))
            .fold(f64::NEG_INFINITY, f64::max);
        match s.price(i) {
            Some(p) => {
                let g = best - problem.price_objective(i, p, adm);
                if g > gap {
                    gap = g;
                    wg = format!("cell {i} price {p}");
                }
                let d = cands.iter().map(|c| (c - p).abs()).fold(f64::INFINITY, f64::min) / p.abs().max(1.0);
                if d > miss {
                    miss = d;
                    wm = format!("cell {i} price {p}");
                }
            }
            None => {
                // a closed cell forgoes `best` if that is positive
                if best > gap {
                    gap = best;
                    wg = format!("closed cell {i} has objective {best}");
                }
            }
        }
    }
    vec![
        CheckEntry::bounded("pointwise_optimal", gap, ROUNDOFF_TOL, wg),
        CheckEntry::bounded("price_in_candidates", miss, ROUNDOFF_TOL, wm),
    ]
}

/// With a worst type, the price equals its cell cost wherever it produces
/// (allowing one boundary cell).
pub fn check_worst_type_pricing(problem: &ProcurementProblem, solution: &Solution) -> CheckEntry {
    let AnchorRule::WorstType { index } = solution.outcome.anchor else {
        return CheckEntry::skipped("worst_type_pricing", "no worst type");
    };
    let upto = solution.outcome.types[index].q_index.saturating_sub(1);
    let (mut worst, mut witness) = (0.0_f64, format!("{} cells checked", upto));
    for i in 0..upto {
        let c = problem.cell_cost(index, i);
        let d = match solution.schedule.price(i) {
            Some(p) => (p - c).abs() / c.abs().max(1.0),
            None => f64::INFINITY,
        };
        if d > worst {
            worst = d;
            witness = format!("cell {i}: price {:?} vs cost {c}", solution.schedule.price(i));
        }
    }
    CheckEntry::bounded("worst_type_pricing", worst, ROUNDOFF_TOL, witness)
}

/// Global argmax against the marginal threshold rule, per type.
pub fn check_quasi_concavity(solution: &Solution) -> CheckEntry {
    let (mut worst, mut witness) = (0usize, String::from("all types agree"));
    let mut mismatches = Vec::new();
    for o in solution.outcome.types.iter().filter(|o| o.participates) {
        let d = o.q_index.abs_diff(o.threshold_index);
        if d > 1 {
            mismatches.push(format!("{}: argmax {} threshold {}", o.id, o.q_index, o.threshold_index));
        }
        if d > worst {
            worst = d;
            witness = format!("{}: argmax {} threshold {}", o.id, o.q_index, o.threshold_index);
        }
    }
    if !mismatches.is_empty() {
        witness = mismatches.join("; ");
    }
    CheckEntry::bounded("quasi_concavity", worst as f64, 1.0, witness)
}

/// The declared monotone directions of the cost parameters hold on the grid.
pub fn check_directions(problem: &ProcurementProblem) -> CheckEntry {
    let audits = audit_directions(problem.model(), problem.space(), problem.weather(), &problem.grid().points());
    let worst = audits
        .iter()
        .max_by(|a, b| a.worst_violation.total_cmp(&b.worst_violation))
        .expect("cost models have parameters");
    let witness = if worst.worst_violation > 0.0 {
        format!("{} ({:?}) at {}", worst.param, worst.declared, worst.witness)
    } else {
        format!("{} parameters audited", audits.len())
    };
    CheckEntry::bounded("direction_audit", worst.worst_violation, ROUNDOFF_TOL, witness)
}

/// Largest grid index maximizing `f`, with relative tie tolerance.
fn last_argmax(values: &[f64]) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    values.iter().rposition(|v| *v >= best - 1e-10 * scale).unwrap_or(0)
}

/// Ex-post and risk-sharing payments: mean preservation, per-state
/// participation, variance scaling and unchanged quantity choices.
pub fn check_settlement(problem: &ProcurementProblem, solution: &Solution, alphas: &[f64]) -> Result<Vec<CheckEntry>> {
    let mut out = Vec::new();
    let states = problem.weather().states();
    let who = participating(solution);
    let open = solution.schedule.open_cells();
    let types = &solution.outcome.types;

    match ExPostPayment::new(problem, solution) {
        Ok(e) => {
            let mut mean_gap = 0.0_f64;
            for k in 0..problem.grid().n_points() {
                mean_gap = mean_gap.max((e.expected_payment(problem, k) - solution.schedule.payment(k)).abs());
            }
            out.push(CheckEntry::bounded("expost_mean", mean_gap, ROUNDOFF_TOL, "max over grid points"));

            let w = e.worst();
            let qw = problem.grid().point(e.worst_q_index());
            let worst_gap = states
                .iter()
                .enumerate()
                .map(|(j, s)| (e.payment(e.worst_q_index(), j) - problem.model().cost(&problem.types()[w], qw, s.speed)).abs())
                .fold(0.0, f64::max);
            out.push(CheckEntry::bounded("expost_worst_zero", worst_gap, 0.0, format!("type {}", types[w].id)));

            let (mut min_profit, mut witness) = (f64::INFINITY, String::new());
            for &x in &who {
                let st = &problem.types()[x];
                for (j, s) in states.iter().enumerate() {
                    let v = e.payment(types[x].q_index, j) - problem.model().cost(st, types[x].q, s.speed);
                    if v < min_profit {
                        min_profit = v;
                        witness = format!("type {} at w = {}: profit {v:e}", types[x].id, s.speed);
                    }
                }
            }
            out.push(CheckEntry::bounded("expost_vp", (-min_profit).max(0.0), ROUNDOFF_TOL, witness));

            let mut moved = Vec::new();
            for &x in &who {
                let st = &problem.types()[x];
                let values: Vec<f64> = (0..=open)
                    .map(|k| {
                        let q = problem.grid().point(k);
                        states
                            .iter()
                            .enumerate()
                            .map(|(j, s)| s.prob * (e.payment(k, j) - problem.model().cost(st, q, s.speed)))
                            .sum()
                    })
                    .collect();
                let k = last_argmax(&values);
                if k.abs_diff(types[x].q_index) > 0 {
                    moved.push(format!("{}: {} -> {k}", types[x].id, types[x].q_index));
                }
            }
            out.push(CheckEntry::bounded(
                "expost_neutral",
                moved.len() as f64,
                0.0,
                if moved.is_empty() { "argmax unchanged".into() } else { moved.join("; ") },
            ));
        }
        Err(crate::Error::Unsupported(_)) => {
            out.push(CheckEntry::skipped("expost_vp", "no worst type"));
        }
        Err(e) => return Err(e),
    }

    let (mut mean_gap, mut var_gap, mut moved) = (0.0_f64, 0.0_f64, Vec::new());
    for &x in &who {
        let st = &problem.types()[x];
        let base = solution.schedule.payment(types[x].q_index);
        let (_, v0) = risk_profit_moments(problem, solution, x, 0.0)?;
        for &alpha in alphas {
            let mean_pay: f64 = (0..states.len())
                .map(|j| {
                    crate::settlement::risk_payment(problem, solution, x, types[x].q_index, j, alpha).map(|p| states[j].prob * p)
                })
                .sum::<Result<f64>>()?;
            mean_gap = mean_gap.max((mean_pay - base).abs());
            let (_, v) = risk_profit_moments(problem, solution, x, alpha)?;
            let expected = (1.0 - alpha).powi(2) * v0;
            var_gap = var_gap.max((v - expected).abs() / v0.max(1e-300));

            let values: Vec<f64> = (0..=open)
                .map(|k| {
                    let q = problem.grid().point(k);
                    (0..states.len())
                        .map(|j| {
                            let pay = crate::settlement::risk_payment(problem, solution, x, k, j, alpha)?;
                            Ok(states[j].prob * (pay - problem.model().cost(st, q, states[j].speed)))
                        })
                        .sum::<Result<f64>>()
                })
                .collect::<Result<_>>()?;
            let k = last_argmax(&values);
            if k != types[x].q_index {
                moved.push(format!("{} at alpha {alpha}: {} -> {k}", types[x].id, types[x].q_index));
            }
        }
    }
    let alphas_txt = format!("alphas {alphas:?}");
    out.push(CheckEntry::bounded("risk_mean", mean_gap, ROUNDOFF_TOL, alphas_txt.clone()));
    out.push(CheckEntry::bounded("risk_variance", var_gap, 1e-6, alphas_txt.clone()));
    out.push(CheckEntry::bounded(
        "risk_neutral",
        moved.len() as f64,
        0.0,
        if moved.is_empty() { alphas_txt } else { moved.join("; ") },
    ));
    Ok(out)
}

/// Best schedule found by exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Per-cell price, `None` from the first closed cell on.
    pub prices: Vec<Option<f64>>,
    pub t0: f64,
    pub quantities: Vec<usize>,
    pub buyer_utility: f64,
    pub schedules_evaluated: usize,
}

/// Raw inputs re-tabulated without going through the mechanism.
struct OracleTables {
    dq: f64,
    n_cells: usize,
    priors: Vec<f64>,
    /// `E_W C(q_k)` for each type and grid point.
    ec: Vec<Vec<f64>>,
    /// `V(q_k)`.
    value: Vec<f64>,
}

impl OracleTables {
    fn new(problem: &ProcurementProblem) -> Self {
        let grid = problem.grid();
        let states = problem.weather().states();
        let ec = problem
            .types()
            .iter()
            .map(|x| {
                (0..=grid.n_cells())
                    .map(|k| {
                        let q = grid.point(k);
                        states.iter().map(|s| s.prob * problem.model().cost(x, q, s.speed)).sum()
                    })
                    .collect()
            })
            .collect();
        OracleTables {
            dq: grid.dq(),
            n_cells: grid.n_cells(),
            priors: problem.types().iter().map(|x| x.prior).collect(),
            ec,
            value: (0..=grid.n_cells()).map(|k| problem.buyer().value(grid.point(k))).collect(),
        }
    }

    fn candidates(&self, cell: usize) -> Vec<f64> {
        let mut c: Vec<f64> = self.ec.iter().map(|e| (e[cell + 1] - e[cell]) / self.dq).collect();
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    }

    /// Buyer utility of open prices `prices`, with best responses and the
    /// smallest participation-preserving `t0`.
    fn evaluate(&self, prices: &[f64]) -> (f64, f64, Vec<usize>) {
        let mut integral = vec![0.0; prices.len() + 1];
        for (i, p) in prices.iter().enumerate() {
            integral[i + 1] = integral[i] + p * self.dq;
        }
        let quantities: Vec<usize> = self
            .ec
            .iter()
            .map(|e| {
                let profits: Vec<f64> = (0..integral.len()).map(|k| integral[k] - e[k]).collect();
                let best = profits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let scale = (0..integral.len()).fold(1.0_f64, |m, k| m.max(integral[k].abs()).max(e[k].abs()));
                profits.iter().rposition(|v| *v >= best - 1e-10 * scale).unwrap_or(0)
            })
            .collect();
        let t0 = quantities
            .iter()
            .enumerate()
            .map(|(x, &k)| self.ec[x][k] - integral[k])
            .fold(f64::NEG_INFINITY, f64::max);
        let utility = quantities
            .iter()
            .enumerate()
            .map(|(x, &k)| self.priors[x] * (self.value[k] - t0 - integral[k]))
            .sum();
        (utility, t0, quantities)
    }
}

fn oracle_limits(problem: &ProcurementProblem) -> Result<()> {
    if problem.types().len() > ORACLE_MAX_TYPES || problem.grid().n_cells() > ORACLE_MAX_CELLS {
        return Err(config(format!(
            "oracle handles at most {ORACLE_MAX_TYPES} types and {ORACLE_MAX_CELLS} cells, got {} and {}",
            problem.types().len(),
            problem.grid().n_cells()
        )));
    }
    Ok(())
}

/// Enumerates every schedule whose open prices are drawn from the per-cell
/// candidate costs, closed from some cell on, and keeps the best for the buyer.
/// All types are admissible.
pub fn oracle_solve(problem: &ProcurementProblem) -> Result<OracleSolution> {
    oracle_limits(problem)?;
    let tables = OracleTables::new(problem);
    let options: Vec<Vec<f64>> = (0..tables.n_cells).map(|i| tables.candidates(i)).collect();
    let mut best: Option<OracleSolution> = None;
    let mut evaluated = 0;
    let mut prefix = Vec::with_capacity(tables.n_cells);
    enumerate(&tables, &options, &mut prefix, &mut |prices| {
        evaluated += 1;
        let (u, t0, quantities) = tables.evaluate(prices);
        if best.as_ref().is_none_or(|b| u > b.buyer_utility) {
            let mut cells: Vec<Option<f64>> = prices.iter().map(|p| Some(*p)).collect();
            cells.resize(tables.n_cells, None);
            best = Some(OracleSolution {
                prices: cells,
                t0,
                quantities,
                buyer_utility: u,
                schedules_evaluated: 0,
            });
        }
    });
    let mut best = best.expect("the all-closed schedule is always evaluated");
    best.schedules_evaluated = evaluated;
    Ok(best)
}

/// Visits every open-price prefix (including the empty one, i.e. all closed).
fn enumerate(tables: &OracleTables, options: &[Vec<f64>], prefix: &mut Vec<f64>, visit: &mut dyn FnMut(&[f64])) {
    visit(prefix);
    let i = prefix.len();
    if i == tables.n_cells {
        return;
    }
    for &p in &options[i] {
        prefix.push(p);
        enumerate(tables, options, prefix, visit);
        prefix.pop();
    }
}

/// Mechanism against the brute-force oracle on the same grid.
pub fn check_oracle(problem: &ProcurementProblem, solution: &Solution) -> Result<CheckEntry> {
    let oracle = oracle_solve(problem)?;
    let gap = (oracle.buyer_utility - solution.outcome.buyer_utility).abs();
    Ok(CheckEntry::bounded(
        "oracle",
        gap,
        ORACLE_TOL,
        format!(
            "oracle {} mechanism {} over {} schedules",
            oracle.buyer_utility, solution.outcome.buyer_utility, oracle.schedules_evaluated
        ),
    ))
}

/// On instances with at most two cells, searches a joint price lattice
/// (including non-candidate prices) for a schedule that beats the mechanism.
pub fn check_joint_lattice(problem: &ProcurementProblem, solution: &Solution, steps: usize) -> Result<CheckEntry> {
    oracle_limits(problem)?;
    if problem.grid().n_cells() > 2 {
        return Err(config("joint lattice check is limited to two cells"));
    }
    let tables = OracleTables::new(problem);
    let top = (0..tables.n_cells)
        .flat_map(|i| tables.candidates(i))
        .fold(0.0_f64, f64::max)
        * 1.25;
    let options: Vec<Vec<f64>> = (0..tables.n_cells)
        .map(|i| {
            let mut v: Vec<f64> = (0..=steps).map(|s| top * s as f64 / steps as f64).collect();
            v.extend(tables.candidates(i));
            v
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut prefix = Vec::new();
    enumerate(&tables, &options, &mut prefix, &mut |prices| {
        let (u, _, _) = tables.evaluate(prices);
        if u > best.0 {
            best = (u, prices.to_vec());
        }
    });
    let gain = (best.0 - solution.outcome.buyer_utility).max(0.0);
    Ok(CheckEntry::bounded(
        "joint_lattice",
        gain,
        ORACLE_TOL,
        format!("lattice best {} at prices {:?}", best.0, best.1),
    ))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub alphas: Vec<f64>,
    /// Run the brute-force oracle when the instance is small enough.
    pub oracle: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            alphas: DEFAULT_ALPHAS.to_vec(),
            oracle: true,
        }
    }
}

/// Runs every check in a fixed order.
pub fn verify_solution(problem: &ProcurementProblem, solution: &Solution, options: &VerifyOptions) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    for e in check_ic(problem, solution) {
        report.push(e);
    }
    for e in check_vp(problem, solution) {
        report.push(e);
    }
    for e in check_monotone(problem, solution) {
        report.push(e);
    }
    report.push(check_identity(problem, solution));
    for e in check_pointwise(problem, solution) {
        report.push(e);
    }
    report.push(check_worst_type_pricing(problem, solution));
    report.push(check_quasi_concavity(solution));
    report.push(check_directions(problem));
    for e in check_settlement(problem, solution, &options.alphas)? {
        report.push(e);
    }
    let full_set = solution.outcome.admissible.len() == problem.types().len();
    let small = problem.types().len() <= ORACLE_MAX_TYPES && problem.grid().n_cells() <= ORACLE_MAX_CELLS;
    if options.oracle && small && full_set {
        report.push(check_oracle(problem, solution)?);
        if problem.grid().n_cells() <= 2 {
            report.push(check_joint_lattice(problem, solution, 200)?);
        }
    }
    Ok(report)
}

/// Copy of `solution` whose schedule has the prices of the upper half of the
/// open range scaled by `factor`, keeping the original claimed outcome.
pub fn corrupted(solution: &Solution, factor: f64) -> Solution {
    let from = solution.schedule.open_cells() / 2;
    Solution {
        schedule: solution.schedule.scaled_from(from, factor),
        outcome: solution.outcome.clone(),
    }
}

/// Keeps `schedule` but shifts its anchor.
pub fn with_anchor(schedule: &PriceSchedule, t0: f64) -> PriceSchedule {
    schedule.clone().with_t0(t0)
}
