//! Seller types, generation cost, and the dominance order among types.
//!
//! Costs are in k$ and quantities in MWh, so marginal costs in k$/MWh read
//! directly as $/kWh.

mod builtin;

pub use builtin::{power_curve, SimpleCost, WindConventionalCost, WindParams};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::weather::WeatherModel;

/// How raising one type coordinate moves the expected marginal cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Raises,
    Lowers,
}

/// One point of the type space.
///
/// `params` are interpreted by the cost model (see [`CostModel::param_names`]);
/// the first entry is always the start-up cost `C(0, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellerType {
    pub id: String,
    pub params: Vec<f64>,
    pub prior: f64,
}

impl SellerType {
    pub fn new(id: impl Into<String>, params: Vec<f64>, prior: f64) -> Self {
        SellerType {
            id: id.into(),
            params,
            prior,
        }
    }

    /// Type for [`SimpleCost`]: `(c0, theta_c, gamma)`.
    pub fn simple(id: impl Into<String>, c0: f64, theta_c: f64, gamma: f64, prior: f64) -> Self {
        SellerType::new(id, vec![c0, theta_c, gamma], prior)
    }

    /// Type for [`WindConventionalCost`].
    pub fn wind(id: impl Into<String>, p: WindParams, prior: f64) -> Self {
        SellerType::new(id, p.to_vec(), prior)
    }

    pub fn startup_cost(&self) -> f64 {
        self.params[0]
    }
}

/// A seller cost technology `C(q, w, x)`.
///
/// Implementations must be convex and nondecreasing in `q` for every weather
/// state and type, with `C(0, w, x) = x.params[0]`. [`check_model_invariants`]
/// audits these properties on a grid; the solver refuses models that fail it.
pub trait CostModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Parameter names, index 0 being the start-up cost.
    fn param_names(&self) -> &[&'static str];

    /// Monotone direction of the expected marginal cost in each parameter.
    fn directions(&self) -> Vec<Direction>;

    /// Model-specific parameter checks beyond arity and non-negativity.
    fn validate_params(&self, _params: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Realized cost for `q >= 0`.
    fn cost(&self, x: &SellerType, q: f64, w: f64) -> f64;

    /// Renewable output at wind speed `w`, if the model has one.
    fn generation(&self, _x: &SellerType, _w: f64) -> Option<f64> {
        None
    }

    fn expected_cost(&self, x: &SellerType, q: f64, weather: &WeatherModel) -> f64 {
        weather.expect(|w| self.cost(x, q, w))
    }

    /// Closed-form right derivative of the expected cost, when available.
    fn analytic_marginal_cost(&self, _x: &SellerType, _q: f64, _weather: &WeatherModel) -> Option<f64> {
        None
    }

    /// Average expected marginal cost over `[lo, hi]`.
    fn cell_marginal_cost(&self, x: &SellerType, lo: f64, hi: f64, weather: &WeatherModel) -> f64 {
        (self.expected_cost(x, hi, weather) - self.expected_cost(x, lo, weather)) / (hi - lo)
    }

    fn validate_type(&self, x: &SellerType) -> Result<()> {
        let names = self.param_names();
        if x.params.len() != names.len() {
            return Err(config(format!(
                "type {}: model {} expects {} parameters ({}), got {}",
                x.id,
                self.name(),
                names.len(),
                names.join(", "),
                x.params.len()
            )));
        }
        for (name, v) in names.iter().zip(&x.params) {
            if !v.is_finite() || *v < 0.0 {
                return Err(domain(format!("type {}: {name} = {v} must be finite and >= 0", x.id)));
            }
        }
        self.validate_params(&x.params)
            .map_err(|e| prefix_error(e, &format!("type {}: ", x.id)))
    }
}

fn prefix_error(e: Error, prefix: &str) -> Error {
    match e {
        Error::ParameterDomain(m) => Error::ParameterDomain(format!("{prefix}{m}")),
        Error::Configuration(m) => Error::Configuration(format!("{prefix}{m}")),
        Error::Unsupported(m) => Error::Unsupported(format!("{prefix}{m}")),
        Error::Invariant(m) => Error::Invariant(format!("{prefix}{m}")),
    }
}

/// `C(q, w, x)`; rejects negative quantities.
pub fn realized_cost(model: &dyn CostModel, x: &SellerType, q: f64, w: f64) -> Result<f64> {
    check_quantity(q)?;
    Ok(model.cost(x, q, w))
}

/// `E_W C(q, W, x)`.
pub fn expected_cost(model: &dyn CostModel, x: &SellerType, q: f64, weather: &WeatherModel) -> Result<f64> {
    check_quantity(q)?;
    Ok(model.expected_cost(x, q, weather))
}

/// Expected marginal cost `c(q, x)`.
///
/// Built-in models answer in closed form. Other models fall back to a central
/// difference of the expected cost with step `fd_step` (forward at `q < fd_step`).
pub fn expected_marginal_cost(
    model: &dyn CostModel,
    x: &SellerType,
    q: f64,
    weather: &WeatherModel,
    fd_step: f64,
) -> Result<f64> {
    check_quantity(q)?;
    if let Some(c) = model.analytic_marginal_cost(x, q, weather) {
        return Ok(c);
    }
    if !(fd_step > 0.0) {
        return Err(domain(format!("finite-difference step must be > 0, got {fd_step}")));
    }
    let ec = |q: f64| model.expected_cost(x, q, weather);
    Ok(if q < fd_step {
        (ec(q + fd_step) - ec(q)) / fd_step
    } else {
        (ec(q + fd_step) - ec(q - fd_step)) / (2.0 * fd_step)
    })
}

fn check_quantity(q: f64) -> Result<()> {
    if q >= 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("quantity must be finite and >= 0, got {q}")))
    }
}

/// Finite type space with a discrete prior.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSpace {
    types: Vec<SellerType>,
    directions: Vec<Direction>,
}

impl TypeSpace {
    pub fn new(types: Vec<SellerType>, model: &dyn CostModel) -> Result<Self> {
        if types.is_empty() {
            return Err(config("type space must contain at least one type"));
        }
        let mut seen = HashSet::new();
        for x in &types {
            if !seen.insert(x.id.as_str()) {
                return Err(config(format!("duplicate type id {:?}", x.id)));
            }
            if !(0.0..=1.0).contains(&x.prior) {
                return Err(domain(format!("type {}: prior {} must lie in [0, 1]", x.id, x.prior)));
            }
            model.validate_type(x)?;
        }
        let total: f64 = types.iter().map(|x| x.prior).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(config(format!("type priors sum to {total}, expected 1")));
        }
        Ok(TypeSpace {
            types,
            directions: model.directions(),
        })
    }

    /// Same types, each with weight `1/n`.
    pub fn uniform(mut types: Vec<SellerType>, model: &dyn CostModel) -> Result<Self> {
        let w = 1.0 / types.len().max(1) as f64;
        for x in &mut types {
            x.prior = w;
        }
        TypeSpace::new(types, model)
    }

    pub fn types(&self) -> &[SellerType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    /// Number of leading cost-raising coordinates, if the directions come in
    /// that block form.
    pub fn dominance_split(&self) -> Option<usize> {
        let m = self.directions.iter().take_while(|d| **d == Direction::Raises).count();
        self.directions[m..]
            .iter()
            .all(|d| *d == Direction::Lowers)
            .then_some(m)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.types.iter().position(|x| x.id == id)
    }
}

/// Outcome of comparing two types by expected cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    Better,
    Worse,
    Equal,
    Incomparable,
}

impl Dominance {
    pub fn flip(self) -> Self {
        match self {
            Dominance::Better => Dominance::Worse,
            Dominance::Worse => Dominance::Better,
            d => d,
        }
    }
}

/// Compares two tabulated expected-cost curves: `Better` when the first is
/// nowhere above the second and somewhere strictly below.
pub fn compare_cost_curves(x: &[f64], y: &[f64]) -> Dominance {
    let mut below = false;
    let mut above = false;
    for (a, b) in x.iter().zip(y) {
        let tol = 1e-12 * a.abs().max(b.abs()).max(1.0);
        if a < &(b - tol) {
            below = true;
        } else if a > &(b + tol) {
            above = true;
        }
    }
    match (below, above) {
        (false, false) => Dominance::Equal,
        (true, false) => Dominance::Better,
        (false, true) => Dominance::Worse,
        (true, true) => Dominance::Incomparable,
    }
}

/// Whether `x` is better than `y`: `E_W C(q, W, x) <= E_W C(q, W, y)` at every
/// grid quantity, strictly somewhere.
pub fn dominates(
    x: &SellerType,
    y: &SellerType,
    model: &dyn CostModel,
    weather: &WeatherModel,
    grid: &[f64],
) -> Dominance {
    let cx: Vec<f64> = grid.iter().map(|&q| model.expected_cost(x, q, weather)).collect();
    let cy: Vec<f64> = grid.iter().map(|&q| model.expected_cost(y, q, weather)).collect();
    compare_cost_curves(&cx, &cy)
}

/// Index of the type that every other type is better than or equal to.
pub fn find_worst_type(space: &TypeSpace, model: &dyn CostModel, weather: &WeatherModel, grid: &[f64]) -> Option<usize> {
    let curves: Vec<Vec<f64>> = space
        .types()
        .iter()
        .map(|x| grid.iter().map(|&q| model.expected_cost(x, q, weather)).collect())
        .collect();
    worst_of_curves(&curves)
}

pub(crate) fn worst_of_curves(curves: &[Vec<f64>]) -> Option<usize> {
    (0..curves.len()).find(|&w| {
        (0..curves.len()).all(|x| {
            x == w
                || matches!(
                    compare_cost_curves(&curves[x], &curves[w]),
                    Dominance::Better | Dominance::Equal
                )
        })
    })
}

/// Coordinate-wise order implied by the declared directions.
pub fn param_order(x: &SellerType, y: &SellerType, directions: &[Direction]) -> Dominance {
    let mut better = false;
    let mut worse = false;
    for ((a, b), d) in x.params.iter().zip(&y.params).zip(directions) {
        let (lo, hi) = match d {
            Direction::Raises => (a < b, a > b),
            Direction::Lowers => (a > b, a < b),
        };
        better |= lo;
        worse |= hi;
    }
    match (better, worse) {
        (false, false) => Dominance::Equal,
        (true, false) => Dominance::Better,
        (false, true) => Dominance::Worse,
        (true, true) => Dominance::Incomparable,
    }
}

/// Audits that realized cost equals the start-up cost at `q = 0` for every
/// weather state and is nondecreasing and convex in `q` on the grid.
pub fn check_model_invariants(
    model: &dyn CostModel,
    space: &TypeSpace,
    weather: &WeatherModel,
    grid: &[f64],
) -> Result<()> {
    for x in space.types() {
        for s in weather.states() {
            let c0 = model.cost(x, 0.0, s.speed);
            if (c0 - x.startup_cost()).abs() > 1e-12 * x.startup_cost().abs().max(1.0) {
                return Err(Error::Invariant(format!(
                    "type {}: C(0, w={}) = {c0} differs from start-up cost {}",
                    x.id,
                    s.speed,
                    x.startup_cost()
                )));
            }
            let costs: Vec<f64> = grid.iter().map(|&q| model.cost(x, q, s.speed)).collect();
            for (i, win) in costs.windows(2).enumerate() {
                let tol = 1e-9 * win[1].abs().max(1.0);
                if win[1] < win[0] - tol {
                    return Err(Error::Invariant(format!(
                        "type {}: cost decreases between q={} and q={} at w={}",
                        x.id,
                        grid[i],
                        grid[i + 1],
                        s.speed
                    )));
                }
            }
            for (i, win) in costs.windows(3).enumerate() {
                let (h1, h2) = (grid[i + 1] - grid[i], grid[i + 2] - grid[i + 1]);
                let s1 = (win[1] - win[0]) / h1;
                let s2 = (win[2] - win[1]) / h2;
                let tol = 1e-9 * s1.abs().max(s2.abs()).max(1.0);
                if s2 < s1 - tol {
                    return Err(Error::Invariant(format!(
                        "type {}: cost not convex around q={} at w={}",
                        x.id,
                        grid[i + 1],
                        s.speed
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Worst violation of one declared monotone direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionAudit {
    pub param: &'static str,
    pub declared: Direction,
    /// Largest move of `c(q, x)` against the declared direction, k$/MWh.
    pub worst_violation: f64,
    pub witness: String,
}

/// Perturbs each parameter of each type upward and measures whether the cell
/// marginal costs move the declared way. Perturbations that make a type
/// invalid are skipped.
pub fn audit_directions(
    model: &dyn CostModel,
    space: &TypeSpace,
    weather: &WeatherModel,
    grid: &[f64],
) -> Vec<DirectionAudit> {
    let names = model.param_names();
    let directions = model.directions();
    let cells = |x: &SellerType| -> Vec<f64> {
        grid.windows(2)
            .map(|g| model.cell_marginal_cost(x, g[0], g[1], weather))
            .collect()
    };
    names
        .iter()
        .zip(&directions)
        .enumerate()
        .map(|(i, (name, dir))| {
            let mut worst = 0.0_f64;
            let mut witness = String::new();
            for x in space.types() {
                let mut bumped = x.clone();
                bumped.params[i] += 0.05 * x.params[i].abs().max(0.1);
                if model.validate_type(&bumped).is_err() {
                    continue;
                }
                let base = cells(x);
                let moved = cells(&bumped);
                for (k, (b, m)) in base.iter().zip(&moved).enumerate() {
                    let against = match dir {
                        Direction::Raises => b - m,
                        Direction::Lowers => m - b,
                    };
                    if against > worst {
                        worst = against;
                        witness = format!("type {} cell {k}", x.id);
                    }
                }
            }
            DirectionAudit {
                param: name,
                declared: *dir,
                worst_violation: worst,
                witness,
            }
        })
        .collect()
}
