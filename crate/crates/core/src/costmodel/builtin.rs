use crate::error::{domain, Result};
use crate::weather::WeatherModel;

use super::{CostModel, Direction, SellerType};

/// Wind turbine output: zero outside `[v_ci, v_co]`, cubic up to the rated
/// speed `v_r`, flat between `v_r` and `v_co`.
pub fn power_curve(gamma: f64, v_ci: f64, v_r: f64, v_co: f64, w: f64) -> f64 {
    if w < v_ci || w > v_co {
        0.0
    } else if w <= v_r {
        gamma * w.powi(3)
    } else {
        gamma * v_r.powi(3)
    }
}

/// `c0 + theta_w min{q, g} + theta_c max{q - g, 0}` for renewable output `g`.
fn two_plant_cost(c0: f64, theta_w: f64, theta_c: f64, g: f64, q: f64) -> f64 {
    c0 + two_plant_variable(theta_w, theta_c, g, q)
}

fn two_plant_variable(theta_w: f64, theta_c: f64, g: f64, q: f64) -> f64 {
    theta_w * q.min(g) + theta_c * (q - g).max(0.0)
}

/// Average marginal cost over `[lo, hi]` for a fixed renewable output `g`.
fn two_plant_cell(theta_w: f64, theta_c: f64, g: f64, lo: f64, hi: f64) -> f64 {
    let renewable = (g - lo).clamp(0.0, hi - lo) / (hi - lo);
    theta_c - (theta_c - theta_w) * renewable
}

/// Right derivative in `q`: the renewable unit is used while `g > q`.
fn two_plant_marginal(theta_w: f64, theta_c: f64, g: f64, q: f64) -> f64 {
    if g > q {
        theta_w
    } else {
        theta_c
    }
}

/// Free wind turbine `gamma w^3` plus a conventional plant at `theta_c`.
/// Parameters: `(c0, theta_c, gamma)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimpleCost;

impl SimpleCost {
    fn unpack(x: &SellerType) -> (f64, f64, f64) {
        (x.params[0], x.params[1], x.params[2])
    }
}

impl CostModel for SimpleCost {
    fn name(&self) -> &str {
        "simple"
    }

    fn param_names(&self) -> &[&'static str] {
        &["c0", "theta_c", "gamma"]
    }

    fn directions(&self) -> Vec<Direction> {
        vec![Direction::Raises, Direction::Raises, Direction::Lowers]
    }

    fn validate_params(&self, p: &[f64]) -> Result<()> {
        if p[2] <= 0.0 {
            return Err(domain(format!("gamma = {} must be > 0", p[2])));
        }
        Ok(())
    }

    fn cost(&self, x: &SellerType, q: f64, w: f64) -> f64 {
        let (c0, theta_c, gamma) = Self::unpack(x);
        two_plant_cost(c0, 0.0, theta_c, gamma * w.powi(3), q)
    }

    fn generation(&self, x: &SellerType, w: f64) -> Option<f64> {
        Some(x.params[2] * w.powi(3))
    }

    fn expected_cost(&self, x: &SellerType, q: f64, weather: &WeatherModel) -> f64 {
        let (c0, theta_c, gamma) = Self::unpack(x);
        c0 + weather.expect(|w| two_plant_variable(0.0, theta_c, gamma * w.powi(3), q))
    }

    fn analytic_marginal_cost(&self, x: &SellerType, q: f64, weather: &WeatherModel) -> Option<f64> {
        let (_, theta_c, gamma) = Self::unpack(x);
        Some(weather.expect(|w| two_plant_marginal(0.0, theta_c, gamma * w.powi(3), q)))
    }

    fn cell_marginal_cost(&self, x: &SellerType, lo: f64, hi: f64, weather: &WeatherModel) -> f64 {
        let (_, theta_c, gamma) = Self::unpack(x);
        weather.expect(|w| two_plant_cell(0.0, theta_c, gamma * w.powi(3), lo, hi))
    }
}

/// Parameters of the wind plus conventional technology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindParams {
    /// Start-up and capital cost, k$.
    pub c0: f64,
    /// Marginal cost of wind energy, k$/MWh.
    pub theta_w: f64,
    /// Marginal cost of conventional energy, k$/MWh.
    pub theta_c: f64,
    /// Cut-in speed, m/s.
    pub v_ci: f64,
    /// Rated speed, m/s.
    pub v_r: f64,
    /// Cut-out speed, m/s.
    pub v_co: f64,
    /// Turbine size, MWh/(m/s)^3.
    pub gamma: f64,
}

impl WindParams {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.c0, self.theta_w, self.theta_c, self.v_ci, self.v_r, self.v_co, self.gamma]
    }

    pub fn from_slice(p: &[f64]) -> Self {
        WindParams {
            c0: p[0],
            theta_w: p[1],
            theta_c: p[2],
            v_ci: p[3],
            v_r: p[4],
            v_co: p[5],
            gamma: p[6],
        }
    }

    pub fn generation(&self, w: f64) -> f64 {
        power_curve(self.gamma, self.v_ci, self.v_r, self.v_co, w)
    }

    /// The six published benchmark types `a`..`f`; no one of them is worst.
    pub fn reference_types() -> [(&'static str, WindParams); 6] {
        let t = |c0, theta_w, theta_c, v_ci, v_r, v_co, gamma| WindParams {
            c0,
            theta_w,
            theta_c,
            v_ci,
            v_r,
            v_co,
            gamma,
        };
        [
            ("a", t(4.0, 0.2, 1.2, 3.0, 13.0, 20.0, 1.0)),
            ("b", t(4.0, 0.2, 1.2, 3.0, 13.0, 20.0, 2.0)),
            ("c", t(5.0, 0.1, 1.2, 3.0, 13.0, 20.0, 1.0)),
            ("d", t(5.0, 0.2, 1.0, 1.0, 17.0, 28.0, 2.0)),
            ("e", t(6.0, 0.1, 1.0, 1.0, 17.0, 28.0, 1.0)),
            ("f", t(6.0, 0.1, 1.0, 1.0, 13.0, 28.0, 2.0)),
        ]
    }
}

/// Wind turbine with power curve `g(w)` and operating cost `theta_w`, plus a
/// conventional plant at `theta_c`.
/// Parameters: `(c0, theta_w, theta_c, v_ci, v_r, v_co, gamma)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct WindConventionalCost;

impl CostModel for WindConventionalCost {
    fn name(&self) -> &str {
        "wind_conventional"
    }

    fn param_names(&self) -> &[&'static str] {
        &["c0", "theta_w", "theta_c", "v_ci", "v_r", "v_co", "gamma"]
    }

    fn directions(&self) -> Vec<Direction> {
        use Direction::*;
        vec![Raises, Raises, Raises, Raises, Lowers, Lowers, Lowers]
    }

    fn validate_params(&self, p: &[f64]) -> Result<()> {
        let w = WindParams::from_slice(p);
        if !(w.v_ci < w.v_r && w.v_r < w.v_co) {
            return Err(domain(format!(
                "need v_ci < v_r < v_co, got {} / {} / {}",
                w.v_ci, w.v_r, w.v_co
            )));
        }
        if w.gamma <= 0.0 {
            return Err(domain(format!("gamma = {} must be > 0", w.gamma)));
        }
        // the cost is convex in q only when wind is the cheaper plant
        if w.theta_w > w.theta_c {
            return Err(domain(format!(
                "theta_w = {} above theta_c = {} makes the cost non-convex",
                w.theta_w, w.theta_c
            )));
        }
        Ok(())
    }

    fn cost(&self, x: &SellerType, q: f64, w: f64) -> f64 {
        let p = WindParams::from_slice(&x.params);
        two_plant_cost(p.c0, p.theta_w, p.theta_c, p.generation(w), q)
    }

    fn generation(&self, x: &SellerType, w: f64) -> Option<f64> {
        Some(WindParams::from_slice(&x.params).generation(w))
    }

    fn expected_cost(&self, x: &SellerType, q: f64, weather: &WeatherModel) -> f64 {
        let p = WindParams::from_slice(&x.params);
        p.c0 + weather.expect(|w| two_plant_variable(p.theta_w, p.theta_c, p.generation(w), q))
    }

    fn analytic_marginal_cost(&self, x: &SellerType, q: f64, weather: &WeatherModel) -> Option<f64> {
        let p = WindParams::from_slice(&x.params);
        Some(weather.expect(|w| two_plant_marginal(p.theta_w, p.theta_c, p.generation(w), q)))
    }

    fn cell_marginal_cost(&self, x: &SellerType, lo: f64, hi: f64, weather: &WeatherModel) -> f64 {
        let p = WindParams::from_slice(&x.params);
        weather.expect(|w| two_plant_cell(p.theta_w, p.theta_c, p.generation(w), lo, hi))
    }
}
