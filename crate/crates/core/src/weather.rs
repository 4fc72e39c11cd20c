//! Discrete weather distributions.
//!
//! Every expectation over the weather reduces to a finite weighted sum over
//! the states of a [`WeatherModel`]. Continuous Weibull wind profiles are
//! discretized on an equal-probability quantile grid so that the tails keep
//! their weight.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{config, domain, Error, Result};

/// Number of states used when a caller does not ask for a specific resolution.
pub const DEFAULT_POINTS: usize = 200;

/// Upper quantile of the discretized support. The residual mass above it is
/// folded into the top state.
pub const TRUNCATION_QUANTILE: f64 = 0.9999;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherState {
    /// Wind speed in m/s.
    pub speed: f64,
    pub prob: f64,
}

/// Finite distribution over wind speeds, sorted by strictly increasing speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeatherModel", into = "RawWeatherModel")]
pub struct WeatherModel {
    states: Vec<WeatherState>,
    description: String,
}

#[derive(Serialize, Deserialize)]
struct RawWeatherModel {
    states: Vec<WeatherState>,
    description: String,
}

impl TryFrom<RawWeatherModel> for WeatherModel {
    type Error = Error;

    fn try_from(raw: RawWeatherModel) -> Result<Self> {
        WeatherModel::from_states(raw.states, raw.description)
    }
}

impl From<WeatherModel> for RawWeatherModel {
    fn from(m: WeatherModel) -> Self {
        RawWeatherModel {
            states: m.states,
            description: m.description,
        }
    }
}

impl WeatherModel {
    /// Builds a model from explicit states, checking the distribution invariants.
    pub fn from_states(states: Vec<WeatherState>, description: impl Into<String>) -> Result<Self> {
        if states.is_empty() {
            return Err(config("weather model needs at least one state"));
        }
        for (i, s) in states.iter().enumerate() {
            if !(s.speed >= 0.0) || !s.speed.is_finite() {
                return Err(domain(format!("weather state {i}: speed {} must be >= 0", s.speed)));
            }
            if !(s.prob >= 0.0) || !s.prob.is_finite() {
                return Err(domain(format!("weather state {i}: probability {} must be >= 0", s.prob)));
            }
        }
        if let Some(i) = states.windows(2).position(|w| w[1].speed <= w[0].speed) {
            return Err(config(format!(
                "weather states must have strictly increasing speed (state {})",
                i + 1
            )));
        }
        let total: f64 = states.iter().map(|s| s.prob).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(config(format!("weather probabilities sum to {total}, expected 1")));
        }
        Ok(WeatherModel {
            states,
            description: description.into(),
        })
    }

    /// Weibull wind profile with the given shape and mean speed.
    ///
    /// The scale is recovered from the mean as `mean / Γ(1 + 1/shape)`. The
    /// probability range `[0, TRUNCATION_QUANTILE]` is split into `n_points`
    /// cells of equal mass; each cell is represented by its conditional mean
    /// speed, and the mass above the truncation quantile is added to the top
    /// cell.
    pub fn weibull(shape: f64, mean_speed: f64, n_points: usize) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(domain(format!("weibull shape must be > 0, got {shape}")));
        }
        if !(mean_speed > 0.0) || !mean_speed.is_finite() {
            return Err(domain(format!("weibull mean speed must be > 0, got {mean_speed}")));
        }
        if n_points < 2 {
            return Err(config(format!("weibull discretization needs n_points >= 2, got {n_points}")));
        }
        let dist = Weibull::from_mean(shape, mean_speed);
        let cell_mass = TRUNCATION_QUANTILE / n_points as f64;
        let mut states = Vec::with_capacity(n_points);
        let mut lo = 0.0;
        for i in 0..n_points {
            let hi = dist.quantile(cell_mass * (i + 1) as f64);
            let mass = dist.cdf(hi) - dist.cdf(lo);
            let speed = if mass > 0.0 {
                (dist.partial_mean(lo, hi) / mass).clamp(lo, hi)
            } else {
                0.5 * (lo + hi)
            };
            let prob = if i + 1 == n_points {
                1.0 - cell_mass * (n_points - 1) as f64
            } else {
                cell_mass
            };
            states.push(WeatherState { speed, prob });
            lo = hi;
        }
        WeatherModel::from_states(
            states,
            format!("weibull(shape={shape}, mean={mean_speed}, n_points={n_points})"),
        )
    }

    /// Empirical distribution of observed speeds: unique values weighted by frequency.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(config("empirical weather model needs at least one sample"));
        }
        if let Some(bad) = samples.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(domain(format!("wind speed samples must be >= 0, got {bad}")));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut states: Vec<WeatherState> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for s in sorted {
            match states.last() {
                Some(last) if last.speed == s => *counts.last_mut().unwrap() += 1,
                _ => {
                    states.push(WeatherState { speed: s, prob: 0.0 });
                    counts.push(1);
                }
            }
        }
        for (st, c) in states.iter_mut().zip(&counts) {
            st.prob = *c as f64 / n;
        }
        WeatherModel::from_states(states, format!("empirical({} samples)", samples.len()))
    }

    /// Point mass at a single speed.
    pub fn point_mass(speed: f64) -> Result<Self> {
        WeatherModel::from_states(vec![WeatherState { speed, prob: 1.0 }], format!("point({speed})"))
    }

    pub fn states(&self) -> &[WeatherState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `E_W[f(W)] = Σ prob_i f(w_i)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.states.iter().map(|s| s.prob * f(s.speed)).sum()
    }

    /// `P(W <= w)`.
    pub fn cdf(&self, w: f64) -> f64 {
        self.states
            .iter()
            .take_while(|s| s.speed <= w)
            .map(|s| s.prob)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|w| w)
    }

    pub fn max_speed(&self) -> f64 {
        self.states.last().map(|s| s.speed).unwrap_or(0.0)
    }
}

/// Continuous Weibull law used for discretization and as a closed-form reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull {
    pub shape: f64,
    pub scale: f64,
}

impl Weibull {
    pub fn from_mean(shape: f64, mean: f64) -> Self {
        Weibull {
            shape,
            scale: mean / gamma(1.0 + 1.0 / shape),
        }
    }

    pub fn cdf(&self, w: f64) -> f64 {
        if w <= 0.0 {
            0.0
        } else {
            -(-(w / self.scale).powf(self.shape)).exp_m1()
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.scale * (-(-u).ln_1p()).powf(1.0 / self.shape)
    }

    pub fn mean(&self) -> f64 {
        self.scale * gamma(1.0 + 1.0 / self.shape)
    }

    /// `∫_lo^hi w dF(w)`.
    pub fn partial_mean(&self, lo: f64, hi: f64) -> f64 {
        let a = 1.0 + 1.0 / self.shape;
        let upper = |w: f64| {
            if w <= 0.0 {
                0.0
            } else {
                gamma_lr(a, (w / self.scale).powf(self.shape))
            }
        };
        self.mean() * (upper(hi) - upper(lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weibull_recovers_mean() {
        let m = WeatherModel::weibull(3.0, 5.0, 200).unwrap();
        let total: f64 = m.states().iter().map(|s| s.prob).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((m.mean() - 5.0).abs() < 0.05, "mean {}", m.mean());
        let analytic = Weibull::from_mean(3.0, 5.0);
        assert!((analytic.scale * gamma(1.0 + 1.0 / 3.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_median() {
        let m = WeatherModel::weibull(1.0, 1.0, 2000).unwrap();
        let p = m.cdf(std::f64::consts::LN_2);
        assert!((p - 0.5).abs() < 0.01, "P(W <= ln2) = {p}");
    }

    #[test]
    fn weibull_rejects_bad_inputs() {
        assert!(matches!(WeatherModel::weibull(3.0, 5.0, 1), Err(Error::Configuration(_))));
        assert!(matches!(WeatherModel::weibull(0.0, 5.0, 10), Err(Error::ParameterDomain(_))));
        assert!(matches!(WeatherModel::weibull(3.0, -1.0, 10), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn weibull_mean_error_shrinks_with_resolution() {
        let errs: Vec<f64> = [25, 50, 100, 200, 400, 800]
            .iter()
            .map(|&n| (WeatherModel::weibull(3.0, 5.0, n).unwrap().mean() - 5.0).abs())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0], "{errs:?}");
        }
    }

    #[test]
    fn empirical_frequencies() {
        let m = WeatherModel::empirical(&[5.0, 5.0, 10.0]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.states()[0].speed, 5.0);
        assert!((m.states()[0].prob - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.states()[1].prob - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.expect(|w| w) - 20.0 / 3.0).abs() < 1e-12);

        let d = WeatherModel::empirical(&[0.0]).unwrap();
        assert_eq!(d.states(), &[WeatherState { speed: 0.0, prob: 1.0 }]);

        assert!(matches!(WeatherModel::empirical(&[]), Err(Error::Configuration(_))));
        assert!(matches!(WeatherModel::empirical(&[1.0, -2.0]), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn expect_constant_is_one() {
        let m = WeatherModel::weibull(2.0, 7.0, 50).unwrap();
        assert!((m.expect(|_| 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_matches_weibull_survival() {
        let m = WeatherModel::weibull(3.0, 5.0, 200).unwrap();
        let law = Weibull::from_mean(3.0, 5.0);
        for q_over_gamma in [10.0, 50.0, 125.0, 300.0, 800.0] {
            let threshold: f64 = q_over_gamma;
            let e = m.expect(|w| if w.powi(3) >= threshold { 1.0 } else { 0.0 });
            let exact = 1.0 - law.cdf(threshold.cbrt());
            // one cell of mass is the discretization error of a step function
            assert!((e - exact).abs() <= 1.0 / 200.0 + 1e-9, "{e} vs {exact}");
        }
    }

    #[test]
    fn rejects_unsorted_states() {
        let s = vec![
            WeatherState { speed: 2.0, prob: 0.5 },
            WeatherState { speed: 1.0, prob: 0.5 },
        ];
        assert!(WeatherModel::from_states(s, "").is_err());
    }
}
