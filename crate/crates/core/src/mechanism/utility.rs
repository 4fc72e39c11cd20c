use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};

/// Buyer's marginal utility `V'(q)` in k$/MWh, with `V(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuyerUtility {
    /// `V'(q) = a - b q`.
    Affine { a: f64, b: f64 },
    /// Linear interpolation through `(q, V')` breakpoints, constant outside.
    PiecewiseLinear { breakpoints: Vec<(f64, f64)> },
}

impl BuyerUtility {
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        let u = BuyerUtility::Affine { a, b };
        u.validate()?;
        Ok(u)
    }

    pub fn piecewise_linear(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let u = BuyerUtility::PiecewiseLinear { breakpoints };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BuyerUtility::Affine { a, b } => {
                if !(*a > 0.0) || !a.is_finite() {
                    return Err(domain(format!("affine marginal utility needs a > 0, got {a}")));
                }
                if !(*b >= 0.0) || !b.is_finite() {
                    return Err(domain(format!("affine marginal utility needs b >= 0, got {b}")));
                }
            }
            BuyerUtility::PiecewiseLinear { breakpoints } => {
                if breakpoints.is_empty() {
                    return Err(config("piecewise-linear marginal utility needs breakpoints"));
                }
                if breakpoints.iter().any(|(q, v)| !q.is_finite() || !v.is_finite() || *q < 0.0) {
                    return Err(domain("breakpoints must be finite with q >= 0"));
                }
                for w in breakpoints.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(config("breakpoint quantities must be strictly increasing"));
                    }
                    if w[1].1 > w[0].1 {
                        return Err(domain("marginal utility must be nonincreasing"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `V'(q)`.
    pub fn marginal(&self, q: f64) -> f64 {
        match self {
            BuyerUtility::Affine { a, b } => a - b * q,
            BuyerUtility::PiecewiseLinear { breakpoints } => {
                let first = breakpoints[0];
                let last = breakpoints[breakpoints.len() - 1];
                if q <= first.0 {
                    return first.1;
                }
                if q >= last.0 {
                    return last.1;
                }
                let k = breakpoints.partition_point(|(bq, _)| *bq <= q);
                let (q0, v0) = breakpoints[k - 1];
                let (q1, v1) = breakpoints[k];
                v0 + (v1 - v0) * (q - q0) / (q1 - q0)
            }
        }
    }

    /// `V(q) = ∫_0^q V'(l) dl`.
    pub fn value(&self, q: f64) -> f64 {
        match self {
            BuyerUtility::Affine { a, b } => a * q - 0.5 * b * q * q,
            BuyerUtility::PiecewiseLinear { breakpoints } => {
                // knots: 0, the breakpoints inside (0, q), and q itself
                let mut knots = vec![0.0];
                knots.extend(breakpoints.iter().map(|(bq, _)| *bq).filter(|bq| *bq > 0.0 && *bq < q));
                knots.push(q);
                knots
                    .windows(2)
                    .map(|w| 0.5 * (w[1] - w[0]) * (self.marginal(w[0]) + self.marginal(w[1])))
                    .sum()
            }
        }
    }

    /// Average of `V'` over `[lo, hi]`.
    pub fn cell_average(&self, lo: f64, hi: f64) -> f64 {
        match self {
            BuyerUtility::Affine { a, b } => a - b * 0.5 * (lo + hi),
            BuyerUtility::PiecewiseLinear { .. } => (self.value(hi) - self.value(lo)) / (hi - lo),
        }
    }

    /// Smallest `q >= 0` with `V'(q) <= 0`, if any.
    pub fn zero_crossing(&self) -> Option<f64> {
        match self {
            BuyerUtility::Affine { a, b } => (*b > 0.0).then(|| a / b),
            BuyerUtility::PiecewiseLinear { breakpoints } => {
                if breakpoints[0].1 <= 0.0 {
                    return Some(0.0);
                }
                breakpoints.windows(2).find(|w| w[1].1 <= 0.0).map(|w| {
                    let ((q0, v0), (q1, v1)) = (w[0], w[1]);
                    q0 + v0 * (q1 - q0) / (v0 - v1)
                })
            }
        }
    }
}
