//! Named scalar payoffs `φ: ℝ → ℝ` shared by the solvers, the analysis
//! helpers and the command-line front end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payoff {
    /// `slope·x + intercept`
    Linear {
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    /// `slope·x` clamped to `[lo, hi]`; a missing bound is infinite.
    ClampedLinear {
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        lo: Option<f64>,
        #[serde(default)]
        hi: Option<f64>,
    },
    /// Lipschitz step: 0 below `threshold − width/2`, 1 above
    /// `threshold + width/2`, linear in between.
    IndicatorSmoothed { threshold: f64, width: f64 },
    /// Piecewise-linear interpolation through `(xs[i], ys[i])`, constant
    /// outside the table.
    Table { xs: Vec<f64>, ys: Vec<f64> },
}

impl Payoff {
    pub fn linear() -> Self {
        Payoff::Linear {
            slope: 1.0,
            intercept: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Payoff::Linear { slope, intercept } if finite(&[*slope, *intercept]) => Ok(()),
            Payoff::ClampedLinear { slope, lo, hi } => {
                let ok = slope.is_finite()
                    && lo.is_none_or(|l| !l.is_nan())
                    && hi.is_none_or(|h| !h.is_nan())
                    && match (lo, hi) {
                        (Some(l), Some(h)) => l <= h,
                        _ => true,
                    };
                if ok {
                    Ok(())
                } else {
                    Err(Error::invalid("clamped payoff needs a finite slope and lo <= hi"))
                }
            }
            Payoff::IndicatorSmoothed { threshold, width }
                if threshold.is_finite() && *width > 0.0 && width.is_finite() =>
            {
                Ok(())
            }
            Payoff::IndicatorSmoothed { .. } => {
                Err(Error::invalid("smoothed indicator needs a finite threshold and positive width"))
            }
            Payoff::Table { xs, ys } => {
                if xs.is_empty() || xs.len() != ys.len() {
                    return Err(Error::invalid("payoff table needs matching, nonempty xs and ys"));
                }
                if !finite(xs) || !finite(ys) || xs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid(
                        "payoff table entries must be finite with strictly increasing xs",
                    ));
                }
                Ok(())
            }
            Payoff::Linear { .. } => Err(Error::invalid("linear payoff coefficients must be finite")),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Payoff::Linear { slope, intercept } => slope * x + intercept,
            Payoff::ClampedLinear { slope, lo, hi } => {
                let y = slope * x;
                let y = lo.map_or(y, |l| y.max(l));
                hi.map_or(y, |h| y.min(h))
            }
            Payoff::IndicatorSmoothed { threshold, width } => {
                ((x - threshold) / width + 0.5).clamp(0.0, 1.0)
            }
            Payoff::Table { xs, ys } => {
                let k = xs.partition_point(|&a| a <= x);
                if k == 0 {
                    ys[0]
                } else if k == xs.len() {
                    ys[k - 1]
                } else {
                    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                    ys[k - 1] + w * (ys[k] - ys[k - 1])
                }
            }
        }
    }
}
