use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Margin loss `l(t)` on `t = y wᵀx`.
///
/// Every supported loss is convex and continuously differentiable with
/// `|l′| ≤ 1` and an `l′` that is `c`-Lipschitz.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossSpec {
    #[default]
    Logistic,
    /// Huber-smoothed hinge around the hinge point `t = 1` with half-width `h`.
    SmoothedHinge { h: f64 },
}

impl LossSpec {
    pub fn smoothed_hinge(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("h", "half-width must be positive"));
        }
        Ok(LossSpec::SmoothedHinge { h })
    }

    /// Lipschitz constant of `l′`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            LossSpec::Logistic => 0.25,
            LossSpec::SmoothedHinge { h } => 1.0 / (2.0 * h),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::Logistic => "logistic",
            LossSpec::SmoothedHinge { .. } => "smoothed-hinge",
        }
    }

    /// `(l(t), l′(t))`.
    pub fn value_and_deriv(&self, t: f64) -> (f64, f64) {
        match *self {
            LossSpec::Logistic => {
                if t >= 0.0 {
                    let e = (-t).exp();
                    (e.ln_1p(), -e / (1.0 + e))
                } else {
                    let e = t.exp();
                    (-t + e.ln_1p(), -1.0 / (1.0 + e))
                }
            }
            LossSpec::SmoothedHinge { h } => {
                if t > 1.0 + h {
                    (0.0, 0.0)
                } else if t < 1.0 - h {
                    (1.0 - t, -1.0)
                } else {
                    let u = 1.0 + h - t;
                    (u * u / (4.0 * h), -u / (2.0 * h))
                }
            }
        }
    }

    pub fn second_deriv(&self, t: f64) -> f64 {
        match *self {
            LossSpec::Logistic => {
                let e = (-t.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            LossSpec::SmoothedHinge { h } => {
                if (t - 1.0).abs() <= h {
                    1.0 / (2.0 * h)
                } else {
                    0.0
                }
            }
        }
    }
}
