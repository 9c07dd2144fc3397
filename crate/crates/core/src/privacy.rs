//! Output perturbation.
//!
//! A released vector `f` is sanitized as `f + η` with density
//! `p(η) ∝ exp(−β‖η‖)` and `β = ε / S(f)`, where `S(f)` is the L2
//! sensitivity of `f` over neighboring inputs. Here neighbors differ in all
//! private samples of one party.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Task;
use crate::linear::LinearModel;
use crate::{seed, Error, Result};

/// Release mechanisms with a known sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    /// ERM on majority-voted auxiliary labels.
    VoteErm,
    /// Weighted ERM on auxiliary vote fractions.
    SoftErm,
    /// Plain ERM on `N` private samples, single-sample neighbors.
    StandardErm,
    /// Average of `M` local linear models.
    ParamAvg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivitySpec {
    pub mechanism: Mechanism,
    /// Only binary vs. multiclass matters; the bounds do not depend on `K`.
    pub task: Task,
    pub lambda: f64,
    /// Number of parties `M`.
    pub parties: usize,
    /// Sample count `N`: the auxiliary pool size for aux protection, the
    /// training set size for standard ERM. Unused otherwise.
    pub samples: usize,
    /// Also protect any single auxiliary sample.
    pub protect_aux: bool,
}

impl SensitivitySpec {
    pub fn new(mechanism: Mechanism, task: Task, lambda: f64, parties: usize) -> Self {
        Self {
            mechanism,
            task,
            lambda,
            parties,
            samples: 0,
            protect_aux: false,
        }
    }
}

/// L2 sensitivity of the released minimizer.
///
/// | mechanism    | binary    | multiclass  |
/// |--------------|-----------|-------------|
/// | vote-erm     | 2/λ       | √2/λ        |
/// | soft-erm     | 2/(Mλ)    | √2/(Mλ)     |
/// | standard-erm | 2/(Nλ)    | 2√2/(Nλ)    |
/// | param-avg    | 2/(Mλ)    | 2√2/(Mλ)    |
///
/// Protecting auxiliary samples multiplies soft-erm by `(N + M − 1)/N` and
/// leaves vote-erm unchanged: a vote-labeled gradient term already moves by
/// at most 2 whether or not its feature vector changes.
pub fn sensitivity(spec: &SensitivitySpec) -> Result<f64> {
    let lambda = spec.lambda;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    let needs_parties = matches!(spec.mechanism, Mechanism::SoftErm | Mechanism::ParamAvg);
    if needs_parties && spec.parties == 0 {
        return Err(Error::invalid("parties", "must be at least 1"));
    }
    let needs_samples = spec.mechanism == Mechanism::StandardErm
        || (spec.protect_aux && spec.mechanism == Mechanism::SoftErm);
    if needs_samples && spec.samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    if spec.protect_aux && spec.mechanism == Mechanism::ParamAvg {
        return Err(Error::Unsupported(
            "auxiliary-data protection for parameter averaging".into(),
        ));
    }

    let m = spec.parties as f64;
    let n = spec.samples as f64;
    let binary = spec.task.is_binary();
    let sqrt2 = std::f64::consts::SQRT_2;
    let base = match (spec.mechanism, binary) {
        (Mechanism::VoteErm, true) => 2.0 / lambda,
        (Mechanism::VoteErm, false) => sqrt2 / lambda,
        (Mechanism::SoftErm, true) => 2.0 / (m * lambda),
        (Mechanism::SoftErm, false) => sqrt2 / (m * lambda),
        (Mechanism::StandardErm, true) => 2.0 / (n * lambda),
        (Mechanism::StandardErm, false) => 2.0 * sqrt2 / (n * lambda),
        (Mechanism::ParamAvg, true) => 2.0 / (m * lambda),
        (Mechanism::ParamAvg, false) => 2.0 * sqrt2 / (m * lambda),
    };
    if spec.protect_aux && spec.mechanism == Mechanism::SoftErm {
        Ok(base * (n + m - 1.0) / n)
    } else {
        Ok(base)
    }
}

/// Noise density `∝ exp(−β‖η‖)` in `dim` dimensions. `β = ∞` means no noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub beta: f64,
    pub dim: usize,
}

impl NoiseSpec {
    /// `β = ε / sensitivity`; an infinite `ε` gives `β = ∞`.
    pub fn calibrated(epsilon: f64, sensitivity: f64, dim: usize) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be positive or infinite"));
        }
        if !(sensitivity > 0.0 && sensitivity.is_finite()) {
            return Err(Error::invalid("sensitivity", "must be positive and finite"));
        }
        Ok(Self {
            beta: epsilon / sensitivity,
            dim,
        })
    }

    pub fn none(dim: usize) -> Self {
        Self {
            beta: f64::INFINITY,
            dim,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.beta == f64::INFINITY
    }

    fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::invalid("beta", "must be positive or infinite"));
        }
        Ok(())
    }
}

/// Draws `η` with density `∝ exp(−β‖η‖)`: the radius is
/// `Gamma(dim, 1/β)` and the direction is uniform on the sphere.
pub fn sample_noise_with(spec: &NoiseSpec, rng: &mut impl Rng) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.is_noiseless() || spec.dim == 0 {
        return Ok(vec![0.0; spec.dim]);
    }
    let radius = Gamma::new(spec.dim as f64, 1.0 / spec.beta)
        .map_err(|e| Error::invalid("beta", e.to_string()))?
        .sample(rng);
    let direction = loop {
        let g: Vec<f64> = (0..spec.dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = crate::dataset::norm(&g);
        if n > 0.0 {
            break g.into_iter().map(|v| v / n).collect::<Vec<f64>>();
        }
    };
    Ok(direction.into_iter().map(|u| radius * u).collect())
}

pub fn sample_noise(spec: &NoiseSpec, seed: u64) -> Result<Vec<f64>> {
    sample_noise_with(spec, &mut seed::rng(seed))
}

/// Returns `w + η` and `‖η‖`.
pub fn perturb(model: &LinearModel, spec: &NoiseSpec, seed: u64) -> Result<(LinearModel, f64)> {
    if spec.dim != model.weights().len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights().len(),
            found: spec.dim,
        });
    }
    let eta = sample_noise(spec, seed)?;
    let noise_norm = crate::dataset::norm(&eta);
    Ok((model.shifted(&eta)?, noise_norm))
}

/// High-probability upper bound `kθ log(k/δ)` on a `Gamma(k, θ)` variable,
/// holding with probability at least `1 − δ`.
pub fn gamma_tail_bound(k: usize, theta: f64, delta: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::invalid("theta", "must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie in (0, 1)"));
    }
    let k = k as f64;
    Ok(k * theta * (k / delta).ln())
}
