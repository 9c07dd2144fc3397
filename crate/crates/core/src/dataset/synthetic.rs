use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Sample, Task};
use crate::{seed, Error, Result};

/// Gaussian class-conditional generator with a closed-form posterior.
///
/// Class `k` draws `x = mean_k + noise_scale * diag(s) z`, with
/// `s_j = spectrum_decay^j` and `z` standard normal, so `spectrum_decay < 1`
/// gives a decaying, PCA-like variance profile. Class priors are uniform.
/// With probability `label_noise` the observed label is replaced by a
/// uniformly chosen *other* class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub task: Task,
    /// One mean vector per class, in class-index order.
    pub means: Vec<Vec<f64>>,
    pub noise_scale: f64,
    #[serde(default = "one")]
    pub spectrum_decay: f64,
    #[serde(default)]
    pub label_noise: f64,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl SyntheticSpec {
    /// Class means placed at `±separation` along the first axis (binary) or
    /// at `separation` times the first `K` axes (multiclass).
    pub fn separated(dim: usize, task: Task, separation: f64, seed: u64) -> Self {
        let k = task.classes();
        let means = (0..k)
            .map(|c| {
                let mut m = vec![0.0; dim];
                match task {
                    Task::Binary => m[0] = if c == 1 { separation } else { -separation },
                    Task::Multiclass(_) => m[c % dim] += separation,
                }
                m
            })
            .collect();
        Self {
            task,
            means,
            noise_scale: 1.0,
            spectrum_decay: 1.0,
            label_noise: 0.0,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::invalid("means", "need nonempty mean vectors"));
        }
        if self.means.len() != self.task.classes() {
            return Err(Error::invalid("means", "need one mean per class"));
        }
        if self.means.iter().any(|m| m.len() != d) {
            return Err(Error::invalid("means", "mean vectors differ in length"));
        }
        if !(self.noise_scale > 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::invalid("noise_scale", "must be positive"));
        }
        if !(self.spectrum_decay > 0.0 && self.spectrum_decay.is_finite()) {
            return Err(Error::invalid("spectrum_decay", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(Error::invalid("label_noise", "must lie in [0, 1]"));
        }
        Ok(())
    }

    fn std_devs(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.noise_scale * self.spectrum_decay.powi(j as i32))
            .collect()
    }
}

/// Draws `n` i.i.d. labeled samples. Deterministic in `spec.seed`.
pub fn synthesize(spec: &SyntheticSpec, n: usize) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let k = spec.task.classes();
    let sd = spec.std_devs();
    let mut rng = seed::rng(spec.seed);
    let mut samples = Vec::with_capacity(n);
    for id in 0..n {
        let class = rng.random_range(0..k);
        let x: Vec<f64> = spec.means[class]
            .iter()
            .zip(&sd)
            .map(|(m, s)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                m + s * z
            })
            .collect();
        let mut observed = class;
        if spec.label_noise > 0.0 && rng.random::<f64>() < spec.label_noise {
            let shift = rng.random_range(1..k);
            observed = (class + shift) % k;
        }
        samples.push(Sample {
            x,
            y: Some(spec.task.label_of(observed)),
            id,
        });
    }
    Dataset::new(samples, spec.dim(), spec.task)
}

/// True posterior `P(y = k | x)` of the observed label, in class-index order
/// (binary: `[P(-1|x), P(+1|x)]`). `x` is in raw generator coordinates.
pub fn posterior(spec: &SyntheticSpec, x: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    if x.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: x.len(),
        });
    }
    let sd = spec.std_devs();
    let log_lik: Vec<f64> = spec
        .means
        .iter()
        .map(|m| {
            -0.5 * x
                .iter()
                .zip(m)
                .zip(&sd)
                .map(|((xi, mi), s)| ((xi - mi) / s).powi(2))
                .sum::<f64>()
        })
        .collect();
    let top = log_lik.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_lik.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let k = weights.len() as f64;
    let rho = spec.label_noise;
    Ok(weights
        .iter()
        .map(|w| {
            let p = w / total;
            (1.0 - rho) * p + rho * (1.0 - p) / (k - 1.0)
        })
        .collect())
}
