//! Regularized empirical risk minimization for linear classifiers.
//!
//! Binary risks use a margin loss `l(y wᵀx)`; the weighted variant replaces
//! the hard label by the fraction `α` of positive votes,
//! `α l(wᵀx) + (1 − α) l(−wᵀx)`. Multiclass risks use the softmax
//! cross-entropy with `K` full weight blocks, weighted by per-class vote
//! fractions. All risks add `(λ/2)‖w‖²`.

mod loss;
mod model;
mod solver;

pub use loss::LossSpec;
pub use model::LinearModel;
pub use solver::{SolveReport, SolverOptions};

pub(crate) use model::dot;

use nalgebra::DMatrix;

use crate::dataset::{Dataset, Task};
use crate::ensemble::SoftLabeledSet;
use crate::{Error, Result};

/// Training data for a risk: hard labels or soft vote fractions.
#[derive(Debug, Clone, Copy)]
pub enum TrainingSet<'a> {
    Hard(&'a Dataset),
    Soft(&'a SoftLabeledSet),
}

impl<'a> From<&'a Dataset> for TrainingSet<'a> {
    fn from(d: &'a Dataset) -> Self {
        TrainingSet::Hard(d)
    }
}

impl<'a> From<&'a SoftLabeledSet> for TrainingSet<'a> {
    fn from(s: &'a SoftLabeledSet) -> Self {
        TrainingSet::Soft(s)
    }
}

/// A regularized risk over a fixed training set.
///
/// Targets are class probabilities: binary sets store `P(+1)` per sample and
/// multiclass sets store `K` probabilities per sample, row-major. Hard labels
/// become 0/1 targets, so the weighted loss with unanimous votes is
/// bit-identical to the unweighted one.
pub(crate) struct Objective<'a> {
    xs: Vec<&'a [f64]>,
    targets: Vec<f64>,
    task: Task,
    dim: usize,
    lambda: f64,
    loss: LossSpec,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(set: TrainingSet<'a>, lambda: f64, loss: LossSpec) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", "must be finite and nonnegative"));
        }
        let (xs, targets, task, dim): (Vec<&[f64]>, Vec<f64>, Task, usize) = match set {
            TrainingSet::Hard(d) => {
                if !d.is_labeled() && !d.is_empty() {
                    return Err(Error::invalid("dataset", "ERM needs labeled samples"));
                }
                let task = d.task();
                let targets = match task {
                    Task::Binary => d.labels().map(|y| if y == 1 { 1.0 } else { 0.0 }).collect(),
                    Task::Multiclass(k) => d
                        .labels()
                        .flat_map(|y| {
                            let c = task.class_index(y);
                            (0..k).map(move |j| if j == c { 1.0 } else { 0.0 })
                        })
                        .collect(),
                };
                (d.features().collect(), targets, task, d.dim())
            }
            TrainingSet::Soft(s) => {
                let task = s.task();
                let targets = match task {
                    Task::Binary => (0..s.len()).map(|i| s.alpha(i)).collect(),
                    Task::Multiclass(_) => s.fractions().iter().flatten().copied().collect(),
                };
                (
                    s.features().iter().map(Vec::as_slice).collect(),
                    targets,
                    task,
                    s.dim(),
                )
            }
        };
        if !task.is_binary() && loss != LossSpec::Logistic {
            return Err(Error::Unsupported(format!(
                "{} loss for multiclass models",
                loss.name()
            )));
        }
        Ok(Self {
            xs,
            targets,
            task,
            dim,
            lambda,
            loss,
        })
    }

    pub(crate) fn weight_len(&self) -> usize {
        model::weight_len(self.dim, self.task)
    }

    fn check(&self, w: &LinearModel) -> Result<()> {
        if w.dim() != self.dim || w.task() != self.task {
            return Err(Error::DimensionMismatch {
                expected: self.weight_len(),
                found: w.weights().len(),
            });
        }
        Ok(())
    }

    fn n(&self) -> f64 {
        self.xs.len() as f64
    }

    fn regularizer(&self, w: &[f64]) -> f64 {
        0.5 * self.lambda * dot(w, w)
    }

    pub(crate) fn value(&self, w: &[f64]) -> f64 {
        let data: f64 = match self.task {
            Task::Binary => self
                .xs
                .iter()
                .zip(&self.targets)
                .map(|(x, &a)| {
                    let z = dot(w, x);
                    a * self.loss.value_and_deriv(z).0 + (1.0 - a) * self.loss.value_and_deriv(-z).0
                })
                .sum(),
            Task::Multiclass(k) => self
                .xs
                .iter()
                .zip(self.targets.chunks(k))
                .map(|(x, alpha)| {
                    let scores = block_scores(w, x, self.dim, k);
                    let lse = log_sum_exp(&scores);
                    lse - alpha.iter().zip(&scores).map(|(a, s)| a * s).sum::<f64>()
                })
                .sum(),
        };
        if self.xs.is_empty() {
            return self.regularizer(w);
        }
        data / self.n() + self.regularizer(w)
    }

    pub(crate) fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; w.len()];
        match self.task {
            Task::Binary => {
                for (x, &a) in self.xs.iter().zip(&self.targets) {
                    let c = self.margin_slope(dot(w, x), a);
                    g.iter_mut()
                        .zip(x.iter())
                        .for_each(|(gi, xi)| *gi += c * xi);
                }
            }
            Task::Multiclass(k) => {
                for (x, alpha) in self.xs.iter().zip(self.targets.chunks(k)) {
                    let p = softmax(&block_scores(w, x, self.dim, k));
                    for c in 0..k {
                        let r = p[c] - alpha[c];
                        let block = &mut g[c * self.dim..(c + 1) * self.dim];
                        block
                            .iter_mut()
                            .zip(x.iter())
                            .for_each(|(gi, xi)| *gi += r * xi);
                    }
                }
            }
        }
        let n = self.n().max(1.0);
        g.iter_mut()
            .zip(w)
            .for_each(|(gi, wi)| *gi = *gi / n + self.lambda * wi);
        g
    }

    /// d/dz of `a l(z) + (1 − a) l(−z)`.
    fn margin_slope(&self, z: f64, a: f64) -> f64 {
        a * self.loss.value_and_deriv(z).1 - (1.0 - a) * self.loss.value_and_deriv(-z).1
    }

    pub(crate) fn hessian(&self, w: &[f64]) -> DMatrix<f64> {
        let p = w.len();
        let mut h = DMatrix::<f64>::zeros(p, p);
        match self.task {
            Task::Binary => {
                for (x, &a) in self.xs.iter().zip(&self.targets) {
                    let z = dot(w, x);
                    let c = a * self.loss.second_deriv(z) + (1.0 - a) * self.loss.second_deriv(-z);
                    if c == 0.0 {
                        continue;
                    }
                    for i in 0..p {
                        let cxi = c * x[i];
                        for j in 0..=i {
                            h[(i, j)] += cxi * x[j];
                        }
                    }
                }
            }
            Task::Multiclass(k) => {
                let d = self.dim;
                for x in &self.xs {
                    let prob = softmax(&block_scores(w, x, d, k));
                    for a in 0..k {
                        for b in 0..=a {
                            let c = if a == b {
                                prob[a] * (1.0 - prob[a])
                            } else {
                                -prob[a] * prob[b]
                            };
                            for i in 0..d {
                                let cxi = c * x[i];
                                for j in 0..d {
                                    let (r, col) = (a * d + i, b * d + j);
                                    if col <= r {
                                        h[(r, col)] += cxi * x[j];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        let n = self.n().max(1.0);
        for i in 0..p {
            for j in 0..=i {
                let v = h[(i, j)] / n;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
            h[(i, i)] += self.lambda;
        }
        h
    }
}

fn block_scores(w: &[f64], x: &[f64], dim: usize, k: usize) -> Vec<f64> {
    (0..k).map(|c| dot(&w[c * dim..(c + 1) * dim], x)).collect()
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + v.iter().map(|s| (s - top).exp()).sum::<f64>().ln()
}

pub(crate) fn softmax(v: &[f64]) -> Vec<f64> {
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

/// Regularized (or, with `lambda = 0`, plain) empirical risk of `model`.
pub fn risk<'a>(
    model: &LinearModel,
    set: impl Into<TrainingSet<'a>>,
    lambda: f64,
    loss: &LossSpec,
) -> Result<f64> {
    let obj = Objective::new(set.into(), lambda, *loss)?;
    obj.check(model)?;
    Ok(obj.value(model.weights()))
}

/// Analytic gradient of [`risk`] with respect to the stacked weights.
pub fn gradient<'a>(
    model: &LinearModel,
    set: impl Into<TrainingSet<'a>>,
    lambda: f64,
    loss: &LossSpec,
) -> Result<Vec<f64>> {
    let obj = Objective::new(set.into(), lambda, *loss)?;
    obj.check(model)?;
    Ok(obj.gradient(model.weights()))
}

/// Per-class residuals `Δ_k = I[y = k] − P_k(x)` of a multiclass model.
pub fn residuals(model: &LinearModel, x: &[f64], y: i32) -> Result<Vec<f64>> {
    let Task::Multiclass(k) = model.task() else {
        return Err(Error::Unsupported("residuals of a binary model".into()));
    };
    model.check_dim(x)?;
    if !model.task().is_valid_label(y) {
        return Err(Error::invalid("y", format!("label {y} outside 1..={k}")));
    }
    let p = softmax(&block_scores(model.weights(), x, model.dim(), k));
    let c = model.task().class_index(y);
    Ok(p.iter()
        .enumerate()
        .map(|(j, pj)| if j == c { 1.0 - pj } else { -pj })
        .collect())
}

fn check_training_input(set: TrainingSet<'_>, lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    let mut norms: Box<dyn Iterator<Item = f64>> = match set {
        TrainingSet::Hard(d) => {
            if d.is_empty() {
                return Err(Error::EmptyDataset);
            }
            Box::new(d.features().map(crate::dataset::norm))
        }
        TrainingSet::Soft(s) => {
            if s.is_empty() {
                return Err(Error::EmptyDataset);
            }
            Box::new(s.features().iter().map(|x| crate::dataset::norm(x)))
        }
    };
    if norms.any(|n| n > 1.0 + 1e-9) {
        return Err(Error::invalid(
            "features",
            "every sample must have norm at most 1",
        ));
    }
    Ok(())
}

fn minimize_set(
    set: TrainingSet<'_>,
    lambda: f64,
    loss: &LossSpec,
    options: &SolverOptions,
) -> Result<(LinearModel, SolveReport)> {
    check_training_input(set, lambda)?;
    let obj = Objective::new(set, lambda, *loss)?;
    let (w, report) = solver::minimize(&obj, options)?;
    Ok((LinearModel::new(w, obj.dim, obj.task)?, report))
}

/// Minimizes the regularized empirical risk over hard-labeled data.
pub fn erm_minimize(
    data: &Dataset,
    lambda: f64,
    loss: &LossSpec,
) -> Result<(LinearModel, SolveReport)> {
    erm_minimize_with(data, lambda, loss, &SolverOptions::default())
}

pub fn erm_minimize_with(
    data: &Dataset,
    lambda: f64,
    loss: &LossSpec,
    options: &SolverOptions,
) -> Result<(LinearModel, SolveReport)> {
    if !data.is_labeled() {
        return Err(Error::invalid("dataset", "ERM needs labeled samples"));
    }
    minimize_set(TrainingSet::Hard(data), lambda, loss, options)
}

/// Minimizes the regularized risk weighted by vote fractions.
pub fn weighted_erm_minimize(
    data: &SoftLabeledSet,
    lambda: f64,
    loss: &LossSpec,
) -> Result<(LinearModel, SolveReport)> {
    weighted_erm_minimize_with(data, lambda, loss, &SolverOptions::default())
}

pub fn weighted_erm_minimize_with(
    data: &SoftLabeledSet,
    lambda: f64,
    loss: &LossSpec,
    options: &SolverOptions,
) -> Result<(LinearModel, SolveReport)> {
    minimize_set(TrainingSet::Soft(data), lambda, loss, options)
}

pub fn predict(model: &LinearModel, x: &[f64]) -> Result<i32> {
    model.predict(x)
}

/// Fraction of labeled samples that `model` classifies correctly.
pub fn accuracy(model: &LinearModel, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: data.dim(),
        });
    }
    let correct = data
        .samples()
        .iter()
        .filter(|s| s.y == Some(model.predict_unchecked(&s.x)))
        .count();
    Ok(correct as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn ds(xs: Vec<Vec<f64>>, ys: Vec<i32>, task: Task) -> Dataset {
        Dataset::labeled(xs, ys, task).unwrap()
    }

    fn random_ball(rng: &mut impl Rng, d: usize) -> Vec<f64> {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = crate::dataset::norm(&x);
        let r: f64 = rng.random();
        x.iter().map(|v| v / n.max(1e-12) * r).collect()
    }

    fn random_dataset(rng: &mut impl Rng, n: usize, d: usize, task: Task) -> Dataset {
        let xs = (0..n).map(|_| random_ball(rng, d)).collect();
        let ys = (0..n)
            .map(|_| task.label_of(rng.random_range(0..task.classes())))
            .collect();
        ds(xs, ys, task)
    }

    #[test]
    fn symmetric_labels_cancel() {
        let d = ds(vec![vec![0.5], vec![0.5]], vec![1, -1], Task::Binary);
        let (w, report) = erm_minimize(&d, 0.1, &LossSpec::Logistic).unwrap();
        assert!(w.weights()[0].abs() < 1e-12);
        assert!(report.gradient_norm <= 1e-9);
    }

    #[test]
    fn single_point_matches_bisection() {
        // Stationarity of log(1 + e^{-w}) + w²/2 is w(1 + e^w) = 1.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * (1.0 + mid.exp()) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 0.4012).abs() < 2e-4);
        let d = ds(vec![vec![1.0]], vec![1], Task::Binary);
        let (w, _) = erm_minimize(&d, 1.0, &LossSpec::Logistic).unwrap();
        assert!((w.weights()[0] - root).abs() < 1e-9);
    }

    #[test]
    fn zero_model_risk_is_log_two() {
        let mut rng = seed::rng(4);
        let d = random_dataset(&mut rng, 17, 3, Task::Binary);
        let w = LinearModel::zeros(3, Task::Binary);
        for lambda in [0.0, 0.5] {
            let r = risk(&w, &d, lambda, &LossSpec::Logistic).unwrap();
            assert!((r - 2f64.ln()).abs() < 1e-15);
        }
    }

    fn naive_binary_risk(w: &[f64], d: &Dataset, lambda: f64) -> f64 {
        let mut total = 0.0;
        for s in d.samples() {
            let y = s.y.unwrap() as f64;
            let z: f64 = w.iter().zip(&s.x).map(|(a, b)| a * b).sum();
            total += (1.0 + (-y * z).exp()).ln();
        }
        total / d.len() as f64 + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn naive_multiclass_risk(w: &[f64], d: &Dataset, k: usize, lambda: f64) -> f64 {
        let dim = d.dim();
        let mut total = 0.0;
        for s in d.samples() {
            let scores: Vec<f64> = (0..k)
                .map(|c| (0..dim).map(|j| w[c * dim + j] * s.x[j]).sum())
                .collect();
            let y = (s.y.unwrap() - 1) as usize;
            let denom: f64 = scores.iter().map(|v| v.exp()).sum();
            total += -(scores[y].exp() / denom).ln();
        }
        total / d.len() as f64 + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn risk_matches_naive_resummation() {
        let mut rng = seed::rng(8);
        for trial in 0..20 {
            let task = if trial % 2 == 0 {
                Task::Binary
            } else {
                Task::Multiclass(3)
            };
            let d = random_dataset(&mut rng, 25, 4, task);
            let len = model::weight_len(4, task);
            let w: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0)).collect();
            let m = LinearModel::new(w.clone(), 4, task).unwrap();
            let ours = risk(&m, &d, 0.01, &LossSpec::Logistic).unwrap();
            let naive = match task {
                Task::Binary => naive_binary_risk(&w, &d, 0.01),
                Task::Multiclass(k) => naive_multiclass_risk(&w, &d, k, 0.01),
            };
            assert!((ours - naive).abs() < 1e-12, "{ours} vs {naive}");
        }
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        let mut rng = seed::rng(12);
        for task in [Task::Binary, Task::Multiclass(4)] {
            let d = random_dataset(&mut rng, 40, 5, task);
            let (w, report) = erm_minimize(&d, 1e-3, &LossSpec::Logistic).unwrap();
            let g = gradient(&w, &d, 1e-3, &LossSpec::Logistic).unwrap();
            assert!(crate::dataset::norm(&g) <= 1e-9);
            assert!(report.gradient_norm <= 1e-9);
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let mut rng = seed::rng(2);
        for task in [Task::Binary, Task::Multiclass(3)] {
            let d = random_dataset(&mut rng, 15, 3, task);
            let obj = Objective::new(TrainingSet::Hard(&d), 0.05, LossSpec::Logistic).unwrap();
            let w: Vec<f64> = (0..obj.weight_len())
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let h = obj.hessian(&w);
            let e = 1e-6;
            for j in 0..w.len() {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += e;
                wm[j] -= e;
                let (gp, gm) = (obj.gradient(&wp), obj.gradient(&wm));
                for i in 0..w.len() {
                    let fd = (gp[i] - gm[i]) / (2.0 * e);
                    assert!((fd - h[(i, j)]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn residuals_sum_to_zero() {
        let mut rng = seed::rng(3);
        for _ in 0..100 {
            let w: Vec<f64> = (0..12).map(|_| rng.random_range(-5.0..5.0)).collect();
            let m = LinearModel::new(w, 3, Task::Multiclass(4)).unwrap();
            let x = random_ball(&mut rng, 3);
            let r = residuals(&m, &x, rng.random_range(1..=4)).unwrap();
            assert!(r.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn multiclass_hinge_is_unsupported() {
        let d = ds(vec![vec![0.1]], vec![2], Task::Multiclass(3));
        let loss = LossSpec::smoothed_hinge(0.5).unwrap();
        assert!(matches!(
            erm_minimize(&d, 0.1, &loss),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn rejects_unbounded_features_and_bad_lambda() {
        let d = ds(vec![vec![2.0]], vec![1], Task::Binary);
        assert!(erm_minimize(&d, 0.1, &LossSpec::Logistic).is_err());
        let d = ds(vec![vec![0.5]], vec![1], Task::Binary);
        assert!(erm_minimize(&d, 0.0, &LossSpec::Logistic).is_err());
    }

    #[test]
    fn smoothed_hinge_solves() {
        let mut rng = seed::rng(21);
        let d = random_dataset(&mut rng, 60, 4, Task::Binary);
        let loss = LossSpec::smoothed_hinge(0.5).unwrap();
        let (w, report) = erm_minimize(&d, 0.01, &loss).unwrap();
        assert!(report.gradient_norm <= 1e-9);
        let g = gradient(&w, &d, 0.01, &loss).unwrap();
        assert!(crate::dataset::norm(&g) <= 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn strong_convexity(seed in any::<u64>(), multiclass in any::<bool>()) {
            let mut rng = seed::rng(seed);
            let task = if multiclass { Task::Multiclass(3) } else { Task::Binary };
            let lambda = 0.1;
            let d = random_dataset(&mut rng, 12, 3, task);
            let len = model::weight_len(3, task);
            let w: Vec<f64> = (0..len).map(|_| rng.random_range(-4.0..4.0)).collect();
            let u: Vec<f64> = (0..len).map(|_| rng.random_range(-4.0..4.0)).collect();
            let wm = LinearModel::new(w.clone(), 3, task).unwrap();
            let um = LinearModel::new(u.clone(), 3, task).unwrap();
            let rw = risk(&wm, &d, lambda, &LossSpec::Logistic).unwrap();
            let ru = risk(&um, &d, lambda, &LossSpec::Logistic).unwrap();
            let g = gradient(&wm, &d, lambda, &LossSpec::Logistic).unwrap();
            let diff: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - b).collect();
            let lower = rw + dot(&g, &diff) + 0.5 * lambda * dot(&diff, &diff);
            prop_assert!(ru >= lower - 1e-12);
        }
    }
}
