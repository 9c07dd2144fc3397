//! End-to-end methods: private releases through the ensemble, parameter
//! averaging, and the non-private batch and individual baselines.
//!
//! Every private method is split into a deterministic [`Fit`] (the
//! unperturbed minimizer `w_s` and its sensitivity) and a noisy
//! [`Fit::release`], so that repeated trials only redraw the noise.

use std::fmt;
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::ensemble::{self, Ensemble, SoftLabeledSet};
use crate::linear::{self, LinearModel, LossSpec, TrainingSet};
use crate::privacy::{self, Mechanism, NoiseSpec, SensitivitySpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// One ERM over all private data, no noise.
    Batch,
    /// Mean accuracy of the local classifiers.
    Indiv,
    /// Majority-voted auxiliary labels, perturbed.
    Vote,
    /// Vote-fraction weighted auxiliary loss, perturbed.
    Soft,
    /// Perturbed mean of the local linear models.
    Avg,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Batch,
        Method::Indiv,
        Method::Vote,
        Method::Soft,
        Method::Avg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Batch => "batch",
            Method::Indiv => "indiv",
            Method::Vote => "vote",
            Method::Soft => "soft",
            Method::Avg => "avg",
        }
    }

    pub fn is_private(self) -> bool {
        matches!(self, Method::Vote | Method::Soft | Method::Avg)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    /// Privacy budget; `f64::INFINITY` disables noise.
    pub epsilon: f64,
    pub lambda: f64,
    pub loss: LossSpec,
    pub protect_aux: bool,
    /// Seed of the noise draw.
    pub seed: u64,
}

impl MethodSpec {
    pub fn new(method: Method, epsilon: f64, lambda: f64) -> Self {
        Self {
            method,
            epsilon,
            lambda,
            loss: LossSpec::default(),
            protect_aux: false,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be positive or infinite"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Inverse noise scale; infinite when no noise was added.
    pub beta: f64,
    /// `None` for the non-private baselines.
    pub sensitivity: Option<f64>,
    pub noise_norm: f64,
    pub solver_iters: usize,
    /// Regularized training risk of `w_s`.
    pub risk_before: f64,
    /// Regularized training risk of `w_p`.
    pub risk_after: f64,
}

#[derive(Debug, Clone)]
pub struct Release {
    pub model: LinearModel,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
enum Objective {
    Hard(Dataset),
    Soft(SoftLabeledSet),
}

impl Objective {
    fn set(&self) -> TrainingSet<'_> {
        match self {
            Objective::Hard(d) => TrainingSet::Hard(d),
            Objective::Soft(s) => TrainingSet::Soft(s),
        }
    }
}

/// An unperturbed minimizer, ready to be released at any privacy level.
#[derive(Debug, Clone)]
pub struct Fit {
    method: Method,
    model: LinearModel,
    sensitivity: Option<f64>,
    solver_iters: usize,
    lambda: f64,
    loss: LossSpec,
    objective: Objective,
    risk: f64,
}

impl Fit {
    fn new(
        method: Method,
        model: LinearModel,
        sensitivity: Option<f64>,
        solver_iters: usize,
        spec: &MethodSpec,
        objective: Objective,
    ) -> Result<Self> {
        let risk = linear::risk(&model, objective.set(), spec.lambda, &spec.loss)?;
        Ok(Self {
            method,
            model,
            sensitivity,
            solver_iters,
            lambda: spec.lambda,
            loss: spec.loss,
            objective,
            risk,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// The unperturbed minimizer `w_s`.
    pub fn model(&self) -> &LinearModel {
        &self.model
    }

    pub fn sensitivity(&self) -> Option<f64> {
        self.sensitivity
    }

    pub fn solver_iters(&self) -> usize {
        self.solver_iters
    }

    pub(crate) fn with_solver_iters(mut self, iters: usize) -> Self {
        self.solver_iters = iters;
        self
    }

    /// `β` for budget `epsilon`; infinite for non-private fits.
    pub fn beta(&self, epsilon: f64) -> Result<f64> {
        match self.sensitivity {
            Some(s) => Ok(NoiseSpec::calibrated(epsilon, s, 0)?.beta),
            None => Ok(f64::INFINITY),
        }
    }

    /// Adds calibrated noise to `w_s`. Non-private fits come back unchanged.
    pub fn release(&self, epsilon: f64, seed: u64) -> Result<Release> {
        let noise = NoiseSpec {
            beta: self.beta(epsilon)?,
            dim: self.model.weights().len(),
        };
        let (model, noise_norm) = privacy::perturb(&self.model, &noise, seed)?;
        let risk_after = if noise.is_noiseless() {
            self.risk
        } else {
            linear::risk(&model, self.objective.set(), self.lambda, &self.loss)?
        };
        Ok(Release {
            model,
            diagnostics: Diagnostics {
                beta: noise.beta,
                sensitivity: self.sensitivity,
                noise_norm,
                solver_iters: self.solver_iters,
                risk_before: self.risk,
                risk_after,
            },
        })
    }
}

fn sensitivity_for(
    mechanism: Mechanism,
    task: Task,
    parties: usize,
    samples: usize,
    spec: &MethodSpec,
) -> Result<f64> {
    privacy::sensitivity(&SensitivitySpec {
        mechanism,
        task,
        lambda: spec.lambda,
        parties,
        samples,
        protect_aux: spec.protect_aux,
    })
}

pub fn fit_vote(ensemble: &Ensemble, aux: &Dataset, spec: &MethodSpec) -> Result<Fit> {
    spec.validate()?;
    let labeled = ensemble::transfer_votes(ensemble, aux)?;
    let (model, report) = linear::erm_minimize(&labeled, spec.lambda, &spec.loss)?;
    let s = sensitivity_for(
        Mechanism::VoteErm,
        ensemble.task(),
        ensemble.len(),
        aux.len(),
        spec,
    )?;
    Fit::new(
        Method::Vote,
        model,
        Some(s),
        report.iterations,
        spec,
        Objective::Hard(labeled),
    )
}

pub fn fit_soft(ensemble: &Ensemble, aux: &Dataset, spec: &MethodSpec) -> Result<Fit> {
    spec.validate()?;
    let soft = ensemble::transfer_soft(ensemble, aux)?;
    let (model, report) = linear::weighted_erm_minimize(&soft, spec.lambda, &spec.loss)?;
    let s = sensitivity_for(
        Mechanism::SoftErm,
        ensemble.task(),
        ensemble.len(),
        aux.len(),
        spec,
    )?;
    Fit::new(
        Method::Soft,
        model,
        Some(s),
        report.iterations,
        spec,
        Objective::Soft(soft),
    )
}

/// Averages already trained local models. `shards` supplies the training
/// risk reported in diagnostics and must match `locals` one to one.
pub fn fit_avg_models(
    shards: &[Dataset],
    locals: &[LinearModel],
    spec: &MethodSpec,
) -> Result<Fit> {
    spec.validate()?;
    if spec.protect_aux {
        return Err(Error::Unsupported(
            "auxiliary-data protection for parameter averaging".into(),
        ));
    }
    let first = locals
        .first()
        .ok_or_else(|| Error::invalid("locals", "need at least one local model"))?;
    if shards.len() != locals.len() {
        return Err(Error::invalid(
            "locals",
            format!("{} models for {} shards", locals.len(), shards.len()),
        ));
    }
    let len = first.weights().len();
    let mut mean = vec![0.0; len];
    for m in locals {
        if m.task() != first.task() || m.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: m.weights().len(),
            });
        }
        for (acc, w) in mean.iter_mut().zip(m.weights()) {
            *acc += w;
        }
    }
    let scale = 1.0 / locals.len() as f64;
    mean.iter_mut().for_each(|v| *v *= scale);
    let model = LinearModel::new(mean, first.dim(), first.task())?;
    let s = sensitivity_for(Mechanism::ParamAvg, first.task(), locals.len(), 0, spec)?;
    let union = Dataset::concat(shards)?;
    Fit::new(Method::Avg, model, Some(s), 0, spec, Objective::Hard(union))
}

/// Fits one linear model per shard, in shard order, with iteration counts.
pub fn fit_locals(
    shards: &[Dataset],
    lambda: f64,
    loss: &LossSpec,
) -> Result<Vec<(LinearModel, usize)>> {
    let fit =
        |shard: &Dataset| linear::erm_minimize(shard, lambda, loss).map(|(m, r)| (m, r.iterations));
    #[cfg(feature = "parallel")]
    let out = shards.par_iter().map(fit).collect();
    #[cfg(not(feature = "parallel"))]
    let out = shards.iter().map(fit).collect();
    out
}

pub fn fit_avg(shards: &[Dataset], spec: &MethodSpec) -> Result<Fit> {
    spec.validate()?;
    let fitted = fit_locals(shards, spec.lambda, &spec.loss)?;
    let iters = fitted.iter().map(|(_, i)| i).sum();
    let locals: Vec<LinearModel> = fitted.into_iter().map(|(m, _)| m).collect();
    Ok(fit_avg_models(shards, &locals, spec)?.with_solver_iters(iters))
}

pub fn fit_batch(all_private: &Dataset, spec: &MethodSpec) -> Result<Fit> {
    if !(spec.lambda > 0.0 && spec.lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    let (model, report) = linear::erm_minimize(all_private, spec.lambda, &spec.loss)?;
    Fit::new(
        Method::Batch,
        model,
        None,
        report.iterations,
        spec,
        Objective::Hard(all_private.clone()),
    )
}

/// Majority-vote pipeline: transfer, ERM, perturb.
pub fn run_vote(ensemble: &Ensemble, aux: &Dataset, spec: &MethodSpec) -> Result<Release> {
    fit_vote(ensemble, aux, spec)?.release(spec.epsilon, spec.seed)
}

/// Vote-fraction pipeline: soft transfer, weighted ERM, perturb.
pub fn run_soft(ensemble: &Ensemble, aux: &Dataset, spec: &MethodSpec) -> Result<Release> {
    fit_soft(ensemble, aux, spec)?.release(spec.epsilon, spec.seed)
}

/// Parameter averaging over freshly trained linear locals.
pub fn run_avg(shards: &[Dataset], spec: &MethodSpec) -> Result<Release> {
    fit_avg(shards, spec)?.release(spec.epsilon, spec.seed)
}

/// Parameter averaging over an ensemble; every handle must be linear.
pub fn run_avg_ensemble(
    ensemble: &Ensemble,
    shards: &[Dataset],
    spec: &MethodSpec,
) -> Result<Release> {
    let locals: Vec<LinearModel> = ensemble.linear_models()?.into_iter().cloned().collect();
    fit_avg_models(shards, &locals, spec)?.release(spec.epsilon, spec.seed)
}

/// Non-private ERM over all private data.
pub fn run_batch(all_private: &Dataset, spec: &MethodSpec) -> Result<LinearModel> {
    Ok(fit_batch(all_private, spec)?.model)
}

/// Mean test accuracy of independently trained local classifiers.
pub fn run_indiv(shards: &[Dataset], test: &Dataset, spec: &MethodSpec) -> Result<f64> {
    let ensemble = ensemble::train_locals(shards, spec.lambda, &spec.loss)?;
    indiv_accuracy(&ensemble, test)
}

/// Mean over parties of each local classifier's test accuracy.
pub fn indiv_accuracy(ensemble: &Ensemble, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if test.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.dim(),
            found: test.dim(),
        });
    }
    let n = test.len() as f64;
    let total: f64 = ensemble
        .handles()
        .iter()
        .map(|h| {
            test.samples()
                .iter()
                .filter(|s| s.y == Some(h.predict(&s.x)))
                .count() as f64
                / n
        })
        .sum();
    Ok(total / ensemble.len() as f64)
}

/// Test accuracy; the single evaluation path shared by every method.
pub fn evaluate(model: &LinearModel, test: &Dataset) -> Result<f64> {
    linear::accuracy(model, test)
}

/// Inputs of the excess-risk bound for the vote-fraction release.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub dim: usize,
    /// Lipschitz constant `c` of the loss derivative.
    pub c: f64,
    pub lambda: f64,
    pub parties: usize,
    pub epsilon: f64,
    /// Auxiliary sample count.
    pub samples: usize,
    pub delta_p: f64,
    pub delta_s: f64,
    /// Norm of the reference hypothesis `w_0`.
    pub reference_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerms {
    pub noise: f64,
    pub sample: f64,
    pub regularization: f64,
}

impl BoundTerms {
    pub fn total(&self) -> f64 {
        self.noise + self.sample + self.regularization
    }
}

/// Three additive terms bounding the expected-loss gap between the released
/// model and a reference `w_0`, holding with probability `1 − δ_p − δ_s`:
///
/// * noise: `4d²(c+λ) log²(d/δ_p) / (λ²M²ε²)`
/// * sample: `16(32 + log(1/δ_s)) / (λN)`
/// * regularization: `λ/2 ‖w_0‖²`
pub fn excess_risk_bound(p: &BoundParams) -> Result<BoundTerms> {
    for (name, delta) in [("delta_p", p.delta_p), ("delta_s", p.delta_s)] {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(name, "must lie in (0, 1)"));
        }
    }
    if p.dim == 0 || p.parties == 0 || p.samples == 0 {
        return Err(Error::invalid(
            "dim",
            "dim, parties and samples must be positive",
        ));
    }
    if !(p.lambda > 0.0 && p.lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    if !(p.c > 0.0 && p.c.is_finite()) {
        return Err(Error::invalid("c", "must be positive"));
    }
    if !(p.epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive or infinite"));
    }
    if !(p.reference_norm >= 0.0 && p.reference_norm.is_finite()) {
        return Err(Error::invalid("reference_norm", "must be non-negative"));
    }
    let d = p.dim as f64;
    let m = p.parties as f64;
    let log = (d / p.delta_p).ln();
    let noise = if p.epsilon.is_infinite() {
        0.0
    } else {
        4.0 * d * d * (p.c + p.lambda) * log * log / (p.lambda.powi(2) * m * m * p.epsilon.powi(2))
    };
    Ok(BoundTerms {
        noise,
        sample: 16.0 * (32.0 + (1.0 / p.delta_s).ln()) / (p.lambda * p.samples as f64),
        regularization: 0.5 * p.lambda * p.reference_norm.powi(2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{normalize, synthesize, SyntheticSpec};
    use crate::dataset::{partition, PartitionPlan};

    fn setup(m: usize, task: Task) -> (Ensemble, Vec<Dataset>, Dataset) {
        let spec = SyntheticSpec::separated(3, task, 2.0, 5);
        let (data, _) = normalize(&synthesize(&spec, 40 * m + 60).unwrap()).unwrap();
        let part = partition(
            &data,
            &PartitionPlan {
                parties: m,
                aux_fraction: 0.2,
                seed: 1,
            },
        )
        .unwrap();
        let ens = ensemble::train_locals(&part.shards, 0.1, &LossSpec::Logistic).unwrap();
        (ens, part.shards, part.aux)
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn vote_beta_matches_formula() {
        let (ens, _, aux) = setup(4, Task::Binary);
        let spec = MethodSpec::new(Method::Vote, 1.0, 1e-4);
        let r = run_vote(&ens, &aux, &spec).unwrap();
        assert!((r.diagnostics.beta - 5e-5).abs() < 1e-18);
        assert!(r.diagnostics.noise_norm > 0.0);
    }

    #[test]
    fn infinite_epsilon_releases_w_s() {
        let (ens, shards, aux) = setup(4, Task::Binary);
        for method in [Method::Vote, Method::Soft, Method::Avg] {
            let spec = MethodSpec::new(method, f64::INFINITY, 0.01);
            let fit = match method {
                Method::Vote => fit_vote(&ens, &aux, &spec),
                Method::Soft => fit_soft(&ens, &aux, &spec),
                _ => fit_avg(&shards, &spec),
            }
            .unwrap();
            let r = fit.release(f64::INFINITY, 9).unwrap();
            assert_eq!(&r.model, fit.model());
            assert_eq!(r.diagnostics.noise_norm, 0.0);
            assert_eq!(r.diagnostics.beta, f64::INFINITY);
            assert_eq!(r.diagnostics.risk_before, r.diagnostics.risk_after);
        }
    }

    #[test]
    fn soft_equals_vote_for_single_party() {
        let (ens, _, aux) = setup(1, Task::Binary);
        let spec = MethodSpec::new(Method::Soft, f64::INFINITY, 0.05);
        let v = fit_vote(&ens, &aux, &spec).unwrap();
        let s = fit_soft(&ens, &aux, &spec).unwrap();
        for (a, b) in v.model().weights().iter().zip(s.model().weights()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn soft_beta_and_aux_protection() {
        let (ens, _, aux) = setup(5, Task::Binary);
        let mut spec = MethodSpec::new(Method::Soft, 1.0, 1e-4);
        let plain = fit_soft(&ens, &aux, &spec).unwrap().beta(1.0).unwrap();
        assert!((plain - 5.0 * 1e-4 / 2.0).abs() < 1e-15);
        spec.protect_aux = true;
        let protected = fit_soft(&ens, &aux, &spec).unwrap().beta(1.0).unwrap();
        let n = aux.len() as f64;
        assert!((plain / protected - (n + 4.0) / n).abs() < 1e-12);
    }

    #[test]
    fn avg_single_and_identical_shards() {
        let (_, shards, _) = setup(3, Task::Binary);
        let spec = MethodSpec::new(Method::Avg, f64::INFINITY, 0.1);
        let single = run_avg(&shards[..1], &spec).unwrap();
        let (local, _) = linear::erm_minimize(&shards[0], 0.1, &LossSpec::Logistic).unwrap();
        assert_eq!(single.model, local);

        let same = vec![shards[1].clone(), shards[1].clone(), shards[1].clone()];
        let avg = run_avg(&same, &spec).unwrap();
        let (local, _) = linear::erm_minimize(&shards[1], 0.1, &LossSpec::Logistic).unwrap();
        for (a, b) in avg.model.weights().iter().zip(local.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn avg_multiclass_beta() {
        let (_, shards, _) = setup(3, Task::Multiclass(3));
        let spec = MethodSpec::new(Method::Avg, 1.0, 1e-4);
        let fit = fit_avg(&shards, &spec).unwrap();
        let expected = 3.0 * 1e-4 / (2.0 * 2f64.sqrt());
        assert!((fit.beta(1.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn avg_rejects_mixed_handles() {
        let (ens, shards, _) = setup(2, Task::Binary);
        let mixed = ens.replace(0, ensemble::ClassifierHandle::new(0, ensemble::Constant(1)));
        let spec = MethodSpec::new(Method::Avg, 1.0, 0.1);
        assert!(run_avg_ensemble(&mixed, &shards, &spec).is_err());
        let mut with_aux = spec;
        with_aux.protect_aux = true;
        assert!(run_avg(&shards, &with_aux).is_err());
    }

    #[test]
    fn indiv_single_party_matches_batch() {
        let (_, shards, _) = setup(1, Task::Binary);
        let spec = SyntheticSpec::separated(3, Task::Binary, 2.0, 6);
        let test = synthesize(&spec, 300).unwrap().rescale(4.0);
        let ms = MethodSpec::new(Method::Indiv, f64::INFINITY, 0.1);
        let indiv = run_indiv(&shards, &test, &ms).unwrap();
        let batch = run_batch(&shards[0], &ms).unwrap();
        assert_eq!(indiv, evaluate(&batch, &test).unwrap());
    }

    #[test]
    fn batch_is_accurate_on_separable_data() {
        let spec = SyntheticSpec::separated(5, Task::Binary, 6.0, 2);
        let (train, scale) = normalize(&synthesize(&spec, 500).unwrap()).unwrap();
        let test = synthesize(&SyntheticSpec { seed: 3, ..spec }, 2000)
            .unwrap()
            .rescale(scale);
        let w = run_batch(&train, &MethodSpec::new(Method::Batch, 1.0, 1e-3)).unwrap();
        assert!(evaluate(&w, &test).unwrap() >= 0.99);
    }

    #[test]
    fn release_is_seeded() {
        let (ens, _, aux) = setup(3, Task::Multiclass(3));
        let spec = MethodSpec::new(Method::Soft, 2.0, 0.01);
        let fit = fit_soft(&ens, &aux, &spec).unwrap();
        let a = fit.release(2.0, 11).unwrap();
        let b = fit.release(2.0, 11).unwrap();
        let c = fit.release(2.0, 12).unwrap();
        assert_eq!(a.model, b.model);
        assert_ne!(a.model, c.model);
        assert!(a.diagnostics.risk_after > a.diagnostics.risk_before);
    }

    fn bound_params() -> BoundParams {
        BoundParams {
            dim: 50,
            c: 0.25,
            lambda: 1e-4,
            parties: 10_000,
            epsilon: 1.0,
            samples: 1000,
            delta_p: 0.05,
            delta_s: 0.05,
            reference_norm: 2.0,
        }
    }

    #[test]
    fn bound_arithmetic() {
        let p = bound_params();
        let t = excess_risk_bound(&p).unwrap();
        let log = (50.0f64 / 0.05).ln();
        let expected = 4.0 * 2500.0 * (0.25 + 1e-4) * log * log / (1e-8 * 1e8);
        assert!((t.noise - expected).abs() <= 1e-12 * expected);
        assert!((t.regularization - 2e-4).abs() < 1e-18);

        let doubled = excess_risk_bound(&BoundParams {
            parties: 20_000,
            ..p
        })
        .unwrap();
        assert_eq!(doubled.noise * 4.0, t.noise);
        assert_eq!(doubled.sample, t.sample);
        let other_eps = excess_risk_bound(&BoundParams { epsilon: 0.3, ..p }).unwrap();
        assert_eq!(other_eps.sample, t.sample);
    }

    #[test]
    fn bound_rejects_bad_probabilities() {
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(excess_risk_bound(&BoundParams {
                delta_p: bad,
                ..bound_params()
            })
            .is_err());
            assert!(excess_risk_bound(&BoundParams {
                delta_s: bad,
                ..bound_params()
            })
            .is_err());
        }
    }
}
