//! Local classifiers as black boxes, their votes, and the transfer of the
//! ensemble's knowledge onto auxiliary unlabeled samples.

use std::fmt;
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dataset::{Dataset, Sample, Task};
use crate::linear::{self, LinearModel, LossSpec};
use crate::{Error, Result};

/// A predict-only classifier. Implementations must be deterministic.
pub trait Classifier: Send + Sync + fmt::Debug {
    fn predict(&self, x: &[f64]) -> i32;

    /// Parameters of a linear classifier, if this is one.
    fn linear_model(&self) -> Option<&LinearModel> {
        None
    }
}

impl Classifier for LinearModel {
    fn predict(&self, x: &[f64]) -> i32 {
        self.predict_unchecked(x)
    }

    fn linear_model(&self) -> Option<&LinearModel> {
        Some(self)
    }
}

/// Predicts the same label everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constant(pub i32);

impl Classifier for Constant {
    fn predict(&self, _x: &[f64]) -> i32 {
        self.0
    }
}

/// Threshold on a single feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub above: i32,
    pub below: i32,
}

impl Classifier for Stump {
    fn predict(&self, x: &[f64]) -> i32 {
        if x[self.feature] >= self.threshold {
            self.above
        } else {
            self.below
        }
    }
}

/// One party's classifier.
#[derive(Clone)]
pub struct ClassifierHandle {
    party: usize,
    inner: Arc<dyn Classifier>,
}

impl fmt::Debug for ClassifierHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassifierHandle")
            .field("party", &self.party)
            .field("inner", &self.inner)
            .finish()
    }
}

impl ClassifierHandle {
    pub fn new(party: usize, classifier: impl Classifier + 'static) -> Self {
        Self {
            party,
            inner: Arc::new(classifier),
        }
    }

    pub fn from_arc(party: usize, classifier: Arc<dyn Classifier>) -> Self {
        Self {
            party,
            inner: classifier,
        }
    }

    pub fn party(&self) -> usize {
        self.party
    }

    pub fn predict(&self, x: &[f64]) -> i32 {
        self.inner.predict(x)
    }

    pub fn linear_model(&self) -> Option<&LinearModel> {
        self.inner.linear_model()
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    handles: Vec<ClassifierHandle>,
    dim: usize,
    task: Task,
}

impl Ensemble {
    pub fn new(handles: Vec<ClassifierHandle>, dim: usize, task: Task) -> Result<Self> {
        if handles.is_empty() {
            return Err(Error::invalid("ensemble", "needs at least one classifier"));
        }
        Ok(Self { handles, dim, task })
    }

    pub fn handles(&self) -> &[ClassifierHandle] {
        &self.handles
    }

    /// Number of parties `M`.
    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// Copy with the classifier at `index` replaced.
    pub fn replace(&self, index: usize, handle: ClassifierHandle) -> Ensemble {
        let mut handles = self.handles.clone();
        handles[index] = handle;
        Ensemble {
            handles,
            dim: self.dim,
            task: self.task,
        }
    }

    /// Votes per class index.
    pub fn vote_counts(&self, x: &[f64]) -> Result<Vec<usize>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut counts = vec![0; self.task.classes()];
        for h in &self.handles {
            let y = h.predict(x);
            if !self.task.is_valid_label(y) {
                return Err(Error::invalid(
                    "classifier",
                    format!("party {} predicted invalid label {y}", h.party),
                ));
            }
            counts[self.task.class_index(y)] += 1;
        }
        Ok(counts)
    }

    /// Majority vote. Binary: `+1` iff at least `M/2` classifiers say `+1`,
    /// so exact ties on even `M` go to `+1`. Multiclass: plurality with
    /// ties to the smallest class index.
    pub fn majority_vote(&self, x: &[f64]) -> Result<i32> {
        let counts = self.vote_counts(x)?;
        Ok(vote_from_counts(&counts, self.len(), self.task))
    }

    /// Per-class vote fractions in class-index order.
    pub fn vote_fractions(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.len() as f64;
        Ok(self
            .vote_counts(x)?
            .into_iter()
            .map(|c| c as f64 / m)
            .collect())
    }

    /// Fraction `α` of positive votes (binary ensembles).
    pub fn positive_fraction(&self, x: &[f64]) -> Result<f64> {
        if !self.task.is_binary() {
            return Err(Error::Unsupported(
                "positive fraction of a multiclass ensemble".into(),
            ));
        }
        Ok(self.vote_fractions(x)?[1])
    }

    /// Parameters of every member, failing if any member is not linear.
    pub fn linear_models(&self) -> Result<Vec<&LinearModel>> {
        self.handles
            .iter()
            .map(|h| {
                h.linear_model().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "parameter averaging needs linear classifiers; party {} is not",
                        h.party
                    ))
                })
            })
            .collect()
    }
}

fn vote_from_counts(counts: &[usize], m: usize, task: Task) -> i32 {
    match task {
        Task::Binary => {
            if 2 * counts[1] >= m {
                1
            } else {
                -1
            }
        }
        Task::Multiclass(_) => {
            let mut best = 0;
            for (c, &n) in counts.iter().enumerate() {
                if n > counts[best] {
                    best = c;
                }
            }
            task.label_of(best)
        }
    }
}

/// Auxiliary features paired with the ensemble's vote fractions.
///
/// Fractions are stored per sample in class-index order; for binary sets the
/// second entry is `α`, the fraction of positive votes.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabeledSet {
    features: Vec<Vec<f64>>,
    fractions: Vec<Vec<f64>>,
    dim: usize,
    task: Task,
    voters: Option<usize>,
}

impl SoftLabeledSet {
    /// `voters`, when given, also enforces that `M·α` is integral.
    pub fn new(
        features: Vec<Vec<f64>>,
        fractions: Vec<Vec<f64>>,
        task: Task,
        voters: Option<usize>,
    ) -> Result<Self> {
        if features.len() != fractions.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                found: fractions.len(),
            });
        }
        let dim = features.first().map_or(0, Vec::len);
        let k = task.classes();
        for (x, alpha) in features.iter().zip(&fractions) {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: x.len(),
                });
            }
            if alpha.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: alpha.len(),
                });
            }
            let total: f64 = alpha.iter().sum();
            if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(
                    "alpha",
                    format!("{alpha:?} is not on the simplex"),
                ));
            }
            if let Some(m) = voters {
                if alpha
                    .iter()
                    .any(|a| ((a * m as f64) - (a * m as f64).round()).abs() > 1e-9)
                {
                    return Err(Error::invalid(
                        "alpha",
                        format!("{alpha:?} is not a multiple of 1/{m}"),
                    ));
                }
            }
        }
        Ok(Self {
            features,
            fractions,
            dim,
            task,
            voters,
        })
    }

    /// Binary set from positive-vote fractions `α ∈ [0, 1]`.
    pub fn binary(
        features: Vec<Vec<f64>>,
        alphas: Vec<f64>,
        voters: Option<usize>,
    ) -> Result<Self> {
        let fractions = alphas.into_iter().map(|a| vec![1.0 - a, a]).collect();
        Self::new(features, fractions, Task::Binary, voters)
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn fractions(&self) -> &[Vec<f64>] {
        &self.fractions
    }

    /// Positive-vote fraction of sample `i` (binary sets).
    pub fn alpha(&self, i: usize) -> f64 {
        self.fractions[i][1]
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn voters(&self) -> Option<usize> {
        self.voters
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferMode {
    Vote,
    Soft,
}

#[derive(Debug, Clone)]
pub enum Transferred {
    Hard(Dataset),
    Soft(SoftLabeledSet),
}

fn map_samples<T: Send>(
    samples: &[Sample],
    f: impl Fn(&Sample) -> Result<T> + Send + Sync,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        samples.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        samples.iter().map(f).collect()
    }
}

/// Labels every auxiliary sample with the ensemble's majority vote.
pub fn transfer_votes(ensemble: &Ensemble, aux: &Dataset) -> Result<Dataset> {
    check_aux(ensemble, aux)?;
    let samples = map_samples(aux.samples(), |s| {
        Ok(Sample {
            y: Some(ensemble.majority_vote(&s.x)?),
            ..s.clone()
        })
    })?;
    Dataset::new(samples, aux.dim(), ensemble.task())
}

/// Pairs every auxiliary sample with the ensemble's vote fractions.
pub fn transfer_soft(ensemble: &Ensemble, aux: &Dataset) -> Result<SoftLabeledSet> {
    check_aux(ensemble, aux)?;
    let fractions = map_samples(aux.samples(), |s| ensemble.vote_fractions(&s.x))?;
    let features = aux.features().map(<[f64]>::to_vec).collect();
    SoftLabeledSet::new(features, fractions, ensemble.task(), Some(ensemble.len()))
}

pub fn transfer(ensemble: &Ensemble, aux: &Dataset, mode: TransferMode) -> Result<Transferred> {
    Ok(match mode {
        TransferMode::Vote => Transferred::Hard(transfer_votes(ensemble, aux)?),
        TransferMode::Soft => Transferred::Soft(transfer_soft(ensemble, aux)?),
    })
}

fn check_aux(ensemble: &Ensemble, aux: &Dataset) -> Result<()> {
    if aux.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if aux.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.dim(),
            found: aux.dim(),
        });
    }
    Ok(())
}

/// Trains one party's classifier. Shards holding a single class yield a
/// constant classifier; others a regularized linear model.
///
/// Returns the handle and the solver iteration count (0 for constants).
pub fn train_local(
    party: usize,
    shard: &Dataset,
    lambda: f64,
    loss: &LossSpec,
) -> Result<(ClassifierHandle, usize)> {
    if shard.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !shard.is_labeled() {
        return Err(Error::invalid(
            "shard",
            "local training needs labeled samples",
        ));
    }
    let first = shard.samples()[0].y.expect("labeled");
    if shard.labels().all(|y| y == first) {
        return Ok((ClassifierHandle::new(party, Constant(first)), 0));
    }
    let (model, report) = linear::erm_minimize(shard, lambda, loss)?;
    Ok((ClassifierHandle::new(party, model), report.iterations))
}

/// Trains one local classifier per shard, in party order.
pub fn train_locals(shards: &[Dataset], lambda: f64, loss: &LossSpec) -> Result<Ensemble> {
    let first = shards
        .first()
        .ok_or_else(|| Error::invalid("shards", "need at least one shard"))?;
    let train =
        |(party, shard): (usize, &Dataset)| train_local(party, shard, lambda, loss).map(|(h, _)| h);
    #[cfg(feature = "parallel")]
    let handles = shards
        .par_iter()
        .enumerate()
        .map(train)
        .collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let handles = shards
        .iter()
        .enumerate()
        .map(train)
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(handles, first.dim(), first.task())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    fn constants(labels: &[i32], task: Task) -> Ensemble {
        let handles = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| ClassifierHandle::new(i, Constant(y)))
            .collect();
        Ensemble::new(handles, 1, task).unwrap()
    }

    #[test]
    fn binary_majority() {
        assert_eq!(
            constants(&[1, 1, -1], Task::Binary)
                .majority_vote(&[0.0])
                .unwrap(),
            1
        );
        assert_eq!(
            constants(&[1, -1], Task::Binary)
                .majority_vote(&[0.0])
                .unwrap(),
            1
        );
        assert_eq!(
            constants(&[-1; 5], Task::Binary)
                .majority_vote(&[0.0])
                .unwrap(),
            -1
        );
    }

    #[test]
    fn multiclass_plurality_ties_to_smallest() {
        let e = constants(&[3, 2, 3, 2, 1], Task::Multiclass(3));
        assert_eq!(e.majority_vote(&[0.0]).unwrap(), 2);
        assert_eq!(e.vote_fractions(&[0.0]).unwrap(), vec![0.2, 0.4, 0.4]);
    }

    #[test]
    fn fractions() {
        let e = constants(&[1, 1, -1], Task::Binary);
        assert!((e.positive_fraction(&[0.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            constants(&[1; 4], Task::Binary)
                .positive_fraction(&[0.0])
                .unwrap(),
            1.0
        );
    }

    fn random_stumps(rng: &mut impl Rng, m: usize, dim: usize) -> Ensemble {
        let handles = (0..m)
            .map(|i| {
                let s = Stump {
                    feature: rng.random_range(0..dim),
                    threshold: rng.random_range(-0.5..0.5),
                    above: 1,
                    below: -1,
                };
                ClassifierHandle::new(i, s)
            })
            .collect();
        Ensemble::new(handles, dim, Task::Binary).unwrap()
    }

    #[test]
    fn vote_agrees_with_fraction_threshold() {
        let mut rng = seed::rng(77);
        for trial in 0..1000 {
            let m = 1 + trial % 8;
            let e = random_stumps(&mut rng, m, 3);
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = e.majority_vote(&x).unwrap();
            let a = e.positive_fraction(&x).unwrap();
            assert_eq!(v == 1, a >= 0.5, "m={m} alpha={a}");
        }
    }

    fn aux(rng: &mut impl Rng, n: usize, dim: usize) -> Dataset {
        let xs = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        Dataset::unlabeled(xs, Task::Binary).unwrap()
    }

    #[test]
    fn transfer_shapes() {
        let mut rng = seed::rng(1);
        let e = random_stumps(&mut rng, 5, 2);
        let pool = aux(&mut rng, 4, 2);
        let hard = transfer_votes(&e, &pool).unwrap();
        assert_eq!(hard.len(), 4);
        assert!(hard.is_labeled());
        assert_eq!(hard.samples()[0].x, pool.samples()[0].x);

        let same = Stump {
            feature: 0,
            threshold: 0.1,
            above: 1,
            below: -1,
        };
        let unanimous = Ensemble::new(
            (0..4).map(|i| ClassifierHandle::new(i, same)).collect(),
            2,
            Task::Binary,
        )
        .unwrap();
        let soft = transfer_soft(&unanimous, &pool).unwrap();
        assert!((0..soft.len()).all(|i| soft.alpha(i) == 0.0 || soft.alpha(i) == 1.0));
    }

    #[test]
    fn replacing_one_classifier_moves_alpha_by_at_most_one_vote() {
        let mut rng = seed::rng(5);
        for _ in 0..50 {
            let m = rng.random_range(1..12);
            let e = random_stumps(&mut rng, m, 3);
            let replacement = random_stumps(&mut rng, 1, 3).handles()[0].clone();
            let e2 = e.replace(rng.random_range(0..m), replacement);
            let pool = aux(&mut rng, 30, 3);
            let (a, b) = (
                transfer_soft(&e, &pool).unwrap(),
                transfer_soft(&e2, &pool).unwrap(),
            );
            for i in 0..pool.len() {
                // direct recomputation of the changed vote share
                assert!((a.alpha(i) - b.alpha(i)).abs() <= 1.0 / m as f64 + 1e-15);
                let votes = a.alpha(i) * m as f64;
                assert!((votes - votes.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dimension_mismatch_in_transfer() {
        let mut rng = seed::rng(2);
        let e = random_stumps(&mut rng, 3, 3);
        let pool = aux(&mut rng, 2, 2);
        assert!(matches!(
            transfer_soft(&e, &pool),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn separable_shard(rng: &mut impl Rng, n: usize) -> Dataset {
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 0.5 } else { -0.5 };
                vec![s + rng.random_range(-0.2..0.2), rng.random_range(-0.3..0.3)]
            })
            .collect();
        let ys = xs.iter().map(|x| if x[0] > 0.0 { 1 } else { -1 }).collect();
        Dataset::labeled(xs, ys, Task::Binary).unwrap()
    }

    #[test]
    fn locals_fit_their_shards() {
        let mut rng = seed::rng(9);
        let shards: Vec<_> = (0..3).map(|_| separable_shard(&mut rng, 20)).collect();
        let e = train_locals(&shards, 1e-3, &LossSpec::Logistic).unwrap();
        assert_eq!(e.len(), 3);
        for (h, shard) in e.handles().iter().zip(&shards) {
            let correct = shard
                .samples()
                .iter()
                .filter(|s| Some(h.predict(&s.x)) == s.y)
                .count();
            assert!(correct as f64 / shard.len() as f64 >= 0.5);
        }
        let again = train_locals(&shards, 1e-3, &LossSpec::Logistic).unwrap();
        for (a, b) in e.handles().iter().zip(again.handles()) {
            assert_eq!(a.linear_model(), b.linear_model());
        }
    }

    #[test]
    fn single_class_shard_is_constant() {
        let shard =
            Dataset::labeled(vec![vec![0.1], vec![-0.4]], vec![1, 1], Task::Binary).unwrap();
        let (h, iters) = train_local(0, &shard, 0.1, &LossSpec::Logistic).unwrap();
        assert_eq!(iters, 0);
        assert!(h.linear_model().is_none());
        for x in [-1.0, 0.0, 1.0] {
            assert_eq!(h.predict(&[x]), 1);
        }
    }

    #[test]
    fn empty_shard_is_an_error() {
        let empty = Dataset::unlabeled(vec![], Task::Binary).unwrap();
        assert!(train_locals(&[empty], 0.1, &LossSpec::Logistic).is_err());
    }

    #[test]
    fn soft_set_validation() {
        assert!(SoftLabeledSet::binary(vec![vec![0.0]], vec![1.2], None).is_err());
        assert!(SoftLabeledSet::binary(vec![vec![0.0]], vec![0.5], Some(3)).is_err());
        assert!(SoftLabeledSet::binary(vec![vec![0.0]], vec![2.0 / 3.0], Some(3)).is_ok());
        assert!(SoftLabeledSet::new(
            vec![vec![0.0]],
            vec![vec![0.5, 0.6, 0.0]],
            Task::Multiclass(3),
            None
        )
        .is_err());
    }
}
