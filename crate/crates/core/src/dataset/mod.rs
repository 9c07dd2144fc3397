//! Data model shared by every other module: samples, datasets, feature
//! normalization and the split of training data across parties.

mod io;
mod synthetic;

pub use io::{load, parse, Format};
pub use synthetic::{posterior, synthesize, SyntheticSpec};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result};

/// Label space of a dataset.
///
/// Binary labels are `-1`/`+1`; multiclass labels are `1..=K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Binary,
    Multiclass(usize),
}

impl Task {
    pub fn classes(self) -> usize {
        match self {
            Task::Binary => 2,
            Task::Multiclass(k) => k,
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Task::Binary)
    }

    pub fn is_valid_label(self, y: i32) -> bool {
        match self {
            Task::Binary => y == 1 || y == -1,
            Task::Multiclass(k) => y >= 1 && (y as usize) <= k,
        }
    }

    /// Zero-based class index. Binary `-1` is class 0 and `+1` is class 1.
    pub fn class_index(self, y: i32) -> usize {
        match self {
            Task::Binary => usize::from(y == 1),
            Task::Multiclass(_) => (y - 1) as usize,
        }
    }

    pub fn label_of(self, index: usize) -> i32 {
        match self {
            Task::Binary => {
                if index == 1 {
                    1
                } else {
                    -1
                }
            }
            Task::Multiclass(_) => index as i32 + 1,
        }
    }

    /// Every label, in class-index order.
    pub fn labels(self) -> Vec<i32> {
        (0..self.classes()).map(|i| self.label_of(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Option<i32>,
    /// Row index in the source this sample was drawn from.
    pub id: usize,
}

/// An ordered collection of samples of one dimension.
///
/// Either every sample carries a label or none does.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    dim: usize,
    task: Task,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, dim: usize, task: Task) -> Result<Self> {
        if let Task::Multiclass(k) = task {
            if k < 2 {
                return Err(Error::invalid(
                    "classes",
                    "multiclass needs at least 2 classes",
                ));
            }
        }
        let labeled = samples.first().map(|s| s.y.is_some());
        for (i, s) in samples.iter().enumerate() {
            if s.x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.x.len(),
                });
            }
            if s.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
            if Some(s.y.is_some()) != labeled {
                return Err(Error::invalid(
                    "samples",
                    "mixed labeled and unlabeled samples",
                ));
            }
            if let Some(y) = s.y {
                if !task.is_valid_label(y) {
                    return Err(Error::UnknownLabel {
                        line: i + 1,
                        token: y.to_string(),
                    });
                }
            }
        }
        Ok(Self { samples, dim, task })
    }

    /// Builds a labeled dataset; sample ids are the row positions.
    pub fn labeled(xs: Vec<Vec<f64>>, ys: Vec<i32>, task: Task) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                found: ys.len(),
            });
        }
        let dim = xs.first().map_or(0, Vec::len);
        let samples = xs
            .into_iter()
            .zip(ys)
            .enumerate()
            .map(|(id, (x, y))| Sample { x, y: Some(y), id })
            .collect();
        Self::new(samples, dim, task)
    }

    pub fn unlabeled(xs: Vec<Vec<f64>>, task: Task) -> Result<Self> {
        let dim = xs.first().map_or(0, Vec::len);
        let samples = xs
            .into_iter()
            .enumerate()
            .map(|(id, x)| Sample { x, y: None, id })
            .collect();
        Self::new(samples, dim, task)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn is_labeled(&self) -> bool {
        self.samples.first().is_some_and(|s| s.y.is_some())
    }

    pub fn features(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.iter().map(|s| s.x.as_slice())
    }

    /// Labels of a labeled dataset. Panics on unlabeled data.
    pub fn labels(&self) -> impl Iterator<Item = i32> + '_ {
        self.samples
            .iter()
            .map(|s| s.y.expect("labels() called on unlabeled dataset"))
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.samples.iter().map(|s| s.id)
    }

    pub fn strip_labels(&self) -> Dataset {
        Dataset {
            samples: self
                .samples
                .iter()
                .map(|s| Sample {
                    y: None,
                    ..s.clone()
                })
                .collect(),
            dim: self.dim,
            task: self.task,
        }
    }

    /// Appends a constant feature equal to 1.
    pub fn with_bias(&self) -> Dataset {
        Dataset {
            samples: self
                .samples
                .iter()
                .map(|s| {
                    let mut x = s.x.clone();
                    x.push(1.0);
                    Sample { x, ..s.clone() }
                })
                .collect(),
            dim: self.dim + 1,
            task: self.task,
        }
    }

    /// Concatenates datasets of equal dimension and task.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Dataset>) -> Result<Dataset> {
        let mut iter = parts.into_iter();
        let first = iter.next().ok_or(Error::EmptyDataset)?;
        let mut samples = first.samples.clone();
        for part in iter {
            if part.dim != first.dim {
                return Err(Error::DimensionMismatch {
                    expected: first.dim,
                    found: part.dim,
                });
            }
            samples.extend_from_slice(&part.samples);
        }
        Dataset::new(samples, first.dim, first.task)
    }

    fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
            dim: self.dim,
            task: self.task,
        }
    }

    /// Scales every feature vector by `1/scale` and radially clips vectors
    /// whose norm still exceeds 1.
    pub fn rescale(&self, scale: f64) -> Dataset {
        Dataset {
            samples: self
                .samples
                .iter()
                .map(|s| {
                    let mut x: Vec<f64> = s.x.iter().map(|v| v / scale).collect();
                    let n = norm(&x);
                    if n > 1.0 {
                        x.iter_mut().for_each(|v| *v /= n);
                    }
                    Sample { x, ..s.clone() }
                })
                .collect(),
            dim: self.dim,
            task: self.task,
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Divides all features by the largest sample norm when it exceeds 1, so
/// that every returned vector satisfies `‖x‖ ≤ 1`.
///
/// Returns the divisor; apply it to evaluation data with
/// [`Dataset::rescale`].
pub fn normalize(dataset: &Dataset) -> Result<(Dataset, f64)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(i) = dataset
        .samples
        .iter()
        .position(|s| s.x.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFinite { index: i });
    }
    let max_norm = dataset.features().map(norm).fold(0.0, f64::max);
    if max_norm <= 1.0 {
        return Ok((dataset.clone(), 1.0));
    }
    Ok((dataset.rescale(max_norm), max_norm))
}

/// How training data is distributed across parties and the auxiliary pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionPlan {
    pub parties: usize,
    pub aux_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub shards: Vec<Dataset>,
    /// Unlabeled auxiliary pool.
    pub aux: Dataset,
}

impl PartitionPlan {
    /// Auxiliary pool size for `n` samples.
    pub fn aux_size(&self, n: usize) -> usize {
        // Tolerate representation error in fractions like 1/7.
        (self.aux_fraction * n as f64 + 1e-9).floor() as usize
    }
}

/// Randomly splits `dataset` into an unlabeled auxiliary pool and `M`
/// disjoint party shards, without replacement.
///
/// The first `N mod M` shards receive one extra sample.
pub fn partition(dataset: &Dataset, plan: &PartitionPlan) -> Result<Partition> {
    if plan.parties == 0 {
        return Err(Error::invalid("parties", "must be at least 1"));
    }
    if !(plan.aux_fraction > 0.0 && plan.aux_fraction < 1.0) {
        return Err(Error::invalid("aux_fraction", "must lie in (0, 1)"));
    }
    let n = dataset.len();
    let n_aux = plan.aux_size(n);
    if n_aux == 0 {
        return Err(Error::TooFewSamples {
            available: n,
            required: (1.0 / plan.aux_fraction).ceil() as usize,
        });
    }
    let n_private = n - n_aux;
    if n_private < plan.parties {
        return Err(Error::TooFewSamples {
            available: n_private,
            required: plan.parties,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(plan.seed));
    let aux = dataset.select(&order[..n_aux]).strip_labels();

    let base = n_private / plan.parties;
    let extra = n_private % plan.parties;
    let mut shards = Vec::with_capacity(plan.parties);
    let mut start = n_aux;
    for party in 0..plan.parties {
        let len = base + usize::from(party < extra);
        shards.push(dataset.select(&order[start..start + len]));
        start += len;
    }
    Ok(Partition { shards, aux })
}

/// Seeded split into `(train, test)` with `test_fraction` of the samples in
/// the test set.
pub fn train_test_split(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test_fraction", "must lie in (0, 1)"));
    }
    let n = dataset.len();
    let n_test = (test_fraction * n as f64).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::TooFewSamples {
            available: n,
            required: 2,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let test = dataset.select(&order[..n_test]);
    let train = dataset.select(&order[n_test..]);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn unit(xs: Vec<Vec<f64>>) -> Dataset {
        let n = xs.len();
        Dataset::labeled(xs, vec![1; n], Task::Binary).unwrap()
    }

    #[test]
    fn normalize_identity_when_bounded() {
        let d = unit(vec![vec![0.3, 0.4], vec![-1.0, 0.0]]);
        let (out, scale) = normalize(&d).unwrap();
        assert_eq!(scale, 1.0);
        assert_eq!(out, d);
    }

    #[test]
    fn normalize_single_sample() {
        let (out, scale) = normalize(&unit(vec![vec![3.0, 4.0]])).unwrap();
        assert_eq!(scale, 5.0);
        assert_eq!(out.samples()[0].x, vec![0.6, 0.8]);
    }

    #[test]
    fn normalize_uses_max_norm() {
        let (out, scale) = normalize(&unit(vec![vec![2.0, 0.0], vec![0.0, 1.0]])).unwrap();
        assert_eq!(scale, 2.0);
        assert_eq!(out.samples()[0].x, vec![1.0, 0.0]);
        assert_eq!(out.samples()[1].x, vec![0.0, 0.5]);
    }

    #[test]
    fn normalize_errors() {
        let empty = Dataset::unlabeled(vec![], Task::Binary).unwrap();
        assert!(matches!(normalize(&empty), Err(Error::EmptyDataset)));
        assert!(matches!(
            Dataset::unlabeled(vec![vec![f64::NAN]], Task::Binary),
            Err(Error::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn rescale_clips_test_vectors() {
        let test = unit(vec![vec![10.0, 0.0], vec![1.0, 0.0]]);
        let out = test.rescale(2.0);
        assert_eq!(out.samples()[0].x, vec![1.0, 0.0]);
        assert_eq!(out.samples()[1].x, vec![0.5, 0.0]);
    }

    fn numbered(n: usize) -> Dataset {
        let xs = (0..n).map(|i| vec![i as f64]).collect();
        let ys = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Dataset::labeled(xs, ys, Task::Binary).unwrap()
    }

    #[test]
    fn partition_sizes() {
        let plan = PartitionPlan {
            parties: 9,
            aux_fraction: 0.10,
            seed: 1,
        };
        let p = partition(&numbered(100), &plan).unwrap();
        assert_eq!(p.aux.len(), 10);
        assert!(!p.aux.is_labeled());
        assert!(p.shards.iter().all(|s| s.len() == 10));
    }

    #[test]
    fn partition_uneven_front_loads_extra() {
        let plan = PartitionPlan {
            parties: 4,
            aux_fraction: 0.1,
            seed: 3,
        };
        // 50 samples: 5 aux, 45 private -> 12, 11, 11, 11
        let p = partition(&numbered(50), &plan).unwrap();
        let sizes: Vec<_> = p.shards.iter().map(Dataset::len).collect();
        assert_eq!(sizes, vec![12, 11, 11, 11]);
    }

    #[test]
    fn partition_at_full_scale() {
        let plan = PartitionPlan {
            parties: 1000,
            aux_fraction: 1.0 / 7.0,
            seed: 5,
        };
        let p = partition(&numbered(7000), &plan).unwrap();
        assert_eq!(p.aux.len(), 1000);
        assert!(p.shards.iter().all(|s| s.len() == 6));
    }

    #[test]
    fn partition_is_deterministic_and_disjoint() {
        let plan = PartitionPlan {
            parties: 7,
            aux_fraction: 0.2,
            seed: 11,
        };
        let d = numbered(83);
        let a = partition(&d, &plan).unwrap();
        let b = partition(&d, &plan).unwrap();
        assert_eq!(a.aux, b.aux);
        assert_eq!(a.shards, b.shards);

        let mut seen = HashSet::new();
        for id in a.aux.ids().chain(a.shards.iter().flat_map(|s| s.ids())) {
            assert!(seen.insert(id), "sample {id} assigned twice");
        }
        assert_eq!(seen.len(), 83);
    }

    #[test]
    fn partition_rejects_too_many_parties() {
        let plan = PartitionPlan {
            parties: 20,
            aux_fraction: 0.1,
            seed: 0,
        };
        assert!(matches!(
            partition(&numbered(20), &plan),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn bias_is_appended() {
        let d = unit(vec![vec![3.0, 4.0]]).with_bias();
        assert_eq!(d.dim(), 3);
        assert_eq!(d.samples()[0].x, vec![3.0, 4.0, 1.0]);
    }

    #[test]
    fn split_is_disjoint() {
        let (train, test) = train_test_split(&numbered(100), 0.3, 9).unwrap();
        assert_eq!(train.len(), 70);
        assert_eq!(test.len(), 30);
        let ids: HashSet<_> = train.ids().collect();
        assert!(test.ids().all(|i| !ids.contains(&i)));
    }
}
