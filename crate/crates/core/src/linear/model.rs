use std::fmt::Write as _;

use super::LossSpec;
use crate::dataset::Task;
use crate::{Error, Result};

/// Weights of a global linear classifier.
///
/// Binary models hold one `d`-vector. Multiclass models hold `K` stacked
/// blocks `[w_1; …; w_K]`, one per class, for `d·K` entries in total.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    dim: usize,
    task: Task,
}

pub(crate) fn weight_len(dim: usize, task: Task) -> usize {
    match task {
        Task::Binary => dim,
        Task::Multiclass(k) => dim * k,
    }
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, dim: usize, task: Task) -> Result<Self> {
        let expected = weight_len(dim, task);
        if weights.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights", "must be finite"));
        }
        Ok(Self { weights, dim, task })
    }

    pub fn zeros(dim: usize, task: Task) -> Self {
        Self {
            weights: vec![0.0; weight_len(dim, task)],
            dim,
            task,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn norm(&self) -> f64 {
        crate::dataset::norm(&self.weights)
    }

    /// Weight block of class index `k` (multiclass only).
    pub fn block(&self, k: usize) -> &[f64] {
        &self.weights[k * self.dim..(k + 1) * self.dim]
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Binary: `sign(wᵀx)` with 0 mapped to `+1`. Multiclass: the argmax of
    /// `w_kᵀx`, ties going to the smallest class index.
    pub fn predict(&self, x: &[f64]) -> Result<i32> {
        self.check_dim(x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> i32 {
        match self.task {
            Task::Binary => {
                if dot(&self.weights, x) >= 0.0 {
                    1
                } else {
                    -1
                }
            }
            Task::Multiclass(k) => {
                let mut best = 0;
                let mut best_score = f64::NEG_INFINITY;
                for c in 0..k {
                    let s = dot(self.block(c), x);
                    if s > best_score {
                        best = c;
                        best_score = s;
                    }
                }
                self.task.label_of(best)
            }
        }
    }

    /// Elementwise sum with a same-length vector.
    pub fn shifted(&self, delta: &[f64]) -> Result<Self> {
        if delta.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: delta.len(),
            });
        }
        let weights = self.weights.iter().zip(delta).map(|(a, b)| a + b).collect();
        Self::new(weights, self.dim, self.task)
    }

    /// Plain-text form: one header line, then one weight per line with 17
    /// significant digits so that parsing restores the exact bits.
    pub fn to_text(&self, loss: &LossSpec, lambda: f64) -> String {
        let classes = self.task.classes();
        let task = if self.task.is_binary() {
            "binary"
        } else {
            "multiclass"
        };
        let loss = match loss {
            LossSpec::Logistic => "logistic".to_string(),
            LossSpec::SmoothedHinge { h } => format!("smoothed-hinge:{h:.16e}"),
        };
        let mut out = format!(
            "linear-model d={} classes={classes} task={task} loss={loss} lambda={lambda:.16e}\n",
            self.dim
        );
        for w in &self.weights {
            writeln!(out, "{w:.16e}").expect("writing to String");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<(Self, LossSpec, f64)> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::EmptyDataset)?;
        let bad = |line: usize, message: String| Error::Parse {
            line: line + 1,
            message,
        };
        let mut fields = header.split_whitespace();
        if fields.next() != Some("linear-model") {
            return Err(bad(0, "missing linear-model header".into()));
        }
        let (mut dim, mut classes, mut task, mut loss, mut lambda) = (None, None, None, None, None);
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad(0, format!("bad header field {field:?}")))?;
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| bad(0, format!("bad number {v:?}")))
            };
            match key {
                "d" => dim = Some(value.parse::<usize>().map_err(|_| bad(0, "bad d".into()))?),
                "classes" => {
                    classes = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| bad(0, "bad classes".into()))?,
                    )
                }
                "task" => task = Some(value.to_string()),
                "lambda" => lambda = Some(num(value)?),
                "loss" => {
                    loss = Some(match value.split_once(':') {
                        None if value == "logistic" => LossSpec::Logistic,
                        Some(("smoothed-hinge", h)) => LossSpec::smoothed_hinge(num(h)?)?,
                        _ => return Err(bad(0, format!("unknown loss {value:?}"))),
                    })
                }
                _ => return Err(bad(0, format!("unknown header key {key:?}"))),
            }
        }
        let missing = |k: &str| bad(0, format!("header lacks {k}"));
        let dim = dim.ok_or_else(|| missing("d"))?;
        let classes = classes.ok_or_else(|| missing("classes"))?;
        let task = match task.as_deref() {
            Some("binary") => Task::Binary,
            Some("multiclass") => Task::Multiclass(classes),
            _ => return Err(missing("task")),
        };
        let weights = lines
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(i, format!("bad weight {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let model = Self::new(weights, dim, task)?;
        Ok((
            model,
            loss.ok_or_else(|| missing("loss"))?,
            lambda.ok_or_else(|| missing("lambda"))?,
        ))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_sign_rule() {
        let m = LinearModel::new(vec![1.0, 0.0], 2, Task::Binary).unwrap();
        assert_eq!(m.predict(&[0.5, 0.9]).unwrap(), 1);
        assert_eq!(m.predict(&[-0.5, 0.9]).unwrap(), -1);
        let zero = LinearModel::zeros(2, Task::Binary);
        assert_eq!(zero.predict(&[-0.3, 0.7]).unwrap(), 1);
    }

    #[test]
    fn multiclass_ties_go_to_smallest_index() {
        // scores (0.2, 0.9, 0.9) with x = (1)
        let m = LinearModel::new(vec![0.2, 0.9, 0.9], 1, Task::Multiclass(3)).unwrap();
        assert_eq!(m.predict(&[1.0]).unwrap(), 2);
    }

    #[test]
    fn dimension_mismatch() {
        let m = LinearModel::zeros(3, Task::Binary);
        assert!(matches!(
            m.predict(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            weights in prop::collection::vec(-1e6f64..1e6, 6),
            lambda in 1e-8f64..10.0,
            h in 0.01f64..2.0,
        ) {
            let m = LinearModel::new(weights, 2, Task::Multiclass(3)).unwrap();
            let loss = LossSpec::SmoothedHinge { h };
            let (back, loss_back, lambda_back) = LinearModel::from_text(&m.to_text(&loss, lambda)).unwrap();
            prop_assert_eq!(back, m);
            prop_assert_eq!(loss_back, loss);
            prop_assert_eq!(lambda_back, lambda);
        }
    }
}
