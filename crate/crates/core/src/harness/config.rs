use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{SyntheticSpec, Task};
use crate::linear::LossSpec;
use crate::pipelines::Method;
use crate::{Error, Result};

/// A sweep over party counts, privacy budgets, methods and trials.
///
/// Read from TOML. Every field except `source`, `parties` and `inv_epsilon`
/// has a default:
///
/// ```toml
/// parties = [100, 1000]
/// inv_epsilon = [0, 0.1, 1]      # 1/ε; 0 means no noise
/// methods = ["batch", "indiv", "vote", "soft", "avg"]
/// lambda = 1e-4
/// aux_fraction = 0.1
/// trials_private = 100
/// trials_nonprivate = 10
/// master_seed = 7
/// output = "results.csv"
///
/// [source]
/// kind = "synthetic"
/// samples = 10000
/// dim = 10
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: Source,
    /// Append a constant feature before normalization.
    #[serde(default = "yes")]
    pub add_bias: bool,
    /// Party counts `M` to sweep.
    pub parties: Vec<usize>,
    #[serde(default = "default_aux_fraction")]
    pub aux_fraction: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub loss: LossSpec,
    /// Values of `1/ε`; zero runs private methods without noise.
    pub inv_epsilon: Vec<f64>,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_private_trials")]
    pub trials_private: usize,
    #[serde(default = "default_nonprivate_trials")]
    pub trials_nonprivate: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Also protect single auxiliary samples (vote and soft only).
    #[serde(default)]
    pub protect_aux: bool,
    /// Held-out fraction when the source has no separate test file.
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    /// Fill `runtime_ms`. Off by default so that output is reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    Synthetic(SyntheticSource),
    File(FileSource),
}

/// Gaussian classes; see [`SyntheticSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    /// Total samples, before the train/test split.
    pub samples: usize,
    pub dim: usize,
    /// 2 gives a binary `±1` task.
    #[serde(default = "two")]
    pub classes: usize,
    #[serde(default = "one")]
    pub separation: f64,
    #[serde(default = "one")]
    pub noise_scale: f64,
    #[serde(default = "one")]
    pub spectrum_decay: f64,
    #[serde(default)]
    pub label_noise: f64,
    /// Explicit class means; overrides `separation`.
    #[serde(default)]
    pub means: Option<Vec<Vec<f64>>>,
    /// Generator seed; derived from the master seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSource {
    pub path: PathBuf,
    /// Separate test file. When absent, `<stem>.test.<ext>` next to `path`
    /// is used if it exists, else a seeded split of `path`.
    #[serde(default)]
    pub test_path: Option<PathBuf>,
    pub format: FileFormat,
    #[serde(default)]
    pub header: bool,
    /// Sparse dimension; inferred from the largest index when absent.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Class count; inferred from labels when absent.
    #[serde(default)]
    pub classes: Option<usize>,
}

fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn default_aux_fraction() -> f64 {
    0.1
}
fn default_lambda() -> f64 {
    1e-4
}
fn default_test_fraction() -> f64 {
    0.3
}
fn default_private_trials() -> usize {
    100
}
fn default_nonprivate_trials() -> usize {
    10
}
fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

pub(crate) fn task_for(classes: usize) -> Task {
    if classes == 2 {
        Task::Binary
    } else {
        Task::Multiclass(classes)
    }
}

impl SyntheticSource {
    pub fn spec(&self, seed: u64) -> SyntheticSpec {
        let task = task_for(self.classes);
        let mut spec = SyntheticSpec::separated(self.dim, task, self.separation, seed);
        if let Some(means) = &self.means {
            spec.means = means.clone();
        }
        spec.noise_scale = self.noise_scale;
        spec.spectrum_decay = self.spectrum_decay;
        spec.label_noise = self.label_noise;
        spec
    }
}

/// Command-line overrides; `None` keeps the file's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub parties: Option<Vec<usize>>,
    pub inv_epsilon: Option<Vec<f64>>,
    pub methods: Option<Vec<Method>>,
    pub lambda: Option<f64>,
    pub trials_private: Option<usize>,
    pub trials_nonprivate: Option<usize>,
    pub master_seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub record_timing: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file. Relative data and output paths are resolved
    /// against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Source::File(f) = &mut config.source {
            resolve(&mut f.path);
            if let Some(t) = &mut f.test_path {
                resolve(t);
            }
        }
        if let Some(o) = &mut config.output {
            resolve(o);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(v) = &o.parties {
            self.parties = v.clone();
        }
        if let Some(v) = &o.inv_epsilon {
            self.inv_epsilon = v.clone();
        }
        if let Some(v) = &o.methods {
            self.methods = v.clone();
        }
        if let Some(v) = o.lambda {
            self.lambda = v;
        }
        if let Some(v) = o.trials_private {
            self.trials_private = v;
        }
        if let Some(v) = o.trials_nonprivate {
            self.trials_nonprivate = v;
        }
        if let Some(v) = o.master_seed {
            self.master_seed = v;
        }
        if let Some(v) = &o.output {
            self.output = Some(v.clone());
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = o.record_timing {
            self.record_timing = v;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, msg: &str| Err(Error::config(field, msg));
        if self.parties.is_empty() {
            return fail("parties", "must list at least one party count");
        }
        if self.parties.contains(&0) {
            return fail("parties", "party counts must be at least 1");
        }
        if self.inv_epsilon.is_empty() {
            return fail("inv_epsilon", "must list at least one value");
        }
        if self
            .inv_epsilon
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return fail("inv_epsilon", "values must be finite and non-negative");
        }
        if self.methods.is_empty() {
            return fail("methods", "must list at least one method");
        }
        if self.trials_private == 0 {
            return fail("trials_private", "must be at least 1");
        }
        if self.trials_nonprivate == 0 {
            return fail("trials_nonprivate", "must be at least 1");
        }
        if !(self.aux_fraction > 0.0 && self.aux_fraction < 1.0) {
            return fail("aux_fraction", "must lie in (0, 1)");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail("test_fraction", "must lie in (0, 1)");
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail("lambda", "must be positive");
        }
        if let LossSpec::SmoothedHinge { h } = self.loss {
            if !(h > 0.0 && h.is_finite()) {
                return fail("loss.h", "must be positive");
            }
        }
        if self.protect_aux && self.methods.contains(&Method::Avg) {
            return fail("protect_aux", "not supported together with method avg");
        }
        match &self.source {
            Source::Synthetic(s) => {
                if s.samples == 0 {
                    return fail("source.samples", "must be at least 1");
                }
                if s.dim == 0 {
                    return fail("source.dim", "must be at least 1");
                }
                if s.classes < 2 {
                    return fail("source.classes", "must be at least 2");
                }
                if !(s.noise_scale > 0.0 && s.noise_scale.is_finite()) {
                    return fail("source.noise_scale", "must be positive");
                }
                if !(s.spectrum_decay > 0.0 && s.spectrum_decay.is_finite()) {
                    return fail("source.spectrum_decay", "must be positive");
                }
                if !(0.0..=1.0).contains(&s.label_noise) {
                    return fail("source.label_noise", "must lie in [0, 1]");
                }
                if let Some(means) = &s.means {
                    if means.len() != s.classes || means.iter().any(|m| m.len() != s.dim) {
                        return fail("source.means", "need `classes` vectors of length `dim`");
                    }
                }
            }
            Source::File(f) => {
                if f.classes.is_some_and(|k| k < 2) {
                    return fail("source.classes", "must be at least 2");
                }
                if f.format == FileFormat::Csv && f.dim.is_some() {
                    return fail("source.dim", "only applies to sparse files");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
parties = [10]
inv_epsilon = [0, 1]

[source]
kind = "synthetic"
samples = 500
dim = 4
"#;

    #[test]
    fn defaults_apply() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.lambda, 1e-4);
        assert_eq!(c.aux_fraction, 0.1);
        assert_eq!(c.trials_private, 100);
        assert_eq!(c.trials_nonprivate, 10);
        assert_eq!(c.methods, Method::ALL.to_vec());
        assert!(c.add_bias);
        assert!(!c.record_timing);
        assert_eq!(c.loss, LossSpec::Logistic);
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    fn field_of(text: &str) -> String {
        match ExperimentConfig::from_toml(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn validation_names_fields() {
        assert_eq!(field_of(&MINIMAL.replace("[10]", "[]")), "parties");
        assert_eq!(field_of(&MINIMAL.replace("[0, 1]", "[-1]")), "inv_epsilon");
        assert_eq!(
            field_of(&format!("trials_private = 0\n{MINIMAL}")),
            "trials_private"
        );
        assert_eq!(
            field_of(&format!(
                "methods = [\"avg\"]\nprotect_aux = true\n{MINIMAL}"
            )),
            "protect_aux"
        );
        assert_eq!(
            field_of(&MINIMAL.replace("dim = 4", "dim = 0")),
            "source.dim"
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml(&format!("lambada = 1\n{MINIMAL}")).unwrap_err();
        assert!(err.to_string().contains("lambada"));
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("[10]", "[\"x\"]")).is_err());
    }

    #[test]
    fn overrides_replace_and_revalidate() {
        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.apply(&Overrides {
            trials_private: Some(3),
            methods: Some(vec![Method::Soft]),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.trials_private, 3);
        assert_eq!(c.methods, vec![Method::Soft]);
        assert!(c
            .apply(&Overrides {
                lambda: Some(0.0),
                ..Default::default()
            })
            .is_err());
    }

    #[test]
    fn loss_table() {
        let c = ExperimentConfig::from_toml(&format!(
            "loss = {{ kind = \"smoothed-hinge\", h = 0.5 }}\n{MINIMAL}"
        ))
        .unwrap();
        assert_eq!(c.loss, LossSpec::SmoothedHinge { h: 0.5 });
    }
}
