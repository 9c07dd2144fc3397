//! Experiment sweeps: configuration, execution and CSV records.
//!
//! For each party count `M` the training split is partitioned once per
//! non-private trial. Local models, the ensemble and every method's
//! unperturbed minimizer are fit once per partition; private trial `t` then
//! uses partition `t mod trials_nonprivate` and redraws only the noise.

mod config;
mod records;

use std::path::{Path, PathBuf};
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub use config::{ExperimentConfig, FileFormat, FileSource, Overrides, Source, SyntheticSource};
pub use records::{
    read_records, records_to_string, sort_canonical, summarize, write_records, write_summary,
    ResultRecord, SummaryRow, COLUMNS, SUMMARY_COLUMNS,
};

use crate::dataset::{self, normalize, Dataset, Partition, PartitionPlan};
use crate::ensemble::{ClassifierHandle, Constant, Ensemble};
use crate::linear::LinearModel;
use crate::pipelines::{self, Fit, Method, MethodSpec};
use crate::{seed, Error, Result};

/// Train and test data after bias and normalization.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    /// Divisor applied to both splits.
    pub scale: f64,
}

fn companion_test_path(path: &Path) -> Option<PathBuf> {
    let stem = path.file_stem()?.to_str()?;
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.test.{ext}"),
        None => format!("{stem}.test"),
    };
    let candidate = path.with_file_name(name);
    candidate.exists().then_some(candidate)
}

/// Loads or synthesizes the data, splits off the test set, appends the bias
/// feature and normalizes with the training scale.
pub fn prepare_data(config: &ExperimentConfig) -> Result<PreparedData> {
    let split_seed = seed::derive(config.master_seed, &[seed::tag("split")]);
    let (train, test) = match &config.source {
        Source::Synthetic(s) => {
            let data_seed = s
                .seed
                .unwrap_or_else(|| seed::derive(config.master_seed, &[seed::tag("data")]));
            let all = dataset::synthesize(&s.spec(data_seed), s.samples)?;
            dataset::train_test_split(&all, config.test_fraction, split_seed)?
        }
        Source::File(f) => {
            let task = f.classes.map(config::task_for);
            let format = match f.format {
                FileFormat::Csv => dataset::Format::Csv { header: f.header },
                FileFormat::Sparse => dataset::Format::Sparse { dim: f.dim },
            };
            let all = dataset::load(&f.path, format, task)?;
            let test_path = f.test_path.clone().or_else(|| companion_test_path(&f.path));
            match test_path {
                Some(p) => {
                    let format = match format {
                        dataset::Format::Sparse { .. } => dataset::Format::Sparse {
                            dim: Some(all.dim()),
                        },
                        csv => csv,
                    };
                    let test = dataset::load(&p, format, Some(all.task()))?;
                    if test.dim() != all.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: all.dim(),
                            found: test.dim(),
                        });
                    }
                    (all, test)
                }
                None => dataset::train_test_split(&all, config.test_fraction, split_seed)?,
            }
        }
    };
    let (train, test) = if config.add_bias {
        (train.with_bias(), test.with_bias())
    } else {
        (train, test)
    };
    let (train, scale) = normalize(&train)?;
    let test = test.rescale(scale);
    Ok(PreparedData { train, test, scale })
}

fn partition_seed(config: &ExperimentConfig, parties: usize, replica: usize) -> u64 {
    seed::derive(
        config.master_seed,
        &[seed::tag("partition"), parties as u64, replica as u64],
    )
}

/// Noise seed of one private trial.
pub fn trial_seed(
    master: u64,
    method: Method,
    parties: usize,
    epsilon_index: usize,
    trial: usize,
) -> u64 {
    seed::derive(
        master,
        &[
            seed::tag(method.name()),
            parties as u64,
            epsilon_index as u64,
            trial as u64,
        ],
    )
}

/// The partition used for `M = parties` and non-private trial `replica`.
pub fn partition_for(
    config: &ExperimentConfig,
    data: &PreparedData,
    parties: usize,
    replica: usize,
) -> Result<Partition> {
    dataset::partition(
        &data.train,
        &PartitionPlan {
            parties,
            aux_fraction: config.aux_fraction,
            seed: partition_seed(config, parties, replica),
        },
    )
}

fn epsilon_of(inv_epsilon: f64) -> f64 {
    if inv_epsilon == 0.0 {
        f64::INFINITY
    } else {
        1.0 / inv_epsilon
    }
}

/// `None` unless timing is recorded.
fn clock(config: &ExperimentConfig) -> Option<Instant> {
    config.record_timing.then(Instant::now)
}

fn elapsed_ms(start: Option<Instant>) -> u64 {
    start.map_or(0, |t| t.elapsed().as_millis() as u64)
}

struct Unit<'a> {
    config: &'a ExperimentConfig,
    data: &'a PreparedData,
    parties: usize,
    replica: usize,
}

impl Unit<'_> {
    fn spec(&self, method: Method) -> MethodSpec {
        MethodSpec {
            method,
            epsilon: f64::INFINITY,
            lambda: self.config.lambda,
            loss: self.config.loss,
            protect_aux: self.config.protect_aux,
            seed: 0,
        }
    }

    fn private_trials(&self) -> impl Iterator<Item = usize> {
        (self.replica..self.config.trials_private).step_by(self.config.trials_nonprivate)
    }

    fn run(&self) -> Result<Vec<ResultRecord>> {
        let config = self.config;
        let part_seed = partition_seed(config, self.parties, self.replica);
        let start = clock(config);
        let part = partition_for(config, self.data, self.parties, self.replica)?;
        let fitted = pipelines::fit_locals(&part.shards, config.lambda, &config.loss)?;
        let local_iters: usize = fitted.iter().map(|(_, i)| i).sum();
        let locals: Vec<LinearModel> = fitted.into_iter().map(|(m, _)| m).collect();
        let ensemble = local_ensemble(&part.shards, &locals)?;
        let setup_ms = elapsed_ms(start);

        let mut methods = config.methods.clone();
        methods.sort();
        methods.dedup();
        let mut out = Vec::new();
        for method in methods {
            let start = clock(config);
            let baseline = |accuracy: f64, iters: usize, ms: u64| {
                config
                    .inv_epsilon
                    .iter()
                    .map(|&inv| ResultRecord {
                        method,
                        parties: self.parties,
                        inv_epsilon: inv + 0.0,
                        trial: self.replica,
                        accuracy,
                        noise_norm: 0.0,
                        beta: f64::INFINITY,
                        solver_iters: iters,
                        runtime_ms: ms,
                        seed: part_seed,
                    })
                    .collect::<Vec<_>>()
            };
            match method {
                Method::Batch => {
                    let union = Dataset::concat(&part.shards)?;
                    let fit = pipelines::fit_batch(&union, &self.spec(method))?;
                    let acc = pipelines::evaluate(fit.model(), &self.data.test)?;
                    out.extend(baseline(acc, fit.solver_iters(), elapsed_ms(start)));
                }
                Method::Indiv => {
                    let acc = pipelines::indiv_accuracy(&ensemble, &self.data.test)?;
                    out.extend(baseline(acc, local_iters, setup_ms + elapsed_ms(start)));
                }
                Method::Vote | Method::Soft | Method::Avg => {
                    if self.private_trials().next().is_none() {
                        continue;
                    }
                    let spec = self.spec(method);
                    let fit = match method {
                        Method::Vote => pipelines::fit_vote(&ensemble, &part.aux, &spec)?,
                        Method::Soft => pipelines::fit_soft(&ensemble, &part.aux, &spec)?,
                        _ => pipelines::fit_avg_models(&part.shards, &locals, &spec)?
                            .with_solver_iters(local_iters),
                    };
                    let fit_ms = elapsed_ms(start);
                    out.extend(self.private_records(method, &fit, fit_ms)?);
                }
            }
        }
        Ok(out)
    }

    fn private_records(&self, method: Method, fit: &Fit, fit_ms: u64) -> Result<Vec<ResultRecord>> {
        let config = self.config;
        let mut out = Vec::new();
        for (e_idx, &inv) in config.inv_epsilon.iter().enumerate() {
            let epsilon = epsilon_of(inv);
            for trial in self.private_trials() {
                let start = clock(config);
                let s = trial_seed(config.master_seed, method, self.parties, e_idx, trial);
                let release = fit.release(epsilon, s)?;
                let accuracy = pipelines::evaluate(&release.model, &self.data.test)?;
                out.push(ResultRecord {
                    method,
                    parties: self.parties,
                    inv_epsilon: inv + 0.0,
                    trial,
                    accuracy,
                    noise_norm: release.diagnostics.noise_norm,
                    beta: release.diagnostics.beta,
                    solver_iters: release.diagnostics.solver_iters,
                    runtime_ms: fit_ms + elapsed_ms(start),
                    seed: s,
                });
            }
        }
        Ok(out)
    }
}

/// Shards holding one class get a constant voter, others their linear model.
fn local_ensemble(shards: &[Dataset], locals: &[LinearModel]) -> Result<Ensemble> {
    let handles = shards
        .iter()
        .zip(locals)
        .enumerate()
        .map(|(party, (shard, model))| {
            let first = shard.samples()[0].y.expect("shards are labeled");
            if shard.labels().all(|y| y == first) {
                ClassifierHandle::new(party, Constant(first))
            } else {
                ClassifierHandle::new(party, model.clone())
            }
        })
        .collect();
    Ensemble::new(handles, shards[0].dim(), shards[0].task())
}

/// Runs the whole sweep on already prepared data. Records come back in
/// canonical order regardless of scheduling.
pub fn run_prepared(config: &ExperimentConfig, data: &PreparedData) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let mut parties = config.parties.clone();
    parties.sort_unstable();
    parties.dedup();
    let units: Vec<Unit> = parties
        .iter()
        .flat_map(|&m| {
            (0..config.trials_nonprivate).map(move |replica| Unit {
                config,
                data,
                parties: m,
                replica,
            })
        })
        .collect();

    #[cfg(feature = "parallel")]
    let batches: Vec<Vec<ResultRecord>> = {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?;
        pool.install(|| units.par_iter().map(Unit::run).collect::<Result<_>>())?
    };
    #[cfg(not(feature = "parallel"))]
    let batches: Vec<Vec<ResultRecord>> = units.iter().map(Unit::run).collect::<Result<_>>()?;

    let mut records: Vec<ResultRecord> = batches.into_iter().flatten().collect();
    sort_canonical(&mut records);
    Ok(records)
}

/// Prepares the data, runs the sweep and writes the CSV to
/// `config.output` when set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let data = prepare_data(config)?;
    let records = run_prepared(config, &data)?;
    if let Some(path) = &config.output {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        write_records(&records, std::io::BufWriter::new(file))?;
    }
    Ok(records)
}
