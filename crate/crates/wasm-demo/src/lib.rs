//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export returns flat `Float64Array`s so the page needs no glue
//! beyond what `wasm-bindgen` generates.

use wasm_bindgen::prelude::*;

use dp_ensemble::dataset::Task;
use dp_ensemble::harness::{self, ExperimentConfig};
use dp_ensemble::pipelines::Method;
use dp_ensemble::privacy::{self, Mechanism, NoiseSpec, SensitivitySpec};
use dp_ensemble::{seed, stats};

fn js_err(e: dp_ensemble::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Histogram of sampled noise norms `‖η‖` next to their analytic summary.
#[wasm_bindgen]
pub struct NoiseHistogram {
    edges: Vec<f64>,
    counts: Vec<f64>,
    mean: f64,
    analytic_mean: f64,
    tail_bound: f64,
}

#[wasm_bindgen]
impl NoiseHistogram {
    /// `bins + 1` bin edges.
    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn counts(&self) -> Vec<f64> {
        self.counts.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    #[wasm_bindgen(getter, js_name = analyticMean)]
    pub fn analytic_mean(&self) -> f64 {
        self.analytic_mean
    }

    /// Radius exceeded with probability at most 0.05.
    #[wasm_bindgen(getter, js_name = tailBound)]
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
}

#[wasm_bindgen(js_name = noiseHistogram)]
pub fn noise_histogram(
    dim: usize,
    beta: f64,
    draws: usize,
    bins: usize,
    seed: u64,
) -> Result<NoiseHistogram, JsError> {
    if draws == 0 || bins == 0 {
        return Err(JsError::new("draws and bins must be positive"));
    }
    let spec = NoiseSpec { beta, dim };
    let mut rng = seed::rng(seed);
    let norms = (0..draws)
        .map(|_| {
            privacy::sample_noise_with(&spec, &mut rng)
                .map(|eta| eta.iter().map(|v| v * v).sum::<f64>().sqrt())
        })
        .collect::<Result<Vec<f64>, _>>()
        .map_err(js_err)?;
    let tail_bound = privacy::gamma_tail_bound(dim, 1.0 / beta, 0.05).map_err(js_err)?;
    let top = norms.iter().cloned().fold(tail_bound, f64::max);
    let width = top / bins as f64;
    let mut counts = vec![0.0; bins];
    for r in &norms {
        counts[((r / width) as usize).min(bins - 1)] += 1.0;
    }
    Ok(NoiseHistogram {
        edges: (0..=bins).map(|i| i as f64 * width).collect(),
        counts,
        mean: stats::mean(&norms),
        analytic_mean: dim as f64 / beta,
        tail_bound,
    })
}

const MECHANISMS: [(Mechanism, &str); 4] = [
    (Mechanism::VoteErm, "vote"),
    (Mechanism::SoftErm, "soft"),
    (Mechanism::StandardErm, "standard ERM"),
    (Mechanism::ParamAvg, "parameter averaging"),
];

#[wasm_bindgen(js_name = mechanismNames)]
pub fn mechanism_names() -> Vec<String> {
    MECHANISMS.iter().map(|(_, n)| n.to_string()).collect()
}

/// For each mechanism in [`mechanism_names`] order: sensitivity, `β` and the
/// expected noise norm `d/β`. Unsupported combinations yield `NaN`.
#[wasm_bindgen(js_name = calibrationTable)]
pub fn calibration_table(
    lambda: f64,
    parties: usize,
    samples: usize,
    dim: usize,
    classes: usize,
    epsilon: f64,
    protect_aux: bool,
) -> Result<Vec<f64>, JsError> {
    let task = if classes <= 2 {
        Task::Binary
    } else {
        Task::Multiclass(classes)
    };
    let weights = if task.is_binary() { dim } else { dim * classes };
    let mut out = Vec::with_capacity(MECHANISMS.len() * 3);
    for (mechanism, _) in MECHANISMS {
        let spec = SensitivitySpec {
            samples,
            protect_aux,
            ..SensitivitySpec::new(mechanism, task, lambda, parties)
        };
        match privacy::sensitivity(&spec) {
            Ok(s) => {
                let beta = NoiseSpec::calibrated(epsilon, s, weights)
                    .map_err(js_err)?
                    .beta;
                out.extend([s, beta, weights as f64 / beta]);
            }
            Err(e) if e.kind() == dp_ensemble::ErrorKind::Config => {
                out.extend([f64::NAN; 3]);
            }
            Err(e) => return Err(js_err(e)),
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = methodNames)]
pub fn method_names() -> Vec<String> {
    Method::ALL.iter().map(|m| m.name().to_string()).collect()
}

/// Mean test accuracy of every method (in [`method_names`] order, one row
/// per method) at each `1/ε` in `inv_epsilon`, on a small synthetic task.
#[wasm_bindgen(js_name = accuracyCurve)]
pub fn accuracy_curve(
    parties: usize,
    inv_epsilon: Vec<f64>,
    separation: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let text = format!(
        r#"
parties = [{parties}]
inv_epsilon = {inv_epsilon:?}
lambda = 1e-3
aux_fraction = 0.2
trials_private = {trials}
trials_nonprivate = {nonprivate}
master_seed = {seed}

[source]
kind = "synthetic"
samples = 3000
dim = 5
separation = {separation:?}
"#,
        nonprivate = trials.clamp(1, 5),
    );
    let config = ExperimentConfig::from_toml(&text).map_err(js_err)?;
    let rows = harness::summarize(&harness::run_experiment(&config).map_err(js_err)?);
    let mut out = Vec::with_capacity(Method::ALL.len() * inv_epsilon.len());
    for method in Method::ALL {
        for &inv in &inv_epsilon {
            let row = rows
                .iter()
                .find(|r| r.method == method && r.inv_epsilon == inv + 0.0)
                .ok_or_else(|| JsError::new("missing summary cell"))?;
            out.push(row.mean_accuracy);
        }
    }
    Ok(out)
}
