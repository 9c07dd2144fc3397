use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand_distr::{Distribution, Gamma};

use dp_ensemble::harness::{self, ExperimentConfig, Overrides};
use dp_ensemble::pipelines::{self, BoundParams, Method};
use dp_ensemble::privacy::{self, NoiseSpec};
use dp_ensemble::{seed, stats, Error, ErrorKind};

/// Differentially private global classifiers from ensembles of local
/// classifiers.
///
/// Exit status: 0 on success, 1 on configuration or usage errors, 2 on data
/// (and numerical) errors.
#[derive(Parser)]
#[command(name = "dp-ensemble", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write per-trial records as CSV.
    Run(RunArgs),
    /// Aggregate a records CSV into per-cell mean and standard deviation.
    Summarize {
        input: PathBuf,
        /// Summary CSV; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the three terms of the excess-risk bound.
    Bound(BoundArgs),
    /// Compare sampled noise norms with their analytic distribution.
    NoiseCheck(NoiseArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    config: PathBuf,
    /// Records CSV; overrides the config. Stdout when neither is set.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a summary CSV here.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    parties: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    inv_epsilon: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    trials_private: Option<usize>,
    #[arg(long)]
    trials_nonprivate: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Record wall-clock runtime per trial.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    dim: usize,
    /// Lipschitz constant of the loss derivative.
    #[arg(long, default_value_t = 0.25)]
    c: f64,
    #[arg(long, default_value_t = 1e-4)]
    lambda: f64,
    #[arg(long)]
    parties: usize,
    #[arg(long)]
    epsilon: f64,
    /// Auxiliary sample count.
    #[arg(long)]
    samples: usize,
    #[arg(long, default_value_t = 0.05)]
    delta_p: f64,
    #[arg(long, default_value_t = 0.05)]
    delta_s: f64,
    /// Norm of the reference hypothesis.
    #[arg(long, default_value_t = 1.0)]
    w0_norm: f64,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn io_error(path: &std::path::Path, source: io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    let mut config = ExperimentConfig::load(&args.config)?;
    let methods = args
        .methods
        .map(|ms| {
            ms.iter()
                .map(|m| m.parse::<Method>())
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    config.apply(&Overrides {
        parties: args.parties,
        inv_epsilon: args.inv_epsilon,
        methods,
        lambda: args.lambda,
        trials_private: args.trials_private,
        trials_nonprivate: args.trials_nonprivate,
        master_seed: args.seed,
        output: args.output,
        workers: args.workers,
        record_timing: args.timing.then_some(true),
    })?;
    let to_stdout = config.output.is_none();
    let records = harness::run_experiment(&config)?;
    if to_stdout {
        harness::write_records(&records, io::stdout().lock())?;
    } else if let Some(path) = &config.output {
        eprintln!("wrote {} records to {}", records.len(), path.display());
    }
    if let Some(path) = args.summary {
        let file = File::create(&path).map_err(|e| io_error(&path, e))?;
        harness::write_summary(&harness::summarize(&records), BufWriter::new(file))?;
    }
    Ok(())
}

fn summarize(input: PathBuf, output: Option<PathBuf>) -> Result<(), Error> {
    let file = File::open(&input).map_err(|e| io_error(&input, e))?;
    let records = harness::read_records(BufReader::new(file))?;
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rows = harness::summarize(&records);
    match output {
        Some(path) => {
            let file = File::create(&path).map_err(|e| io_error(&path, e))?;
            harness::write_summary(&rows, BufWriter::new(file))
        }
        None => harness::write_summary(&rows, io::stdout().lock()),
    }
}

fn bound(a: BoundArgs) -> Result<(), Error> {
    let terms = pipelines::excess_risk_bound(&BoundParams {
        dim: a.dim,
        c: a.c,
        lambda: a.lambda,
        parties: a.parties,
        epsilon: a.epsilon,
        samples: a.samples,
        delta_p: a.delta_p,
        delta_s: a.delta_s,
        reference_norm: a.w0_norm,
    })?;
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "noise_term {:e}", terms.noise);
    let _ = writeln!(out, "sample_term {:e}", terms.sample);
    let _ = writeln!(out, "reg_term {:e}", terms.regularization);
    let _ = writeln!(out, "total {:e}", terms.total());
    Ok(())
}

fn noise_check(a: NoiseArgs) -> Result<(), Error> {
    if a.dim == 0 || a.draws < 2 {
        return Err(Error::Config {
            field: "dim/draws".into(),
            message: "need dim >= 1 and draws >= 2".into(),
        });
    }
    if !(a.beta > 0.0 && a.beta.is_finite()) {
        return Err(Error::Config {
            field: "beta".into(),
            message: "must be positive and finite".into(),
        });
    }
    let spec = NoiseSpec {
        beta: a.beta,
        dim: a.dim,
    };
    let mut rng = seed::rng(seed::derive(a.seed, &[seed::tag("noise")]));
    let norms: Vec<f64> = (0..a.draws)
        .map(|_| {
            privacy::sample_noise_with(&spec, &mut rng)
                .map(|eta| eta.iter().map(|v| v * v).sum::<f64>().sqrt())
        })
        .collect::<Result<_, _>>()?;
    let gamma = Gamma::new(a.dim as f64, 1.0 / a.beta).expect("valid gamma parameters");
    let mut rng = seed::rng(seed::derive(a.seed, &[seed::tag("reference")]));
    let reference: Vec<f64> = (0..a.draws).map(|_| gamma.sample(&mut rng)).collect();

    let mean = stats::mean(&norms);
    let expected = a.dim as f64 / a.beta;
    let ks = stats::ks_two_sample(&norms, &reference);
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "draws {}", a.draws);
    let _ = writeln!(out, "mean_norm {mean:.6e}");
    let _ = writeln!(out, "analytic_mean {expected:.6e}");
    let _ = writeln!(
        out,
        "relative_error {:.4e}",
        (mean - expected).abs() / expected
    );
    let _ = writeln!(out, "sd_norm {:.6e}", stats::std_dev(&norms));
    let _ = writeln!(out, "analytic_sd {:.6e}", (a.dim as f64).sqrt() / a.beta);
    let _ = writeln!(out, "ks_statistic {:.6e}", ks.statistic);
    let _ = writeln!(out, "ks_p_value {:.4}", ks.p_value);
    Ok(())
}

/// Parses `args` and runs the command, returning the exit status.
fn execute<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return u8::from(e.use_stderr());
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Summarize { input, output } => summarize(input, output),
        Command::Bound(args) => bound(args),
        Command::NoiseCheck(args) => noise_check(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Config => 1,
                ErrorKind::Data | ErrorKind::Numerical => 2,
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(execute(std::env::args_os()))
}
