//! Benchmark grids, variance tables, training and audits.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use ldpkit::harness::{
    emit_variance_table, run_freq_experiment, run_mean_experiment, run_privacy_audit, run_sgd_experiment,
    write_csv, write_with_manifest, AuditTarget, ExperimentConfig, ExperimentTask, SgdConfig, SgdRecord,
    DEFAULT_CATEGORICAL_USERS, DEFAULT_NUMERIC_USERS, DEFAULT_ZIPF_EXPONENT,
};
use ldpkit::numeric::{set_sizes, NumericMechanism, TieRule};
use ldpkit::rng::derive_seed;
use ldpkit::sgd::{
    dataset_loss, evaluate, private_sgd_train, GradientMechanism, LabeledData, ModelSpec, Task,
    DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE,
};
use ldpkit::{validate_budget, RandomSource};

use crate::reports::load_dataset;
use crate::GlobalArgs;

const DEFAULT_REPS: usize = 10;

/// Writes `rows` to `--out` with a manifest, or to stdout.
pub fn emit<T: Serialize, C: Serialize>(g: &GlobalArgs, rows: &[T], manifest: &C) -> Result<()> {
    match &g.out {
        Some(path) => {
            write_with_manifest(rows, manifest, path).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_csv(rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn experiment_config(g: &GlobalArgs, task: ExperimentTask) -> ExperimentConfig {
    let (mechanisms, eps, sizes, n): (&[&str], &[f64], Vec<u32>, usize) = match task {
        ExperimentTask::Mean => (
            &["mech1", "mech2", "opt-gm"],
            &[0.5, 1.0, 2.0, 4.0],
            or(&g.dims, &[1, 5, 10]),
            DEFAULT_NUMERIC_USERS,
        ),
        _ => (
            &["grr", "sprr", "olh", "opt-gm"],
            &[0.5, 1.0, 2.0, 5.0],
            or(&g.domain, &[8, 32, 128]),
            DEFAULT_CATEGORICAL_USERS,
        ),
    };
    ExperimentConfig {
        task,
        mechanisms: g.mechanisms_or(mechanisms),
        epsilons: g.eps_or(eps),
        deltas: g.delta_or(&[1e-6]),
        sizes,
        n: g.n_or(n),
        reps: g.reps_or(DEFAULT_REPS),
        seed: g.seed,
        zipf_exponent: DEFAULT_ZIPF_EXPONENT,
        output: g.out.clone(),
    }
}

fn or(given: &[u32], default: &[u32]) -> Vec<u32> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

pub fn bench_mean(g: &GlobalArgs) -> Result<()> {
    let config = experiment_config(g, ExperimentTask::Mean);
    let records = run_mean_experiment(&config)?;
    emit(g, &records, &config)
}

#[derive(Args, Debug)]
pub struct FreqArgs {
    /// Zipf exponent of the synthetic values.
    #[arg(long, default_value_t = DEFAULT_ZIPF_EXPONENT)]
    zipf: f64,
}

pub fn bench_freq(g: &GlobalArgs, a: &FreqArgs) -> Result<()> {
    let mut config = experiment_config(g, ExperimentTask::Freq);
    config.zipf_exponent = a.zipf;
    let records = run_freq_experiment(&config)?;
    emit(g, &records, &config)
}

#[derive(Serialize)]
struct TableManifest<'a> {
    task: ExperimentTask,
    epsilons: &'a [f64],
    deltas: &'a [f64],
    dims: &'a [u32],
    domains: &'a [u32],
}

pub fn variance_table(g: &GlobalArgs) -> Result<()> {
    let mut default_eps = vec![0.1];
    default_eps.extend((1..=20).map(|i| f64::from(i) * 0.5));
    let eps = g.eps_or(&default_eps);
    let deltas = g.delta_or(&[0.0, 1e-6, 1e-4]);
    let dims = or(&g.dims, &[1, 5, 10]);
    let domains = or(&g.domain, &[2, 8, 32, 128]);
    let rows = emit_variance_table(&eps, &deltas, &dims, &domains)?;
    let manifest = TableManifest {
        task: ExperimentTask::VarianceTable,
        epsilons: &eps,
        deltas: &deltas,
        dims: &dims,
        domains: &domains,
    };
    emit(g, &rows, &manifest)
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// linear, logistic or svm.
    #[arg(long, default_value = "linear")]
    task: String,
    /// Feature count of the synthetic task (bias excluded).
    #[arg(long, default_value_t = 5)]
    features: usize,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    batch: usize,
    #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
    learning_rate: f64,
    /// Train on a CSV dataset instead of synthetic data.
    #[arg(long)]
    input: Option<std::path::PathBuf>,
    /// Label column of `--input`.
    #[arg(long)]
    label: Option<String>,
    /// JSON schema of `--input`; otherwise `--categorical` names the
    /// categorical columns and the rest are numeric.
    #[arg(long)]
    schema: Option<std::path::PathBuf>,
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
    /// Write per-iteration metrics of every run to this directory.
    #[arg(long)]
    metrics_dir: Option<std::path::PathBuf>,
}

/// Warns when `δ` rules out the sign-vector mechanism at `dims` parameters.
fn warn_delta(mechanisms: &[String], dims: usize, deltas: &[f64]) {
    for m in mechanisms {
        let rule = match m.parse::<NumericMechanism>() {
            Ok(NumericMechanism::Mech1) => TieRule::Strict,
            Ok(NumericMechanism::Mech1Inclusive) => TieRule::Inclusive,
            _ => continue,
        };
        if let Ok((plus, _)) = set_sizes(dims, rule) {
            let max = 1.0 / plus as f64;
            if deltas.iter().any(|&d| d >= max) {
                eprintln!("warning: {m} with {dims} parameters needs delta < {max:e}");
            }
        }
    }
}

pub fn train(g: &GlobalArgs, a: &TrainArgs) -> Result<()> {
    let task: Task = a.task.parse()?;
    let mut config = SgdConfig {
        task,
        features: a.features,
        n: g.n_or(200_000),
        test_n: 0,
        learning_rate: a.learning_rate,
        batch_size: a.batch,
        mechanisms: g.mechanisms_or(&["non-private", "mech1", "mech2", "opt-gm"]),
        epsilons: g.eps_or(&[1.0, 5.0, 10.0]),
        deltas: g.delta_or(&[1e-6]),
        reps: g.reps_or(DEFAULT_REPS),
        seed: g.seed,
    };
    config.test_n = (config.n / 10).max(1);

    let records = match &a.input {
        None => {
            warn_delta(&config.mechanisms, config.features + 1, &config.deltas);
            if let Some(dir) = &a.metrics_dir {
                write_iteration_metrics(&config, dir)?;
            }
            run_sgd_experiment(&config)?
        }
        Some(path) => {
            let label = a.label.as_deref().context("--label is required with --input")?;
            let dataset = load_dataset(path, a.schema.as_deref(), &a.categorical)?;
            let data = LabeledData::from_dataset(&dataset, label, task)?;
            config.features = data.dims() - 1;
            warn_delta(&config.mechanisms, data.dims(), &config.deltas);
            train_on(&config, &data)?
        }
    };
    emit(g, &records, &config)
}

/// Grid over a fixed dataset: the last tenth is held out for testing.
fn train_on(config: &SgdConfig, data: &LabeledData) -> Result<Vec<SgdRecord>> {
    let n_test = (data.len() / 10).max(1);
    if data.len() <= n_test {
        bail!("dataset has too few rows to train");
    }
    let (train, test) = data.split_at(data.len() - n_test);
    let spec = ModelSpec::new(config.task, data.dims(), config.learning_rate, config.batch_size)?;
    let mut out = Vec::new();
    for m in &config.mechanisms {
        let mechanism: GradientMechanism = m.parse()?;
        for &eps in &config.epsilons {
            for &delta in &config.deltas {
                for rep in 0..config.reps {
                    let mut rng = RandomSource::new(derive_seed(config.seed, rep as u64));
                    let run = private_sgd_train(&train, &spec, mechanism, validate_budget(eps, delta)?, &mut rng, None)?;
                    out.push(SgdRecord {
                        task: config.task.name().to_string(),
                        mechanism: mechanism.name(),
                        epsilon: eps,
                        delta,
                        n: train.len(),
                        rep,
                        iterations: run.iterations(),
                        test_metric: evaluate(run.theta(), &test, config.task),
                        train_loss: dataset_loss(run.theta(), &train, config.task),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// One `iteration,loss,test_metric` CSV per (mechanism, ε, δ) of the first
/// repetition.
fn write_iteration_metrics(config: &SgdConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let (train, test) = config.task_data(0)?;
    let spec = ModelSpec::new(config.task, config.features + 1, config.learning_rate, config.batch_size)?;
    for m in &config.mechanisms {
        let mechanism: GradientMechanism = m.parse()?;
        for &eps in &config.epsilons {
            for &delta in &config.deltas {
                let mut rng = RandomSource::new(derive_seed(config.seed, 0));
                let run = private_sgd_train(&train, &spec, mechanism, validate_budget(eps, delta)?, &mut rng, Some(&test))?;
                let path = dir.join(format!("{}_eps{eps}_delta{delta}.csv", mechanism.name()));
                run.write_metrics_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct AuditManifest<'a> {
    task: ExperimentTask,
    mechanisms: &'a [String],
    epsilons: &'a [f64],
    deltas: &'a [f64],
    sizes: &'a [u32],
}

pub fn audit(g: &GlobalArgs) -> Result<()> {
    let categorical = !g.protocol.is_empty();
    let mechanisms = if categorical {
        g.protocol.clone()
    } else {
        g.mechanisms_or(&["onedim", "mech1", "mech1-inclusive", "mech2", "duchi", "duchi-fixed", "duchi-inclusive"])
    };
    let sizes = if categorical { or(&g.domain, &[2, 4, 8]) } else { or(&g.dims, &[1, 2, 3]) };
    let eps = g.eps_or(&[0.5, 1.0, 4.0]);
    let deltas = g.delta_or(&[0.0, 1e-4, 0.05]);
    let mut rows = Vec::new();
    for name in &mechanisms {
        for &size in &sizes {
            let target = if categorical {
                AuditTarget::Categorical { protocol: name.parse()?, k: size }
            } else {
                let mechanism: NumericMechanism = name.parse()?;
                if mechanism == NumericMechanism::OneDim && size != 1 {
                    continue;
                }
                AuditTarget::Numeric { mechanism, d: size as usize }
            };
            for &e in &eps {
                for &d in &deltas {
                    let report = run_privacy_audit(target, validate_budget(e, d)?)?;
                    if !report.passes {
                        eprintln!(
                            "FAIL {} eps={e} delta={d}: gap {:e}, ratio {}",
                            report.target, report.max_gap, report.max_ratio
                        );
                    }
                    rows.push(report);
                }
            }
        }
    }
    let manifest = AuditManifest {
        task: ExperimentTask::PrivacyAudit,
        mechanisms: &mechanisms,
        epsilons: &eps,
        deltas: &deltas,
        sizes: &sizes,
    };
    emit(g, &rows, &manifest)
}
