//! Linear models trained by single-pass SGD on perturbed per-user gradients.
//!
//! Users are shuffled and split into disjoint batches; each user contributes
//! exactly one gradient, clipped to `[-1, 1]^d` and perturbed with the full
//! budget. The update is `θ ← θ − η · mean(perturbed gradients)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::PrivacyBudget;
use crate::calibration::optimal_sigma;
use crate::data::Dataset;
use crate::error::{LdpError, Result};
use crate::numeric::{numeric_sensitivity, NumericMechanism, PreparedNumeric};
use crate::rng::RandomSource;

pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
pub const DEFAULT_BATCH_SIZE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Linear,
    Logistic,
    Svm,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Linear => "linear",
            Task::Logistic => "logistic",
            Task::Svm => "svm",
        }
    }

    pub fn is_classification(self) -> bool {
        self != Task::Linear
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "regression" => Ok(Task::Linear),
            "logistic" => Ok(Task::Logistic),
            "svm" | "hinge" => Ok(Task::Svm),
            _ => Err(LdpError::InvalidArgument(format!("unknown task '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub task: Task,
    /// Number of parameters, bias included.
    pub dims: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl ModelSpec {
    pub fn new(task: Task, dims: usize, learning_rate: f64, batch_size: usize) -> Result<Self> {
        if dims == 0 {
            return Err(LdpError::InvalidArgument("model needs at least one parameter".into()));
        }
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(LdpError::InvalidArgument(format!("learning rate must be positive, got {learning_rate}")));
        }
        if batch_size == 0 {
            return Err(LdpError::InvalidArgument("batch size must be at least 1".into()));
        }
        Ok(Self {
            task,
            dims,
            learning_rate,
            batch_size,
        })
    }

    pub fn with_defaults(task: Task, dims: usize) -> Self {
        Self::new(task, dims, DEFAULT_LEARNING_RATE, DEFAULT_BATCH_SIZE).expect("defaults are valid")
    }
}

/// Feature rows (bias column included) with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    dims: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl LabeledData {
    /// `features` is row-major without the bias; a trailing 1 is appended to every row.
    pub fn new(raw_dims: usize, features: &[f64], labels: Vec<f64>) -> Result<Self> {
        if raw_dims == 0 || features.len() != raw_dims * labels.len() {
            return Err(LdpError::DimensionMismatch {
                expected: raw_dims * labels.len(),
                actual: features.len(),
            });
        }
        let mut with_bias = Vec::with_capacity(labels.len() * (raw_dims + 1));
        for row in features.chunks_exact(raw_dims) {
            with_bias.extend_from_slice(row);
            with_bias.push(1.0);
        }
        Ok(Self {
            dims: raw_dims + 1,
            features: with_bias,
            labels,
        })
    }

    /// Uses every numeric column except `label` plus every categorical column
    /// (as `k − 1` indicators in `{−1, 1}`) as features. Classification
    /// labels are `1` above the label column's mean and `−1` otherwise.
    pub fn from_dataset(dataset: &Dataset, label: &str, task: Task) -> Result<Self> {
        let names = dataset.numeric_names();
        let label_col = names
            .iter()
            .position(|n| n == label)
            .ok_or_else(|| LdpError::InvalidArgument(format!("no numeric column named '{label}'")))?;
        let raw_labels: Vec<f64> = dataset.numeric_rows().map(|r| r[label_col]).collect();
        let labels = if task.is_classification() {
            let mean = raw_labels.iter().sum::<f64>() / raw_labels.len().max(1) as f64;
            raw_labels.iter().map(|&y| if y > mean { 1.0 } else { -1.0 }).collect()
        } else {
            raw_labels
        };
        let cat_width: usize = dataset
            .categorical_columns()
            .iter()
            .map(|c| c.domain_size as usize - 1)
            .sum();
        let raw_dims = names.len() - 1 + cat_width;
        let mut features = Vec::with_capacity(dataset.len() * raw_dims);
        for i in 0..dataset.len() {
            let row = dataset.numeric_row(i);
            features.extend(row.iter().enumerate().filter(|(j, _)| *j != label_col).map(|(_, &x)| x));
            for col in dataset.categorical_columns() {
                features.extend(one_hot_minus_one(col.values[i], col.domain_size));
            }
        }
        Self::new(raw_dims, &features, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Features per row, bias included.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        (&self.features[i * self.dims..(i + 1) * self.dims], self.labels[i])
    }

    /// First `n` rows and the rest.
    pub fn split_at(&self, n: usize) -> (LabeledData, LabeledData) {
        let n = n.min(self.len());
        let cut = n * self.dims;
        (
            LabeledData {
                dims: self.dims,
                features: self.features[..cut].to_vec(),
                labels: self.labels[..n].to_vec(),
            },
            LabeledData {
                dims: self.dims,
                features: self.features[cut..].to_vec(),
                labels: self.labels[n..].to_vec(),
            },
        )
    }
}

/// `k − 1` indicators in `{−1, 1}`; value 0 maps to all `−1`.
pub fn one_hot_minus_one(value: u32, k: u32) -> impl Iterator<Item = f64> {
    (1..k).map(move |j| if j == value { 1.0 } else { -1.0 })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(theta: &[f64], x: &[f64]) -> Result<()> {
    if theta.len() != x.len() {
        return Err(LdpError::DimensionMismatch {
            expected: theta.len(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// Per-sample loss: squared error / 2, logistic loss, hinge loss.
pub fn loss(task: Task, theta: &[f64], x: &[f64], y: f64) -> Result<f64> {
    check_dims(theta, x)?;
    let s = dot(theta, x);
    Ok(match task {
        Task::Linear => 0.5 * (s - y) * (s - y),
        Task::Logistic => (-y * s).exp().ln_1p(),
        Task::Svm => (1.0 - y * s).max(0.0),
    })
}

pub fn gradient(task: Task, theta: &[f64], x: &[f64], y: f64) -> Result<Vec<f64>> {
    check_dims(theta, x)?;
    let s = dot(theta, x);
    let scale = match task {
        Task::Linear => s - y,
        Task::Logistic => -y / (1.0 + (y * s).exp()),
        Task::Svm => {
            if y * s < 1.0 {
                -y
            } else {
                0.0
            }
        }
    };
    Ok(x.iter().map(|v| scale * v).collect())
}

pub fn clip_gradient(grad: &[f64]) -> Vec<f64> {
    grad.iter().map(|g| g.clamp(-1.0, 1.0)).collect()
}

/// Mean squared error (linear) or misclassification rate (classification).
pub fn evaluate(theta: &[f64], data: &LabeledData, task: Task) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let total: f64 = (0..data.len())
        .map(|i| {
            let (x, y) = data.row(i);
            let s = dot(theta, x);
            match task {
                Task::Linear => (s - y) * (s - y),
                _ => f64::from(u8::from((s >= 0.0) != (y > 0.0))),
            }
        })
        .sum();
    total / data.len() as f64
}

fn mean_loss(theta: &[f64], data: &LabeledData, task: Task) -> f64 {
    let total: f64 = (0..data.len())
        .map(|i| {
            let (x, y) = data.row(i);
            loss(task, theta, x, y).unwrap_or(f64::NAN)
        })
        .sum();
    total / data.len().max(1) as f64
}

/// How each user's clipped gradient is privatised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GradientMechanism {
    NonPrivate,
    Numeric(NumericMechanism),
    /// Gaussian noise with a fixed σ instead of the calibrated one.
    GaussianSigma(f64),
}

impl GradientMechanism {
    pub fn name(&self) -> String {
        match self {
            Self::NonPrivate => "non-private".to_string(),
            Self::Numeric(m) => m.name().to_string(),
            Self::GaussianSigma(s) => format!("gaussian(sigma={s})"),
        }
    }

    fn prepare(&self, dims: usize, budget: PrivacyBudget) -> Result<Option<PreparedNumeric>> {
        Ok(match self {
            Self::NonPrivate => None,
            Self::Numeric(m) => Some(m.prepare(dims, budget)?),
            Self::GaussianSigma(sigma) => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(LdpError::InvalidArgument(format!("sigma must be positive, got {sigma}")));
                }
                Some(PreparedNumeric::Gaussian { d: dims, sigma: *sigma })
            }
        })
    }
}

impl FromStr for GradientMechanism {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "non-private" | "nonprivate" => Ok(Self::NonPrivate),
            other => other.parse().map(Self::Numeric),
        }
    }
}

/// σ the Gaussian gradient mechanism uses for `dims` parameters.
pub fn gradient_gaussian_sigma(dims: usize, budget: PrivacyBudget) -> Result<f64> {
    Ok(optimal_sigma(budget, numeric_sensitivity(dims))?.sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationMetrics {
    pub iteration: usize,
    /// Mean training loss of the batch at the parameters it was computed at.
    pub loss: f64,
    /// Test metric after the update (NaN when no test set is given).
    pub test_metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingRun {
    pub spec: ModelSpec,
    pub mechanism: String,
    pub budget: PrivacyBudget,
    /// `θ₀` followed by the parameters after every iteration.
    pub thetas: Vec<Vec<f64>>,
    /// Users in the order they were consumed.
    pub users: Vec<usize>,
    pub metrics: Vec<IterationMetrics>,
}

impl TrainingRun {
    pub fn theta(&self) -> &[f64] {
        self.thetas.last().expect("θ₀ is always recorded")
    }

    pub fn iterations(&self) -> usize {
        self.thetas.len() - 1
    }

    /// `iteration,loss,test_metric` rows.
    pub fn write_metrics_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for m in &self.metrics {
            w.serialize(m)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One user's clipped (and optionally perturbed) gradient. The user's
/// randomness comes from `(seed, user)` only.
fn user_gradient(
    data: &LabeledData,
    task: Task,
    theta: &[f64],
    user: usize,
    mechanism: Option<&PreparedNumeric>,
    seed: u64,
) -> Vec<f64> {
    let (x, y) = data.row(user);
    let g = clip_gradient(&gradient(task, theta, x, y).expect("dimensions checked up front"));
    match mechanism {
        None => g,
        Some(m) => {
            let mut out = vec![0.0; g.len()];
            let mut rng = RandomSource::for_user(seed, user as u64);
            m.perturb_into(&g, &mut rng, &mut out);
            out
        }
    }
}

/// Mean of the (perturbed) gradients of `batch` at `theta`.
pub fn batch_gradient(
    data: &LabeledData,
    task: Task,
    theta: &[f64],
    batch: &[usize],
    mechanism: Option<&PreparedNumeric>,
    seed: u64,
) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    let grads: Vec<Vec<f64>> = batch
        .par_iter()
        .map(|&u| user_gradient(data, task, theta, u, mechanism, seed))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let grads: Vec<Vec<f64>> = batch
        .iter()
        .map(|&u| user_gradient(data, task, theta, u, mechanism, seed))
        .collect();
    // Summed in batch order so results do not depend on scheduling.
    let mut mean = vec![0.0; theta.len()];
    for g in grads {
        for (m, v) in mean.iter_mut().zip(g) {
            *m += v;
        }
    }
    let n = batch.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Trains from `θ₀ = 0` for `⌊N/|G|⌋` iterations over disjoint shuffled batches.
/// The batch order comes from `rng`; user-level noise comes from per-user
/// streams under `rng.seed()`.
pub fn private_sgd_train(
    data: &LabeledData,
    spec: &ModelSpec,
    mechanism: GradientMechanism,
    budget: PrivacyBudget,
    rng: &mut RandomSource,
    test: Option<&LabeledData>,
) -> Result<TrainingRun> {
    if data.dims() != spec.dims {
        return Err(LdpError::DimensionMismatch {
            expected: spec.dims,
            actual: data.dims(),
        });
    }
    if data.len() < spec.batch_size {
        return Err(LdpError::InsufficientUsers {
            needed: spec.batch_size,
            available: data.len(),
        });
    }
    let prepared = mechanism.prepare(spec.dims, budget)?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    rng.shuffle(&mut order);
    let iterations = data.len() / spec.batch_size;
    order.truncate(iterations * spec.batch_size);

    let mut theta = vec![0.0; spec.dims];
    let mut thetas = vec![theta.clone()];
    let mut metrics = Vec::with_capacity(iterations);
    for (t, batch) in order.chunks_exact(spec.batch_size).enumerate() {
        let batch_loss = batch
            .iter()
            .map(|&u| {
                let (x, y) = data.row(u);
                loss(spec.task, &theta, x, y).expect("dimensions checked")
            })
            .sum::<f64>()
            / batch.len() as f64;
        let g = batch_gradient(data, spec.task, &theta, batch, prepared.as_ref(), rng.seed());
        for (th, gj) in theta.iter_mut().zip(&g) {
            *th -= spec.learning_rate * gj;
        }
        thetas.push(theta.clone());
        metrics.push(IterationMetrics {
            iteration: t + 1,
            loss: batch_loss,
            test_metric: test.map_or(f64::NAN, |ts| evaluate(&theta, ts, spec.task)),
        });
    }
    Ok(TrainingRun {
        spec: *spec,
        mechanism: mechanism.name(),
        budget,
        thetas,
        users: order,
        metrics,
    })
}

/// Mean loss over a data set, for diagnostics.
pub fn dataset_loss(theta: &[f64], data: &LabeledData, task: Task) -> f64 {
    mean_loss(theta, data, task)
}

/// Synthetic regression data: features uniform on `[-1, 1]^d`, labels
/// `y = θ*·(x, 1)` with `θ*` uniform on `[-0.5, 0.5]^{d+1}`.
pub fn gen_linear_task(n: usize, d: usize, rng: &mut RandomSource) -> Result<(LabeledData, Vec<f64>)> {
    let theta: Vec<f64> = (0..=d).map(|_| rng.uniform() - 0.5).collect();
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let start = features.len();
        features.extend((0..d).map(|_| 2.0 * rng.uniform() - 1.0));
        let x = &features[start..];
        labels.push(dot(&theta[..d], x) + theta[d]);
    }
    Ok((LabeledData::new(d, &features, labels)?, theta))
}

/// Synthetic classification data: features uniform on `[-1, 1]^d`, label
/// `sign(θ*·(x, 1) + 0.1·z)` with `z` standard normal and `θ*` uniform on
/// `[-1, 1]^{d+1}`.
pub fn gen_logistic_task(n: usize, d: usize, rng: &mut RandomSource) -> Result<(LabeledData, Vec<f64>)> {
    let theta: Vec<f64> = (0..=d).map(|_| 2.0 * rng.uniform() - 1.0).collect();
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let start = features.len();
        features.extend((0..d).map(|_| 2.0 * rng.uniform() - 1.0));
        let s = dot(&theta[..d], &features[start..]) + theta[d] + 0.1 * rng.standard_normal();
        labels.push(if s > 0.0 { 1.0 } else { -1.0 });
    }
    Ok((LabeledData::new(d, &features, labels)?, theta))
}
