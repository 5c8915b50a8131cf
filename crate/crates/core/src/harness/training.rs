//! Grids of private SGD runs on synthetic tasks.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::validate_budget;
use crate::error::{LdpError, Result};
use crate::rng::{derive_seed, RandomSource};
use crate::sgd::{
    dataset_loss, gen_linear_task, gen_logistic_task, private_sgd_train, GradientMechanism, LabeledData,
    ModelSpec, Task,
};

const TRAIN_LABEL: u64 = 0x7a1e;

/// Configuration of a training grid; written to the manifest as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub task: Task,
    /// Feature count before the bias is appended.
    pub features: usize,
    /// Training users.
    pub n: usize,
    /// Held-out users for the test metric.
    pub test_n: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub mechanisms: Vec<String>,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdRecord {
    pub task: String,
    pub mechanism: String,
    pub epsilon: f64,
    pub delta: f64,
    pub n: usize,
    pub rep: usize,
    pub iterations: usize,
    /// Test MSE (linear) or misclassification rate.
    pub test_metric: f64,
    pub train_loss: f64,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() || self.epsilons.is_empty() || self.deltas.is_empty() {
            return Err(LdpError::InvalidArgument("empty mechanism or budget grid".into()));
        }
        if self.reps == 0 || self.features == 0 || self.test_n == 0 {
            return Err(LdpError::InvalidArgument("reps, features and test size must be positive".into()));
        }
        ModelSpec::new(self.task, self.features + 1, self.learning_rate, self.batch_size)?;
        Ok(())
    }

    /// Train and test sets of one repetition: one draw of `n + test_n` users
    /// split at `n`.
    pub fn task_data(&self, rep: usize) -> Result<(LabeledData, LabeledData)> {
        let mut rng = RandomSource::new(derive_seed(derive_seed(self.seed, rep as u64), 0xda7a));
        let total = self.n + self.test_n;
        let (data, _) = match self.task {
            Task::Linear => gen_linear_task(total, self.features, &mut rng)?,
            Task::Logistic | Task::Svm => gen_logistic_task(total, self.features, &mut rng)?,
        };
        Ok(data.split_at(self.n))
    }
}

/// Trains every (mechanism, ε, δ, repetition). All mechanisms in one
/// repetition see the same data, batch order and per-user streams.
pub fn run_sgd_experiment(config: &SgdConfig) -> Result<Vec<SgdRecord>> {
    config.validate()?;
    let mechanisms = config
        .mechanisms
        .iter()
        .map(|m| m.parse::<GradientMechanism>())
        .collect::<Result<Vec<_>>>()?;
    let spec = ModelSpec::new(config.task, config.features + 1, config.learning_rate, config.batch_size)?;
    let mut records = Vec::new();
    for rep in 0..config.reps {
        let (train, test) = config.task_data(rep)?;
        let train_seed = derive_seed(derive_seed(config.seed, rep as u64), TRAIN_LABEL);
        let cells: Vec<(GradientMechanism, f64, f64)> = mechanisms
            .iter()
            .flat_map(|&m| {
                config
                    .epsilons
                    .iter()
                    .flat_map(move |&e| config.deltas.iter().map(move |&d| (m, e, d)))
            })
            .collect();
        let job = |&(mechanism, eps, delta): &(GradientMechanism, f64, f64)| -> Result<SgdRecord> {
            let budget = validate_budget(eps, delta)?;
            let run = private_sgd_train(&train, &spec, mechanism, budget, &mut RandomSource::new(train_seed), None)?;
            Ok(SgdRecord {
                task: config.task.name().to_string(),
                mechanism: mechanism.name(),
                epsilon: eps,
                delta,
                n: config.n,
                rep,
                iterations: run.iterations(),
                test_metric: crate::sgd::evaluate(run.theta(), &test, config.task),
                train_loss: dataset_loss(run.theta(), &train, config.task),
            })
        };
        #[cfg(feature = "parallel")]
        let results: Vec<Result<SgdRecord>> = cells.par_iter().map(job).collect();
        #[cfg(not(feature = "parallel"))]
        let results: Vec<Result<SgdRecord>> = cells.iter().map(job).collect();
        for r in results {
            records.push(r?);
        }
    }
    records.sort_by(|a, b| {
        a.mechanism
            .cmp(&b.mechanism)
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.delta.total_cmp(&b.delta))
            .then(a.rep.cmp(&b.rep))
    });
    Ok(records)
}
