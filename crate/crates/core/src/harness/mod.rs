//! Experiment orchestration: synthetic data, MSE benchmarks, exhaustive
//! privacy audits and analytic variance tables.
//!
//! Every grid point is a pure function of the config seed. Repetition `r`
//! uses master seed `derive_seed(seed, r)`; user `i` perturbs with
//! `RandomSource::for_user(rep_seed, i)` under every mechanism and budget,
//! so comparisons across mechanisms and budgets share their randomness.

mod audit;
mod experiments;
mod generate;
mod table;
mod training;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use audit::{run_privacy_audit, AuditReport, AuditTarget, AUDIT_TOLERANCE, MAX_AUDIT_DIMS, MAX_AUDIT_DOMAIN};
pub use experiments::{run_freq_experiment, run_mean_experiment};
pub use generate::{gen_gaussian_numeric, gen_zipf_categorical, zipf_pmf, GAUSSIAN_SD};
pub use table::{emit_variance_table, VarianceRow};
pub use training::{run_sgd_experiment, SgdConfig, SgdRecord};

use crate::error::{LdpError, Result};
use crate::rng::derive_seed;

pub const DEFAULT_NUMERIC_USERS: usize = 400_000;
pub const DEFAULT_CATEGORICAL_USERS: usize = 100_000;
pub const QUICK_USERS: usize = 50_000;
pub const QUICK_REPS: usize = 5;
pub const DEFAULT_ZIPF_EXPONENT: f64 = 1.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentTask {
    Mean,
    Freq,
    VarianceTable,
    Sgd,
    PrivacyAudit,
}

impl fmt::Display for ExperimentTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mean => "mean",
            Self::Freq => "freq",
            Self::VarianceTable => "variance-table",
            Self::Sgd => "sgd",
            Self::PrivacyAudit => "privacy-audit",
        })
    }
}

/// Everything needed to rerun an experiment; written next to its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: ExperimentTask,
    /// Mechanism or protocol names.
    pub mechanisms: Vec<String>,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Dimensions `d` (numeric) or domain sizes `k` (categorical).
    pub sizes: Vec<u32>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub zipf_exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(LdpError::InvalidArgument(format!("{what} grid is empty")));
        if self.mechanisms.is_empty() {
            return empty("mechanism");
        }
        if self.epsilons.is_empty() {
            return empty("epsilon");
        }
        if self.deltas.is_empty() {
            return empty("delta");
        }
        if self.sizes.is_empty() {
            return empty("dimension/domain");
        }
        if self.reps == 0 {
            return Err(LdpError::InvalidArgument("need at least one repetition".into()));
        }
        if self.n == 0 {
            return Err(LdpError::InvalidArgument("need at least one user".into()));
        }
        Ok(())
    }

    pub(crate) fn rep_seed(&self, rep: usize) -> u64 {
        derive_seed(self.seed, rep as u64)
    }

    /// Seed of the synthetic dataset for one (size, repetition) cell.
    pub(crate) fn data_seed(&self, size: u32, rep: usize) -> u64 {
        derive_seed(derive_seed(self.rep_seed(rep), 0xda7a), u64::from(size))
    }

    pub(crate) fn parsed_mechanisms<T: FromStr<Err = LdpError>>(&self) -> Result<Vec<T>> {
        self.mechanisms.iter().map(|m| m.parse()).collect()
    }
}

/// One (mechanism, budget, size, repetition) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseRecord {
    pub mechanism: String,
    pub epsilon: f64,
    pub delta: f64,
    /// `d` or `k`.
    pub size: u32,
    pub n: usize,
    pub rep: usize,
    pub mse: f64,
}

pub(crate) fn sort_records(records: &mut [MseRecord]) {
    records.sort_by(|a, b| {
        a.mechanism
            .cmp(&b.mechanism)
            .then(a.size.cmp(&b.size))
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.delta.total_cmp(&b.delta))
            .then(a.rep.cmp(&b.rep))
    });
}

/// Median MSE over repetitions of one grid point.
pub fn median_mse(records: &[MseRecord], mechanism: &str, epsilon: f64, delta: f64, size: u32) -> Option<f64> {
    let mut v: Vec<f64> = records
        .iter()
        .filter(|r| r.mechanism == mechanism && r.epsilon == epsilon && r.delta == delta && r.size == size)
        .map(|r| r.mse)
        .collect();
    median(&mut v)
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

/// Writes serialisable rows as CSV with a header.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `rows` to `output` and the config to the adjacent manifest.
pub fn write_with_manifest<T: Serialize, C: Serialize>(rows: &[T], config: &C, output: &Path) -> Result<()> {
    write_csv(rows, std::io::BufWriter::new(std::fs::File::create(output)?))?;
    let mut manifest = serde_json::to_string_pretty(config)?;
    manifest.push('\n');
    std::fs::write(manifest_path(output), manifest)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            task: ExperimentTask::Mean,
            mechanisms: vec!["mech1".into()],
            epsilons: vec![1.0],
            deltas: vec![1e-6],
            sizes: vec![2],
            n: 100,
            reps: 1,
            seed: 1,
            zipf_exponent: DEFAULT_ZIPF_EXPONENT,
            output: None,
        }
    }

    #[test]
    fn validation() {
        assert!(config().validate().is_ok());
        let mut c = config();
        c.reps = 0;
        assert!(c.validate().is_err());
        let mut c = config();
        c.epsilons.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn manifest_is_adjacent() {
        assert_eq!(manifest_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.manifest.json"));
    }

    #[test]
    fn records_csv_header() {
        let mut buf = Vec::new();
        let rec = MseRecord {
            mechanism: "mech1".into(),
            epsilon: 1.0,
            delta: 1e-6,
            size: 2,
            n: 10,
            rep: 0,
            mse: 0.5,
        };
        write_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "mechanism,epsilon,delta,size,n,rep,mse");
    }
}
