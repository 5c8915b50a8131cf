//! `perturb` and `estimate`: the client and aggregator sides on files.
//!
//! Report files are CSV. Numeric reports have a `user` column followed by
//! one column per numeric attribute; categorical reports have `user,report`
//! where `report` is the encoded protocol output (a decimal value for GRR,
//! hex otherwise). The manifest next to a report file carries everything the
//! aggregator needs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use ldpkit::categorical::{decode_report, encode_report, perturb_categorical, Protocol, ProtocolParams, SupportCounts};
use ldpkit::data::{read_csv_file, read_csv_headers, CategoricalValue, ColumnKind, ColumnSpec, Dataset, Schema};
use ldpkit::harness::manifest_path;
use ldpkit::numeric::NumericMechanism;
use ldpkit::{validate_budget, RandomSource};

use crate::bench::emit;
use crate::GlobalArgs;

#[derive(Args, Debug)]
pub struct PerturbArgs {
    /// Input CSV dataset.
    #[arg(long)]
    input: PathBuf,
    /// JSON schema; otherwise `--categorical` names categorical columns and
    /// every other column is numeric.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
    /// Categorical column to report on (with `--protocol`).
    #[arg(long)]
    column: Option<String>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Report CSV written by `perturb`.
    #[arg(long)]
    input: PathBuf,
    /// Manifest of the reports; defaults to `<input>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// Everything needed to aggregate a report file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportManifest {
    pub kind: ReportKind,
    pub mechanism: String,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub input: PathBuf,
    pub users: usize,
    /// Numeric attribute names, in report column order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Numeric,
    Categorical,
}

pub fn load_dataset(path: &Path, schema: Option<&Path>, categorical: &[String]) -> Result<Dataset> {
    let schema = match schema {
        Some(s) => Schema::from_json_file(s).with_context(|| format!("reading schema {}", s.display()))?,
        None => Schema::from_categorical_names(&read_csv_headers(path)?, categorical),
    };
    read_csv_file(path, &schema).with_context(|| format!("reading {}", path.display()))
}

pub fn perturb(g: &GlobalArgs, a: &PerturbArgs) -> Result<()> {
    let budget = g.single_budget()?;
    match (g.protocol.as_slice(), g.mechanism.as_slice()) {
        ([protocol], []) => perturb_categorical_column(g, a, protocol.parse()?, budget),
        ([], [mechanism]) => perturb_numeric(g, a, mechanism.parse()?, budget),
        _ => bail!("perturb needs exactly one of --protocol or --mechanism"),
    }
}

#[derive(Serialize)]
struct CategoricalRow {
    user: usize,
    report: String,
}

fn perturb_categorical_column(
    g: &GlobalArgs,
    a: &PerturbArgs,
    protocol: Protocol,
    budget: ldpkit::PrivacyBudget,
) -> Result<()> {
    let name = a.column.clone().context("--column is required with --protocol")?;
    let dataset = match &a.schema {
        Some(_) => load_dataset(&a.input, a.schema.as_deref(), &[])?,
        None => {
            // Only the reported column is read; other columns may hold anything.
            let domain_size = match g.domain.as_slice() {
                [] => None,
                [k] => Some(*k),
                _ => bail!("--domain takes a single value here"),
            };
            let schema = Schema {
                columns: vec![ColumnSpec {
                    name: name.clone(),
                    kind: ColumnKind::Categorical { domain_size },
                }],
            };
            read_csv_file(&a.input, &schema).with_context(|| format!("reading {}", a.input.display()))?
        }
    };
    let column = dataset
        .categorical(&name)
        .with_context(|| format!("no categorical column '{name}'"))?;
    let params = ProtocolParams::for_protocol(protocol, column.domain_size, budget)?;
    let mut rows = Vec::with_capacity(column.values.len());
    for (user, &v) in column.values.iter().enumerate() {
        let value = CategoricalValue::new(v, column.domain_size)?;
        let report = perturb_categorical(value, &params, &mut RandomSource::for_user(g.seed, user as u64))?;
        rows.push(CategoricalRow {
            user,
            report: encode_report(&report),
        });
    }
    let manifest = ReportManifest {
        kind: ReportKind::Categorical,
        mechanism: protocol.name().to_string(),
        epsilon: budget.epsilon(),
        delta: budget.delta(),
        seed: g.seed,
        input: a.input.clone(),
        users: rows.len(),
        columns: Vec::new(),
        column: Some(name),
        domain_size: Some(column.domain_size),
        labels: column.labels.clone(),
    };
    emit(g, &rows, &manifest)
}

fn perturb_numeric(
    g: &GlobalArgs,
    a: &PerturbArgs,
    mechanism: NumericMechanism,
    budget: ldpkit::PrivacyBudget,
) -> Result<()> {
    let dataset = load_dataset(&a.input, a.schema.as_deref(), &a.categorical)?;
    let d = dataset.numeric_dims();
    if d == 0 {
        bail!("{} has no numeric columns", a.input.display());
    }
    let prepared = mechanism.prepare(d, budget)?;
    let names = dataset.numeric_names().to_vec();
    let mut buf = vec![0.0; d];
    let mut out = Vec::new();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(std::iter::once("user").chain(names.iter().map(String::as_str)))?;
    for (user, row) in dataset.numeric_rows().enumerate() {
        prepared.perturb_into(row, &mut RandomSource::for_user(g.seed, user as u64), &mut buf);
        let mut record = vec![user.to_string()];
        record.extend(buf.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    drop(w);
    let manifest = ReportManifest {
        kind: ReportKind::Numeric,
        mechanism: mechanism.name().to_string(),
        epsilon: budget.epsilon(),
        delta: budget.delta(),
        seed: g.seed,
        input: a.input.clone(),
        users: dataset.len(),
        columns: names,
        column: None,
        domain_size: None,
        labels: Vec::new(),
    };
    write_raw(g, &out, &manifest)
}

fn write_raw(g: &GlobalArgs, bytes: &[u8], manifest: &ReportManifest) -> Result<()> {
    match &g.out {
        Some(path) => {
            std::fs::write(path, bytes)?;
            let mut text = serde_json::to_string_pretty(manifest)?;
            text.push('\n');
            std::fs::write(manifest_path(path), text)?;
            eprintln!("wrote {} reports to {}", manifest.users, path.display());
        }
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(bytes)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MeanRow<'a> {
    column: &'a str,
    estimate: f64,
    users: usize,
}

#[derive(Serialize)]
struct FrequencyRow<'a> {
    value: u32,
    label: &'a str,
    count: f64,
    raw_frequency: f64,
    frequency: f64,
}

#[derive(Serialize)]
struct EstimateManifest<'a> {
    reports: &'a Path,
    #[serde(flatten)]
    source: &'a ReportManifest,
}

pub fn estimate(g: &GlobalArgs, a: &EstimateArgs) -> Result<()> {
    let manifest_file = a.manifest.clone().unwrap_or_else(|| manifest_path(&a.input));
    let text = std::fs::read_to_string(&manifest_file)
        .with_context(|| format!("reading report manifest {}", manifest_file.display()))?;
    let manifest: ReportManifest = serde_json::from_str(&text)?;
    let mut rdr = csv::Reader::from_path(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let out = EstimateManifest {
        reports: &a.input,
        source: &manifest,
    };
    match manifest.kind {
        ReportKind::Numeric => {
            let d = manifest.columns.len();
            let mut sums = vec![0.0; d];
            let mut users = 0;
            for (r, record) in rdr.records().enumerate() {
                let record = record?;
                if record.len() != d + 1 {
                    bail!("report row {} has {} fields, expected {}", r + 1, record.len(), d + 1);
                }
                for (s, cell) in sums.iter_mut().zip(record.iter().skip(1)) {
                    *s += cell
                        .trim()
                        .parse::<f64>()
                        .with_context(|| format!("report row {}: '{cell}' is not a number", r + 1))?;
                }
                users += 1;
            }
            if users == 0 {
                bail!("no reports in {}", a.input.display());
            }
            let rows: Vec<MeanRow> = manifest
                .columns
                .iter()
                .zip(&sums)
                .map(|(c, s)| MeanRow {
                    column: c,
                    estimate: s / users as f64,
                    users,
                })
                .collect();
            emit(g, &rows, &out)
        }
        ReportKind::Categorical => {
            let protocol: Protocol = manifest.mechanism.parse()?;
            let k = manifest.domain_size.context("manifest lacks domain_size")?;
            let params = ProtocolParams::for_protocol(protocol, k, validate_budget(manifest.epsilon, manifest.delta)?)?;
            let mut counts = SupportCounts::new(&params);
            for (r, record) in rdr.records().enumerate() {
                let record = record?;
                let cell = record.get(1).with_context(|| format!("report row {} has no report", r + 1))?;
                let report =
                    decode_report(cell.trim(), &params).with_context(|| format!("report row {}", r + 1))?;
                counts.add(&report)?;
            }
            let est = counts.estimate(&params)?;
            let rows: Vec<FrequencyRow> = (0..k as usize)
                .map(|v| FrequencyRow {
                    value: v as u32,
                    label: manifest.labels.get(v).map_or("", String::as_str),
                    count: est.counts[v],
                    raw_frequency: est.raw_frequencies[v],
                    frequency: est.frequencies[v],
                })
                .collect();
            emit(g, &rows, &out)
        }
    }
}
