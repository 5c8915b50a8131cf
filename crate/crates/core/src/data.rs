//! Dataset containers, numeric normalisation and CSV ingestion.
//!
//! Categorical values are 0-based internally. On the CSV side a column with
//! a declared domain size `k` holds the integers `1..=k`; a column without a
//! declared size is mapped label-by-label onto `0..k` in sorted label order.

use std::collections::BTreeSet;
use std::io::Read;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LdpError, Result};

/// Inputs may exceed the unit box by this much (float noise from
/// normalisation) and are clamped; anything further out is rejected.
pub const DOMAIN_TOLERANCE: f64 = 1e-9;

/// Checks that `x` lies in `[-1, 1]` up to [`DOMAIN_TOLERANCE`] and returns
/// the clamped value.
pub fn clamp_to_domain(index: usize, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(LdpError::NonFiniteInput { index });
    }
    if x.abs() > 1.0 + DOMAIN_TOLERANCE {
        return Err(LdpError::OutOfDomain { index, value: x });
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// A user's numeric record in `[-1, 1]^d`, `d >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericTuple(Vec<f64>);

impl NumericTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LdpError::InvalidArgument("a numeric tuple needs d >= 1".into()));
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, x)| clamp_to_domain(i, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(values))
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for NumericTuple {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CategoricalValue {
    index: u32,
    domain_size: u32,
}

impl CategoricalValue {
    pub fn new(index: u32, domain_size: u32) -> Result<Self> {
        if domain_size < 2 {
            return Err(LdpError::InvalidArgument(format!(
                "categorical domain needs k >= 2, got {domain_size}"
            )));
        }
        if index >= domain_size {
            return Err(LdpError::InvalidArgument(format!(
                "value index {index} outside domain of size {domain_size}"
            )));
        }
        Ok(Self { index, domain_size })
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }
}

/// Affine map of a raw column onto `[-1, 1]`:
/// `x ↦ 2(x − min)/(max − min) − 1`. Constant columns map to zeros.
pub fn normalize_numeric(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(LdpError::InvalidArgument("cannot normalise an empty column".into()));
    }
    if let Some(index) = raw.iter().position(|x| !x.is_finite()) {
        return Err(LdpError::NonFiniteInput { index });
    }
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Ok(vec![0.0; raw.len()]);
    }
    let range = max - min;
    let centre = max + min;
    // (2x − (max + min)) / (max − min) is the same map; this form is exact
    // on columns that already span [-1, 1].
    Ok(raw
        .iter()
        .map(|&x| {
            if x == max {
                1.0
            } else if x == min {
                -1.0
            } else {
                ((2.0 * x - centre) / range).clamp(-1.0, 1.0)
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalColumn {
    pub name: String,
    pub domain_size: u32,
    /// Printable label of each internal index.
    pub labels: Vec<String>,
    pub values: Vec<u32>,
}

impl CategoricalColumn {
    pub fn new(name: impl Into<String>, domain_size: u32, values: Vec<u32>) -> Result<Self> {
        if domain_size < 2 {
            return Err(LdpError::InvalidArgument(format!(
                "categorical domain needs k >= 2, got {domain_size}"
            )));
        }
        if let Some(row) = values.iter().position(|&v| v >= domain_size) {
            return Err(LdpError::BadRow {
                row: row + 1,
                message: format!("value index {} outside domain {domain_size}", values[row]),
            });
        }
        let labels = (1..=domain_size).map(|v| v.to_string()).collect();
        Ok(Self {
            name: name.into(),
            domain_size,
            labels,
            values,
        })
    }

    /// True frequency of every value.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut counts = vec![0u64; self.domain_size as usize];
        for &v in &self.values {
            counts[v as usize] += 1;
        }
        let n = self.values.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }
}

/// N users, each with `d_num` numeric attributes in `[-1, 1]` and any number
/// of categorical attributes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    rows: usize,
    numeric_names: Vec<String>,
    /// Row-major `rows × numeric_names.len()`.
    numeric: Vec<f64>,
    categorical: Vec<CategoricalColumn>,
}

impl Dataset {
    /// Builds a numeric-only dataset from row-major values.
    pub fn from_numeric_rows(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let d = names.len();
        if d == 0 {
            return Err(LdpError::InvalidArgument("need at least one numeric column".into()));
        }
        if values.len() % d != 0 {
            return Err(LdpError::DimensionMismatch {
                expected: d,
                actual: values.len() % d,
            });
        }
        for (i, &x) in values.iter().enumerate() {
            if !x.is_finite() || x.abs() > 1.0 {
                return Err(LdpError::BadRow {
                    row: i / d + 1,
                    message: format!("numeric value {x} outside [-1, 1]"),
                });
            }
        }
        Ok(Self {
            rows: values.len() / d,
            numeric_names: names,
            numeric: values,
            categorical: Vec::new(),
        })
    }

    pub fn from_categorical(columns: Vec<CategoricalColumn>) -> Result<Self> {
        let mut ds = Self::default();
        for c in columns {
            ds.push_categorical(c)?;
        }
        Ok(ds)
    }

    pub fn push_categorical(&mut self, column: CategoricalColumn) -> Result<()> {
        if self.numeric_names.is_empty() && self.categorical.is_empty() {
            self.rows = column.values.len();
        } else if column.values.len() != self.rows {
            return Err(LdpError::DimensionMismatch {
                expected: self.rows,
                actual: column.values.len(),
            });
        }
        self.categorical.push(column);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn numeric_dims(&self) -> usize {
        self.numeric_names.len()
    }

    pub fn numeric_names(&self) -> &[String] {
        &self.numeric_names
    }

    pub fn numeric_row(&self, i: usize) -> &[f64] {
        let d = self.numeric_dims();
        &self.numeric[i * d..(i + 1) * d]
    }

    pub fn numeric_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.numeric.chunks_exact(self.numeric_dims().max(1))
    }

    /// Column-wise mean of the numeric attributes.
    pub fn numeric_means(&self) -> Vec<f64> {
        let d = self.numeric_dims();
        let mut sums = vec![0.0; d];
        for row in self.numeric_rows() {
            for (s, x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums.iter().map(|s| s / self.rows.max(1) as f64).collect()
    }

    pub fn categorical_columns(&self) -> &[CategoricalColumn] {
        &self.categorical
    }

    pub fn categorical(&self, name: &str) -> Option<&CategoricalColumn> {
        self.categorical.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain_size: Option<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

/// Sidecar schema marking each CSV column numeric or categorical.
///
/// JSON form:
/// `{"columns": [{"name": "age", "kind": "numeric"},
///               {"name": "sex", "kind": "categorical", "domain_size": 2}]}`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Schema built from a list of categorical column names; every other
    /// header column is numeric and categorical domains are inferred.
    pub fn from_categorical_names(headers: &[String], categorical: &[String]) -> Self {
        let columns = headers
            .iter()
            .map(|h| ColumnSpec {
                name: h.clone(),
                kind: if categorical.contains(h) {
                    ColumnKind::Categorical { domain_size: None }
                } else {
                    ColumnKind::Numeric
                },
            })
            .collect();
        Self { columns }
    }
}

/// Reads a headered CSV. Columns absent from the schema are ignored; schema
/// columns absent from the header are an error. Rows with a missing cell are
/// rejected with their 1-based data row number.
pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let positions = schema
        .columns
        .iter()
        .map(|c| {
            headers.iter().position(|h| *h == c.name).ok_or_else(|| {
                LdpError::InvalidArgument(format!("schema column '{}' not in CSV header", c.name))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); schema.columns.len()];
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for (col, &pos) in positions.iter().enumerate() {
            let cell = record.get(pos).map(str::trim).unwrap_or("");
            if cell.is_empty() {
                return Err(LdpError::BadRow {
                    row,
                    message: format!("missing value in column '{}'", schema.columns[col].name),
                });
            }
            cells[col].push(cell.to_string());
        }
    }
    let rows = cells.first().map_or(0, Vec::len);

    let mut numeric_names = Vec::new();
    let mut numeric_cols = Vec::new();
    let mut categorical = Vec::new();
    for (spec, column) in schema.columns.iter().zip(cells) {
        match spec.kind {
            ColumnKind::Numeric => {
                let raw = column
                    .iter()
                    .enumerate()
                    .map(|(r, s)| {
                        s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                            LdpError::BadRow {
                                row: r + 1,
                                message: format!("'{s}' in column '{}' is not a finite number", spec.name),
                            }
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let normalized = if raw.is_empty() { raw } else { normalize_numeric(&raw)? };
                numeric_names.push(spec.name.clone());
                numeric_cols.push(normalized);
            }
            ColumnKind::Categorical { domain_size } => {
                categorical.push(parse_categorical(&spec.name, &column, domain_size)?);
            }
        }
    }

    let d = numeric_names.len();
    let mut numeric = Vec::with_capacity(rows * d);
    for r in 0..rows {
        numeric.extend(numeric_cols.iter().map(|c| c[r]));
    }
    Ok(Dataset {
        rows,
        numeric_names,
        numeric,
        categorical,
    })
}

pub fn read_csv_file(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    read_csv(std::fs::File::open(path)?, schema)
}

/// CSV header of a file, used to build a schema from column-name flags.
pub fn read_csv_headers(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(rdr.headers()?.iter().map(|s| s.trim().to_string()).collect())
}

fn parse_categorical(name: &str, cells: &[String], domain_size: Option<u32>) -> Result<CategoricalColumn> {
    match domain_size {
        Some(k) => {
            let values = cells
                .iter()
                .enumerate()
                .map(|(r, s)| match s.parse::<u32>() {
                    Ok(v) if (1..=k).contains(&v) => Ok(v - 1),
                    _ => Err(LdpError::BadRow {
                        row: r + 1,
                        message: format!("'{s}' in column '{name}' is not an integer in 1..={k}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            CategoricalColumn::new(name, k, values)
        }
        None => {
            let distinct: BTreeSet<&str> = cells.iter().map(String::as_str).collect();
            let mut labels: Vec<String> = distinct.into_iter().map(str::to_string).collect();
            // Integer labels sort numerically.
            if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
                labels.sort_by_key(|l| l.parse::<i64>().unwrap());
            }
            let k = labels.len().max(2) as u32;
            let values = cells
                .iter()
                .map(|s| labels.iter().position(|l| l == s).unwrap() as u32)
                .collect();
            while labels.len() < k as usize {
                labels.push(format!("<unused {}>", labels.len() + 1));
            }
            Ok(CategoricalColumn {
                name: name.to_string(),
                domain_size: k,
                labels,
                values,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_endpoints() {
        assert_eq!(normalize_numeric(&[0.0, 5.0, 10.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn normalize_constant_column() {
        assert_eq!(normalize_numeric(&[3.0, 3.0, 3.0]).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_by_hand() {
        let out = normalize_numeric(&[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(out[0], -1.0);
        assert!((out[1] + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(out[2], 1.0);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert!(matches!(
            normalize_numeric(&[1.0, f64::NAN]),
            Err(LdpError::NonFiniteInput { index: 1 })
        ));
        assert!(normalize_numeric(&[]).is_err());
    }

    #[test]
    fn tuple_clamps_float_noise_only() {
        let t = NumericTuple::new(vec![1.0 + 1e-10, -0.5]).unwrap();
        assert_eq!(&*t, &[1.0, -0.5]);
        assert!(matches!(
            NumericTuple::new(vec![0.0, 1.001]),
            Err(LdpError::OutOfDomain { index: 1, .. })
        ));
        assert!(NumericTuple::new(vec![]).is_err());
    }

    #[test]
    fn categorical_value_bounds() {
        assert!(CategoricalValue::new(2, 3).is_ok());
        assert!(CategoricalValue::new(3, 3).is_err());
        assert!(CategoricalValue::new(0, 1).is_err());
    }

    #[test]
    fn csv_with_schema() {
        let csv = "age,sex,city,ignored\n20,1,b,x\n40,2,a,y\n30,2,c,z\n";
        let schema: Schema = serde_json::from_str(
            r#"{"columns":[{"name":"age","kind":"numeric"},
                           {"name":"sex","kind":"categorical","domain_size":2},
                           {"name":"city","kind":"categorical"}]}"#,
        )
        .unwrap();
        let ds = read_csv(csv.as_bytes(), &schema).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.numeric_dims(), 1);
        assert_eq!(ds.numeric_row(0), &[-1.0]);
        assert_eq!(ds.numeric_row(1), &[1.0]);
        assert_eq!(ds.numeric_row(2), &[0.0]);
        let sex = ds.categorical("sex").unwrap();
        assert_eq!(sex.values, vec![0, 1, 1]);
        let city = ds.categorical("city").unwrap();
        assert_eq!(city.domain_size, 3);
        assert_eq!(city.labels, vec!["a", "b", "c"]);
        assert_eq!(city.values, vec![1, 0, 2]);
    }

    #[test]
    fn csv_missing_cell_reports_row() {
        let csv = "a,b\n1,2\n3,\n";
        let schema = Schema::from_categorical_names(&["a".into(), "b".into()], &[]);
        match read_csv(csv.as_bytes(), &schema) {
            Err(LdpError::BadRow { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected BadRow, got {other:?}"),
        }
    }

    #[test]
    fn csv_categorical_out_of_declared_domain() {
        let csv = "c\n1\n3\n";
        let schema: Schema =
            serde_json::from_str(r#"{"columns":[{"name":"c","kind":"categorical","domain_size":2}]}"#).unwrap();
        assert!(matches!(read_csv(csv.as_bytes(), &schema), Err(LdpError::BadRow { row: 2, .. })));
    }

    #[test]
    fn numeric_means_and_rows() {
        let ds = Dataset::from_numeric_rows(vec!["x".into(), "y".into()], vec![0.5, -1.0, 0.0, 1.0]).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.numeric_means(), vec![0.25, 0.0]);
        assert!(Dataset::from_numeric_rows(vec!["x".into()], vec![2.0]).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn normalize_is_idempotent_on_unit_span(mut xs in prop::collection::vec(-1.0f64..1.0, 1..50)) {
                xs.push(-1.0);
                xs.push(1.0);
                let once = normalize_numeric(&xs).unwrap();
                prop_assert_eq!(&once, &xs);
                let twice = normalize_numeric(&once).unwrap();
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn normalize_lands_in_unit_box(xs in prop::collection::vec(-1e6f64..1e6, 1..50)) {
                let out = normalize_numeric(&xs).unwrap();
                prop_assert!(out.iter().all(|x| (-1.0..=1.0).contains(x)));
            }
        }
    }
}
