//! Synthetic datasets.

use crate::data::{CategoricalColumn, Dataset};
use crate::error::{LdpError, Result};
use crate::rng::RandomSource;

/// Standard deviation of the synthetic numeric attributes (variance 1/16).
pub const GAUSSIAN_SD: f64 = 0.25;

/// `n × d` i.i.d. draws from `N(0, 1/16)`, clamped to `[-1, 1]`. Clamping
/// happens with probability ≈ 6e−5 per draw and biases the mean by < 1e−4.
pub fn gen_gaussian_numeric(n: usize, d: usize, rng: &mut RandomSource) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(LdpError::InvalidArgument("need n >= 1 and d >= 1".into()));
    }
    let values = (0..n * d)
        .map(|_| (GAUSSIAN_SD * rng.standard_normal()).clamp(-1.0, 1.0))
        .collect();
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    Dataset::from_numeric_rows(names, values)
}

/// Probabilities `(r + 1)^{−s} / Σ_{m=1..k} m^{−s}` for `r ∈ 0..k`.
pub fn zipf_pmf(k: u32, s: f64) -> Vec<f64> {
    let weights: Vec<f64> = (1..=k).map(|m| f64::from(m).powf(-s)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// `n` draws from the Zipf distribution over `0..k` with exponent `s`, as a
/// dataset with a single categorical column named `value`.
pub fn gen_zipf_categorical(n: usize, k: u32, s: f64, rng: &mut RandomSource) -> Result<Dataset> {
    if k < 2 {
        return Err(LdpError::InvalidArgument(format!("domain size must be at least 2, got {k}")));
    }
    if !(s > 0.0) {
        return Err(LdpError::InvalidArgument(format!("Zipf exponent must be positive, got {s}")));
    }
    let mut cdf = zipf_pmf(k, s);
    let mut acc = 0.0;
    for c in cdf.iter_mut() {
        acc += *c;
        *c = acc;
    }
    let last = cdf.len() - 1;
    let values = (0..n)
        .map(|_| {
            let u = rng.uniform();
            cdf.partition_point(|&c| c <= u).min(last) as u32
        })
        .collect();
    Dataset::from_categorical(vec![CategoricalColumn::new("value", k, values)?])
}
