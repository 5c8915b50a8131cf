use serde::Serialize;

use super::{seeded_hash, CategoricalReport, Protocol, ProtocolParams};
use crate::error::{LdpError, Result};

/// Per-value support counts over a set of reports. Partial counts from
/// disjoint shards merge by addition.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCounts {
    protocol: Protocol,
    k: u32,
    g: u32,
    n: u64,
    counts: Vec<f64>,
}

impl SupportCounts {
    pub fn new(params: &ProtocolParams) -> Self {
        Self {
            protocol: params.protocol,
            k: params.k,
            g: params.hash_range(),
            n: 0,
            counts: vec![0.0; params.k as usize],
        }
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    fn mismatch(&self, report: &CategoricalReport) -> LdpError {
        LdpError::MixedProtocolReports(format!(
            "{} report does not fit {} with k = {}",
            report.shape(),
            self.protocol,
            self.k
        ))
    }

    pub fn add(&mut self, report: &CategoricalReport) -> Result<()> {
        match (self.protocol, report) {
            (Protocol::Grr, CategoricalReport::Value(v)) if *v < self.k => {
                self.counts[*v as usize] += 1.0;
            }
            (Protocol::Prr | Protocol::Sprr, CategoricalReport::Bits { k, packed })
                if *k == self.k && packed.len() == k.div_ceil(8) as usize =>
            {
                for (j, c) in self.counts.iter_mut().enumerate() {
                    if packed[j / 8] >> (j % 8) & 1 == 1 {
                        *c += 1.0;
                    }
                }
            }
            (Protocol::Lh | Protocol::Olh, CategoricalReport::Hash { seed, y }) if u32::from(*y) < self.g => {
                for (v, c) in self.counts.iter_mut().enumerate() {
                    if seeded_hash(*seed, v as u32, self.g) == u32::from(*y) {
                        *c += 1.0;
                    }
                }
            }
            (Protocol::OptGm, CategoricalReport::Real(values)) if values.len() == self.k as usize => {
                for (c, v) in self.counts.iter_mut().zip(values) {
                    *c += v;
                }
            }
            _ => return Err(self.mismatch(report)),
        }
        self.n += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &SupportCounts) -> Result<()> {
        if (self.protocol, self.k, self.g) != (other.protocol, other.k, other.g) {
            return Err(LdpError::MixedProtocolReports(format!(
                "cannot merge {} (k = {}) with {} (k = {})",
                self.protocol, self.k, other.protocol, other.k
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n += other.n;
        Ok(())
    }

    /// Unbiased counts `(C_v − N·q*)/(p* − q*)` and their post-processed frequencies.
    pub fn estimate(&self, params: &ProtocolParams) -> Result<FrequencyEstimate> {
        if (params.protocol, params.k, params.hash_range()) != (self.protocol, self.k, self.g) {
            return Err(LdpError::MixedProtocolReports(format!(
                "counts were collected under {} but parameters are for {}",
                self.protocol, params.protocol
            )));
        }
        let n = self.n as f64;
        let counts: Vec<f64> = match params.protocol {
            Protocol::OptGm => self.counts.clone(),
            _ => {
                let scale = params.p_star - params.q_star;
                self.counts.iter().map(|c| (c - n * params.q_star) / scale).collect()
            }
        };
        let raw_frequencies = if self.n == 0 {
            vec![0.0; counts.len()]
        } else {
            counts.iter().map(|c| c / n).collect()
        };
        let frequencies = postprocess_frequencies(&counts, params.protocol == Protocol::OptGm);
        Ok(FrequencyEstimate {
            n: self.n,
            counts,
            raw_frequencies,
            frequencies,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyEstimate {
    pub n: u64,
    /// Unbiased count estimates, possibly negative.
    pub counts: Vec<f64>,
    /// `counts / n`, before any post-processing.
    pub raw_frequencies: Vec<f64>,
    /// Non-negative frequencies summing to one.
    pub frequencies: Vec<f64>,
}

/// Optional rounding, clipping at zero, then renormalising. Falls back to
/// the uniform distribution when nothing positive remains.
pub fn postprocess_frequencies(counts: &[f64], round: bool) -> Vec<f64> {
    let clipped: Vec<f64> = counts
        .iter()
        .map(|&c| if round { c.round() } else { c })
        .map(|c| if c > 0.0 { c } else { 0.0 })
        .collect();
    let total: f64 = clipped.iter().sum();
    if total > 0.0 {
        clipped.iter().map(|c| c / total).collect()
    } else {
        vec![1.0 / counts.len() as f64; counts.len()]
    }
}

pub fn estimate_frequencies(reports: &[CategoricalReport], params: &ProtocolParams) -> Result<FrequencyEstimate> {
    let mut counts = SupportCounts::new(params);
    for report in reports {
        counts.add(report)?;
    }
    counts.estimate(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::validate_budget;
    use crate::categorical::perturb::perturb_index;
    use crate::categorical::{grr_params, sprr_params};
    use crate::rng::RandomSource;

    #[test]
    fn unbiasing_arithmetic() {
        let mut params = grr_params(2, validate_budget(3f64.ln(), 0.0).unwrap()).unwrap();
        params.p_star = 0.75;
        params.q_star = 0.25;
        let mut counts = SupportCounts::new(&params);
        counts.counts = vec![500.0, 500.0];
        counts.n = 1000;
        let est = counts.estimate(&params).unwrap();
        assert!((est.counts[0] - 500.0).abs() < 1e-12);
        counts.counts = vec![250.0, 750.0];
        let est = counts.estimate(&params).unwrap();
        assert!(est.counts[0].abs() < 1e-12);
    }

    #[test]
    fn grr_counts_sum_to_n() {
        let params = grr_params(7, validate_budget(0.8, 1e-3).unwrap()).unwrap();
        let mut rng = RandomSource::new(1);
        for trial in 0..5u32 {
            let reports: Vec<_> = (0..1000 + trial * 37)
                .map(|i| perturb_index(i % 7, &params, &mut rng))
                .collect();
            let est = estimate_frequencies(&reports, &params).unwrap();
            let total: f64 = est.counts.iter().sum();
            assert!((total - reports.len() as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn mixed_reports_rejected() {
        let params = grr_params(4, validate_budget(1.0, 0.0).unwrap()).unwrap();
        let reports = vec![CategoricalReport::Value(1), CategoricalReport::Hash { seed: 0, y: 0 }];
        assert!(matches!(
            estimate_frequencies(&reports, &params),
            Err(LdpError::MixedProtocolReports(_))
        ));
        assert!(estimate_frequencies(&[CategoricalReport::Value(4)], &params).is_err());
        let other = SupportCounts::new(&sprr_params(4, validate_budget(1.0, 0.0).unwrap()).unwrap());
        assert!(SupportCounts::new(&params).merge(&other).is_err());
    }

    #[test]
    fn merge_equals_single_pass() {
        let params = sprr_params(5, validate_budget(1.0, 1e-6).unwrap()).unwrap();
        let mut rng = RandomSource::new(8);
        let reports: Vec<_> = (0..500).map(|i| perturb_index(i % 5, &params, &mut rng)).collect();
        let whole = estimate_frequencies(&reports, &params).unwrap();
        let (mut a, mut b) = (SupportCounts::new(&params), SupportCounts::new(&params));
        for r in &reports[..200] {
            a.add(r).unwrap();
        }
        for r in &reports[200..] {
            b.add(r).unwrap();
        }
        a.merge(&b).unwrap();
        assert_eq!(a.estimate(&params).unwrap(), whole);
    }

    #[test]
    fn postprocessing_examples() {
        assert_eq!(postprocess_frequencies(&[3.0, -1.0, 1.0], false), vec![0.75, 0.0, 0.25]);
        assert_eq!(postprocess_frequencies(&[-3.0, -1.0], false), vec![0.5, 0.5]);
        assert_eq!(postprocess_frequencies(&[0.4, 1.6], true), vec![0.0, 1.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn postprocessed_is_distribution(counts in prop::collection::vec(-1e6f64..1e6, 2..40), round: bool) {
                let f = postprocess_frequencies(&counts, round);
                prop_assert!(f.iter().all(|&x| x >= 0.0));
                prop_assert!((f.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
