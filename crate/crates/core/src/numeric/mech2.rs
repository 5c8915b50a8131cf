//! Sampled-dimension mechanism: perturb `k` of the `d` coordinates with the
//! two-point mechanism at budget `(ε/k, δ/k)` and rescale by `d/k`.

use serde::Serialize;

use super::onedim::OneDimParams;
use super::{check_tuple, MechanismTag, NumericReport};
use crate::budget::PrivacyBudget;
use crate::error::{LdpError, Result};
use crate::rng::RandomSource;

/// Divisor in the closed-form choice of `k`.
pub const K_DIVISOR: f64 = 2.17;

/// `k = max{1, min{d, ⌊ε/2.17⌋}}`.
pub fn optimal_k(d: usize, epsilon: f64) -> usize {
    let k = (epsilon / K_DIVISOR).floor();
    if k < 1.0 {
        1
    } else {
        (k as usize).min(d).max(1)
    }
}

/// Worst-case per-coordinate variance `(d/k)·((e^{ε/k} + 1)/(e^{ε/k} + 2δ/k − 1))²`.
pub fn mech2_worst_case_variance(d: usize, k: usize, budget: &PrivacyBudget) -> f64 {
    let m = OneDimParams::new(budget.split(k)).magnitude;
    d as f64 / k as f64 * m * m
}

/// The `k ∈ [1, d]` with the smallest worst-case variance, by exhaustive search.
pub fn variance_optimal_k(d: usize, budget: &PrivacyBudget) -> usize {
    (1..=d.max(1))
        .min_by(|&a, &b| {
            mech2_worst_case_variance(d, a, budget).total_cmp(&mech2_worst_case_variance(d, b, budget))
        })
        .unwrap_or(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mech2Params {
    pub d: usize,
    pub k: usize,
    pub budget: PrivacyBudget,
    pub inner: OneDimParams,
    /// `d/k`.
    pub scale: f64,
}

impl Mech2Params {
    pub fn new(d: usize, budget: PrivacyBudget) -> Result<Self> {
        Self::with_k(d, budget, optimal_k(d, budget.epsilon()))
    }

    pub fn with_k(d: usize, budget: PrivacyBudget, k: usize) -> Result<Self> {
        if d == 0 {
            return Err(LdpError::InvalidArgument("dimension must be at least 1".into()));
        }
        if k == 0 || k > d {
            return Err(LdpError::InvalidArgument(format!("k = {k} outside [1, {d}]")));
        }
        Ok(Self {
            d,
            k,
            budget,
            inner: OneDimParams::new(budget.split(k)),
            scale: d as f64 / k as f64,
        })
    }

    /// Magnitude of every nonzero output coordinate.
    pub fn output_magnitude(&self) -> f64 {
        self.scale * self.inner.magnitude
    }

    pub fn worst_case_variance(&self) -> f64 {
        mech2_worst_case_variance(self.d, self.k, &self.budget)
    }

    pub(crate) fn perturb_into(&self, x: &[f64], rng: &mut RandomSource, out: &mut [f64]) {
        out.fill(0.0);
        if self.k == self.d {
            for (o, &xj) in out.iter_mut().zip(x) {
                *o = self.scale * self.inner.sample(xj, rng);
            }
        } else if self.d <= 64 {
            let mut positions = [0u8; 64];
            for (j, p) in positions.iter_mut().enumerate().take(self.d) {
                *p = j as u8;
            }
            for &j in rng.choose_in_place(&mut positions[..self.d], self.k).iter() {
                let j = j as usize;
                out[j] = self.scale * self.inner.sample(x[j], rng);
            }
        } else {
            for j in rng.sample_without_replacement(self.d, self.k) {
                out[j] = self.scale * self.inner.sample(x[j], rng);
            }
        }
    }
}

pub fn mech2_perturb(x: &[f64], budget: &PrivacyBudget, rng: &mut RandomSource) -> Result<NumericReport> {
    let params = Mech2Params::new(x.len(), *budget)?;
    mech2_perturb_with(x, &params, rng)
}

pub fn mech2_perturb_with(x: &[f64], params: &Mech2Params, rng: &mut RandomSource) -> Result<NumericReport> {
    let x = check_tuple(x, params.d)?;
    let mut values = vec![0.0; params.d];
    params.perturb_into(&x, rng, &mut values);
    Ok(NumericReport {
        values,
        mechanism: MechanismTag::Mech2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::validate_budget;
    use crate::numeric::onedim::onedim_perturb;

    #[test]
    fn optimal_k_examples() {
        assert_eq!(optimal_k(10, 1.0), 1);
        assert_eq!(optimal_k(10, 5.0), 2);
        assert_eq!(optimal_k(3, 50.0), 3);
        assert_eq!(optimal_k(1, 0.01), 1);
    }

    #[test]
    fn d1_matches_onedim_stream() {
        let budget = validate_budget(1.1, 1e-4).unwrap();
        for seed in 0..50 {
            let a = mech2_perturb(&[0.4], &budget, &mut RandomSource::new(seed)).unwrap();
            // With k = d nothing is subsampled, so both draw the same Bernoulli.
            let b = onedim_perturb(0.4, &budget, &mut RandomSource::new(seed)).unwrap();
            assert_eq!(a.values[0], b);
        }
    }

    #[test]
    fn report_sparsity() {
        let budget = validate_budget(5.0, 1e-6).unwrap();
        let params = Mech2Params::new(4, budget).unwrap();
        assert_eq!(params.k, 2);
        let mut rng = RandomSource::new(4);
        for _ in 0..500 {
            let r = mech2_perturb(&[0.1, 0.2, -0.3, 1.0], &budget, &mut rng).unwrap();
            assert_eq!(r.values.iter().filter(|v| **v != 0.0).count(), 2);
            let mag = params.output_magnitude();
            assert!(r.values.iter().all(|&v| v == 0.0 || (v.abs() - mag).abs() < 1e-12));
        }
    }

    #[test]
    fn selection_is_uniform() {
        let budget = validate_budget(4.5, 0.0).unwrap(); // k = 2
        let d = 5;
        let mut hits = [0u32; 5];
        let mut rng = RandomSource::new(12);
        let n = 50_000;
        for _ in 0..n {
            let r = mech2_perturb(&[0.0; 5], &budget, &mut rng).unwrap();
            for (h, v) in hits.iter_mut().zip(&r.values) {
                *h += u32::from(*v != 0.0);
            }
        }
        let expected = n as f64 * 2.0 / d as f64;
        for h in hits {
            assert!((f64::from(h) - expected).abs() < 4.0 * (expected * 0.6).sqrt(), "{hits:?}");
        }
    }

    #[test]
    fn exact_expectation_identity() {
        // E[x*_j] = (k/d)·(d/k)·E[onedim(x_j; ε/k, δ/k)] = x_j
        let budget = validate_budget(7.0, 1e-5).unwrap();
        let params = Mech2Params::new(6, budget).unwrap();
        for xj in [-1.0, -0.5, 0.0, 0.2, 1.0] {
            let p = params.inner.positive_probability(xj);
            let inner_mean = params.inner.magnitude * (2.0 * p - 1.0);
            let e = (params.k as f64 / params.d as f64) * params.scale * inner_mean;
            assert!((e - xj).abs() < 1e-12);
        }
    }

    #[test]
    fn brute_force_k_is_consistent() {
        let budget = validate_budget(9.0, 0.0).unwrap();
        let k = variance_optimal_k(10, &budget);
        for other in 1..=10 {
            assert!(mech2_worst_case_variance(10, k, &budget) <= mech2_worst_case_variance(10, other, &budget));
        }
    }
}
