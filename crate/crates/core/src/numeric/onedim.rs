//! Two-point mechanism for a single value in `[-1, 1]`.

use serde::Serialize;

use crate::budget::PrivacyBudget;
use crate::data::clamp_to_domain;
use crate::error::Result;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneDimParams {
    pub budget: PrivacyBudget,
    /// Output magnitude `(e^ε + 1)/(e^ε + 2δ − 1)`.
    pub magnitude: f64,
}

impl OneDimParams {
    pub fn new(budget: PrivacyBudget) -> Self {
        Self {
            budget,
            magnitude: onedim_magnitude(&budget),
        }
    }

    /// `P[x* = +magnitude | x] = x(e^ε + 2δ − 1)/(2(e^ε + 1)) + 1/2`.
    pub fn positive_probability(&self, x: f64) -> f64 {
        0.5 + 0.5 * x / self.magnitude
    }

    /// `magnitude² − x²`; the worst case is `magnitude²` at `x = 0`.
    pub fn variance(&self, x: f64) -> f64 {
        self.magnitude * self.magnitude - x * x
    }

    pub fn worst_case_variance(&self) -> f64 {
        self.magnitude * self.magnitude
    }

    pub(crate) fn sample(&self, x: f64, rng: &mut RandomSource) -> f64 {
        if rng.bernoulli(self.positive_probability(x)) {
            self.magnitude
        } else {
            -self.magnitude
        }
    }
}

pub fn onedim_magnitude(budget: &PrivacyBudget) -> f64 {
    let e = budget.exp_epsilon();
    (e + 1.0) / (e + 2.0 * budget.delta() - 1.0)
}

/// Perturbs one value; the output is `±(e^ε + 1)/(e^ε + 2δ − 1)`.
pub fn onedim_perturb(x: f64, budget: &PrivacyBudget, rng: &mut RandomSource) -> Result<f64> {
    let x = clamp_to_domain(0, x)?;
    Ok(OneDimParams::new(*budget).sample(x, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::validate_budget;

    #[test]
    fn positive_probability_examples() {
        let p = OneDimParams::new(validate_budget(0.7, 0.01).unwrap());
        assert_eq!(p.positive_probability(0.0), 0.5);
        for eps in [0.1, 1.0, 3.0] {
            let p = OneDimParams::new(validate_budget(eps, 0.0).unwrap());
            let e = f64::exp(eps);
            assert!((p.positive_probability(1.0) - e / (e + 1.0)).abs() < 1e-15);
            assert!((p.positive_probability(-1.0) - 1.0 / (e + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn probability_matches_closed_form() {
        let budget = validate_budget(1.2, 0.03).unwrap();
        let p = OneDimParams::new(budget);
        let e = budget.exp_epsilon();
        for x in [-1.0, -0.4, 0.25, 1.0] {
            let expected = x * (e + 2.0 * 0.03 - 1.0) / (2.0 * (e + 1.0)) + 0.5;
            assert!((p.positive_probability(x) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_mean_and_variance() {
        let p = OneDimParams::new(validate_budget(0.9, 1e-3).unwrap());
        for x in [-1.0, -0.3, 0.0, 0.6, 1.0] {
            let pp = p.positive_probability(x);
            let mean = p.magnitude * pp - p.magnitude * (1.0 - pp);
            assert!((mean - x).abs() < 1e-12);
            let var = p.magnitude * p.magnitude - mean * mean;
            assert!((var - p.variance(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn output_is_two_point() {
        let budget = validate_budget(1.0, 1e-6).unwrap();
        let m = onedim_magnitude(&budget);
        let mut rng = RandomSource::new(2);
        for _ in 0..1000 {
            let y = onedim_perturb(0.3, &budget, &mut rng).unwrap();
            assert!(y == m || y == -m);
        }
        assert!(onedim_perturb(1.2, &budget, &mut rng).is_err());
    }
}
