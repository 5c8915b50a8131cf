use serde::Serialize;

use super::{Protocol, ProtocolParams};
use crate::budget::PrivacyBudget;
use crate::calibration::optimal_sigma;
use crate::error::Result;

/// Variance of an estimated count: the exact value at frequency `f` and the
/// frequency-free approximation (exact at `f = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceSummary {
    pub exact: f64,
    pub approx: f64,
}

/// `N·q(1−q)/(p−q)² + N·f·(1−p−q)/(p−q)` for support probabilities `p`, `q`.
pub fn count_variance(p: f64, q: f64, n: f64, f: f64) -> f64 {
    n * q * (1.0 - q) / ((p - q) * (p - q)) + n * f * (1.0 - p - q) / (p - q)
}

pub fn analytic_variance(params: &ProtocolParams, n: u64, f: f64) -> VarianceSummary {
    let n = n as f64;
    match params.protocol {
        Protocol::OptGm => {
            let s = params.sigma.unwrap_or(f64::NAN);
            VarianceSummary {
                exact: n * s * s,
                approx: n * s * s,
            }
        }
        _ => VarianceSummary {
            exact: count_variance(params.p_star, params.q_star, n, f),
            approx: count_variance(params.p_star, params.q_star, n, 0.0),
        },
    }
}

pub fn var_star_grr(budget: &PrivacyBudget, k: u32, n: u64) -> f64 {
    let (e, d, k) = (budget.exp_epsilon(), budget.delta(), f64::from(k));
    n as f64 * (e + k - 2.0 + d) * (1.0 - d) / (e + k * d - 1.0).powi(2)
}

pub fn var_star_prr(budget: &PrivacyBudget, q: f64, n: u64) -> f64 {
    let (e, d) = (budget.exp_epsilon(), budget.delta());
    n as f64 * q * (1.0 - q) * (1.0 - q + q * e).powi(2) / (q * (1.0 - q) * (e - 1.0) + d).powi(2)
}

pub fn var_star_sprr(budget: &PrivacyBudget, n: u64) -> f64 {
    let e = budget.exp_epsilon();
    let r = (e * (1.0 - budget.delta()) + budget.delta()).sqrt();
    n as f64 * (r - 1.0) * (e - r) / (e - 2.0 * r + 1.0).powi(2)
}

pub fn var_star_lh(budget: &PrivacyBudget, g: u32, n: u64) -> f64 {
    let (e, d, g) = (budget.exp_epsilon(), budget.delta(), f64::from(g));
    n as f64 * (e + g - 1.0).powi(2) / ((g - 1.0) * (e + g * d - 1.0).powi(2))
}

/// `N·σ²` with σ calibrated to sensitivity `√2`.
pub fn var_star_optgm(budget: &PrivacyBudget, n: u64) -> Result<f64> {
    let s = optimal_sigma(*budget, std::f64::consts::SQRT_2)?.sigma;
    Ok(n as f64 * s * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::validate_budget;
    use crate::categorical::{grr_params, lh_params, olh_optimal_g, optgm_params, prr_params, sprr_params};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn closed_forms_match_generic() {
        for (eps, delta) in [(0.5, 0.0), (1.0, 1e-6), (3.0, 1e-3), (8.0, 0.01)] {
            let b = validate_budget(eps, delta).unwrap();
            for k in [2u32, 10, 100] {
                let p = grr_params(k, b).unwrap();
                assert!(rel(analytic_variance(&p, 1000, 0.0).approx, var_star_grr(&b, k, 1000)) < 1e-12);
            }
            let q = 0.2;
            let p = prr_params(4, b, q).unwrap();
            assert!(rel(analytic_variance(&p, 1000, 0.0).approx, var_star_prr(&b, q, 1000)) < 1e-12);
            let p = sprr_params(4, b).unwrap();
            assert!(rel(analytic_variance(&p, 1000, 0.0).approx, var_star_sprr(&b, 1000)) < 1e-10);
            for g in [2u32, 5, 50] {
                let p = lh_params(100, b, g).unwrap();
                assert!(rel(analytic_variance(&p, 1000, 0.0).approx, var_star_lh(&b, g, 1000)) < 1e-12);
            }
        }
    }

    #[test]
    fn sprr_exact_equals_approx() {
        let p = sprr_params(8, validate_budget(2.0, 1e-5).unwrap()).unwrap();
        for f in [0.0, 0.1, 0.7, 1.0] {
            let v = analytic_variance(&p, 5000, f);
            assert!(rel(v.exact, v.approx) < 1e-12);
        }
    }

    #[test]
    fn grr_k2_example() {
        let p = grr_params(2, validate_budget(3f64.ln(), 0.0).unwrap()).unwrap();
        assert!((analytic_variance(&p, 1, 0.0).approx - 0.75).abs() < 1e-14);
    }

    #[test]
    fn ordering_at_moderate_epsilon() {
        for eps in [2.0, 4.0, 6.0, 8.0, 10.0] {
            let b = validate_budget(eps, 1e-6).unwrap();
            let olh = var_star_lh(&b, olh_optimal_g(&b), 1);
            let sprr = var_star_sprr(&b, 1);
            let gm = var_star_optgm(&b, 1).unwrap();
            assert!(olh <= sprr && sprr <= gm, "ε={eps}: {olh} {sprr} {gm}");
        }
    }

    #[test]
    fn optgm_variance() {
        let b = validate_budget(1.0, 1e-6).unwrap();
        let p = optgm_params(5, b).unwrap();
        let s = p.sigma.unwrap();
        assert_eq!(analytic_variance(&p, 10, 0.3).exact, 10.0 * s * s);
    }
}
