//! Analytic per-report variances over a budget grid.

use serde::Serialize;

use crate::budget::validate_budget;
use crate::calibration::optimal_sigma;
use crate::categorical::{olh_optimal_g, var_star_grr, var_star_lh, var_star_sprr};
use crate::error::Result;
use crate::numeric::{
    compute_b, mech2_worst_case_variance, numeric_sensitivity, onedim_magnitude, optimal_k, set_sizes, TieRule,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    /// `numeric` or `categorical`.
    pub family: &'static str,
    pub mechanism: String,
    pub epsilon: f64,
    pub delta: f64,
    /// `d` for numeric rows, `k` for GRR, the chosen `g` for OLH, 0 otherwise.
    pub size: u32,
    /// Worst-case variance of one report (one coordinate for numeric rows,
    /// one estimated count with `N = 1` for categorical rows).
    pub variance: f64,
}

/// Numeric rows: the two-point mechanism, the sign-vector mechanism and the
/// sampled-dimension mechanism for each `d` in `dims`, and Gaussian noise
/// calibrated to sensitivity `2√d`. Categorical rows: GRR for each `k` in
/// `domains`, SPRR, OLH and Gaussian noise with sensitivity `√2`. Gaussian
/// rows are omitted when `δ = 0`; sign-vector rows when `δ` is inadmissible.
pub fn emit_variance_table(
    epsilons: &[f64],
    deltas: &[f64],
    dims: &[u32],
    domains: &[u32],
) -> Result<Vec<VarianceRow>> {
    let mut rows = Vec::new();
    for &delta in deltas {
        for &eps in epsilons {
            let budget = validate_budget(eps, delta)?;
            let mut push = |family, mechanism: &str, size, variance| {
                rows.push(VarianceRow {
                    family,
                    mechanism: mechanism.to_string(),
                    epsilon: eps,
                    delta,
                    size,
                    variance,
                })
            };
            push("numeric", "onedim", 1, onedim_magnitude(&budget).powi(2));
            for &d in dims {
                let du = d as usize;
                let (plus, _) = set_sizes(du, TieRule::Strict)?;
                if (plus as f64) * delta < 1.0 {
                    push("numeric", "mech1", d, compute_b(du, &budget)?.powi(2));
                }
                push(
                    "numeric",
                    "mech2",
                    d,
                    mech2_worst_case_variance(du, optimal_k(du, eps), &budget),
                );
                if delta > 0.0 {
                    push("numeric", "opt-gm", d, optimal_sigma(budget, numeric_sensitivity(du))?.variance());
                }
            }
            for &k in domains {
                push("categorical", "grr", k, var_star_grr(&budget, k, 1));
            }
            push("categorical", "sprr", 0, var_star_sprr(&budget, 1));
            let g = olh_optimal_g(&budget);
            push("categorical", "olh", g, var_star_lh(&budget, g, 1));
            if delta > 0.0 {
                push(
                    "categorical",
                    "opt-gm",
                    0,
                    optimal_sigma(budget, std::f64::consts::SQRT_2)?.variance(),
                );
            }
        }
    }
    Ok(rows)
}
