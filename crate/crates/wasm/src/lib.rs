//! Browser bindings: variance curves, exact output distributions of the
//! sign-vector mechanism, and a small mean-estimation simulation.

use ldpkit::calibration::optimal_sigma;
use ldpkit::numeric::exact::{mech1_output_distribution, output_vertex, EXACT_MAX_DIMS};
use ldpkit::numeric::{
    compute_b, mech2_worst_case_variance, numeric_sensitivity, onedim_magnitude, optimal_k, Mech1Params,
    NumericMechanism, TieRule,
};
use ldpkit::{validate_budget, RandomSource};
use wasm_bindgen::prelude::*;

/// Largest population the simulation accepts.
pub const MAX_SIMULATED_USERS: usize = 1_000_000;

/// Per-coordinate worst-case variances on `points` values of ε spread
/// evenly over `[eps_min, eps_max]`. Row-major, five numbers per point:
/// `ε, two-point, sign-vector, sampled-dimension, Gaussian` (NaN where a
/// mechanism is unavailable).
pub fn variance_curves(eps_min: f64, eps_max: f64, points: usize, delta: f64, d: usize) -> Result<Vec<f64>, String> {
    if !(eps_min > 0.0 && eps_max >= eps_min) || points < 2 || d == 0 {
        return Err("need 0 < eps_min <= eps_max, at least two points and d >= 1".into());
    }
    let mut out = Vec::with_capacity(points * 5);
    for i in 0..points {
        let eps = eps_min + (eps_max - eps_min) * i as f64 / (points - 1) as f64;
        let budget = validate_budget(eps, delta).map_err(|e| e.to_string())?;
        out.push(eps);
        out.push(onedim_magnitude(&budget).powi(2));
        out.push(compute_b(d, &budget).map_or(f64::NAN, |b| b * b));
        out.push(mech2_worst_case_variance(d, optimal_k(d, eps), &budget));
        out.push(if delta > 0.0 {
            optimal_sigma(budget, numeric_sensitivity(d)).map_or(f64::NAN, |c| c.variance())
        } else {
            f64::NAN
        });
    }
    Ok(out)
}

/// Exact output distribution of the sign-vector mechanism at `x`: for
/// every output vertex, its `d` coordinates followed by its probability.
pub fn mech1_distribution(x: &[f64], eps: f64, delta: f64, inclusive: bool) -> Result<Vec<f64>, String> {
    let d = x.len();
    if d == 0 || d > EXACT_MAX_DIMS.min(8) {
        return Err(format!("dimension must be between 1 and {}", EXACT_MAX_DIMS.min(8)));
    }
    let rule = if inclusive { TieRule::Inclusive } else { TieRule::Strict };
    let budget = validate_budget(eps, delta).map_err(|e| e.to_string())?;
    let params = Mech1Params::new(d, budget, rule).map_err(|e| e.to_string())?;
    let dist = mech1_output_distribution(&params, x).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(dist.len() * (d + 1));
    for (y, p) in dist.iter().enumerate() {
        out.extend(output_vertex(&params, y as u32));
        out.push(*p);
    }
    Ok(out)
}

/// Perturbs `n` copies of a random tuple with per-coordinate means
/// `means` and returns `[true means…, estimated means…]`.
pub fn simulate_mean(mechanism: &str, means: &[f64], n: usize, eps: f64, delta: f64, seed: u64) -> Result<Vec<f64>, String> {
    let d = means.len();
    if d == 0 || n == 0 || n > MAX_SIMULATED_USERS {
        return Err(format!("need d >= 1 and 1 <= n <= {MAX_SIMULATED_USERS}"));
    }
    if means.iter().any(|m| !(-1.0..=1.0).contains(m)) {
        return Err("means must lie in [-1, 1]".into());
    }
    let mechanism: NumericMechanism = mechanism.parse().map_err(|e: ldpkit::LdpError| e.to_string())?;
    let budget = validate_budget(eps, delta).map_err(|e| e.to_string())?;
    let prepared = mechanism.prepare(d, budget).map_err(|e| e.to_string())?;
    // Each user holds ±1 per coordinate with the requested mean.
    let mut sums = vec![0.0; d];
    let mut truth = vec![0.0; d];
    let mut x = vec![0.0; d];
    let mut report = vec![0.0; d];
    let mut data_rng = RandomSource::with_stream(seed, 0);
    for user in 0..n {
        for (xj, &m) in x.iter_mut().zip(means) {
            *xj = if data_rng.bernoulli((1.0 + m) / 2.0) { 1.0 } else { -1.0 };
        }
        prepared.perturb_into(&x, &mut RandomSource::for_user(seed, user as u64 + 1), &mut report);
        for j in 0..d {
            truth[j] += x[j];
            sums[j] += report[j];
        }
    }
    let n = n as f64;
    Ok(truth.iter().chain(&sums).map(|s| s / n).collect())
}

#[wasm_bindgen(js_name = varianceCurves)]
pub fn variance_curves_js(eps_min: f64, eps_max: f64, points: usize, delta: f64, d: usize) -> Result<Vec<f64>, JsError> {
    variance_curves(eps_min, eps_max, points, delta, d).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = mech1Distribution)]
pub fn mech1_distribution_js(x: Vec<f64>, eps: f64, delta: f64, inclusive: bool) -> Result<Vec<f64>, JsError> {
    mech1_distribution(&x, eps, delta, inclusive).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = simulateMean)]
pub fn simulate_mean_js(
    mechanism: &str,
    means: Vec<f64>,
    n: usize,
    eps: f64,
    delta: f64,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    simulate_mean(mechanism, &means, n, eps, delta, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_have_five_columns() {
        let c = variance_curves(0.5, 4.0, 8, 1e-4, 3).unwrap();
        assert_eq!(c.len(), 40);
        assert_eq!(c[0], 0.5);
        assert_eq!(c[35], 4.0);
        let e = 0.5f64.exp();
        assert!((c[1] - ((e + 1.0) / (e + 2e-4 - 1.0)).powi(2)).abs() < 1e-12);
        assert!(variance_curves(0.0, 1.0, 4, 0.0, 1).is_err());
        assert!(variance_curves(1.0, 2.0, 4, 0.0, 1).unwrap()[4].is_nan());
    }

    #[test]
    fn distribution_is_normalised() {
        let out = mech1_distribution(&[0.2, -0.5, 1.0], 1.0, 1e-3, false).unwrap();
        assert_eq!(out.len(), 8 * 4);
        let total: f64 = out.chunks(4).map(|c| c[3]).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean0: f64 = out.chunks(4).map(|c| c[0] * c[3]).sum();
        assert!((mean0 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn simulation_tracks_truth() {
        let out = simulate_mean("mech2", &[0.3, -0.2], 100_000, 4.0, 1e-6, 7).unwrap();
        for j in 0..2 {
            assert!((out[j] - out[j + 2]).abs() < 0.03, "{out:?}");
        }
        assert_eq!(out, simulate_mean("mech2", &[0.3, -0.2], 100_000, 4.0, 1e-6, 7).unwrap());
        assert!(simulate_mean("laplace", &[0.0], 10, 1.0, 0.0, 1).is_err());
    }
}
