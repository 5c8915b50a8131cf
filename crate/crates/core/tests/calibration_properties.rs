use ldpkit::calibration::{calibration_residual, normal_cdf, optimal_sigma, solve_xi, solve_xi_from};
use ldpkit::validate_budget;
use proptest::prelude::*;

/// Privacy loss of Gaussian noise between two inputs at distance Δ.
fn two_point_gap(sigma: f64, sensitivity: f64, eps: f64) -> f64 {
    let a = sensitivity / (2.0 * sigma);
    let b = eps * sigma / sensitivity;
    normal_cdf(a - b) - eps.exp() * normal_cdf(-a - b)
}

#[test]
fn two_point_test_on_grid() {
    for eps in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
        for delta in [1e-8, 1e-6, 1e-4, 1e-2] {
            for sensitivity in [std::f64::consts::SQRT_2, 2.0, 2.0 * 10f64.sqrt()] {
                let cal = optimal_sigma(validate_budget(eps, delta).unwrap(), sensitivity).unwrap();
                let gap = two_point_gap(cal.sigma, sensitivity, eps);
                assert!(gap <= delta + 1e-10, "eps={eps} delta={delta}: {gap}");
                assert!(gap >= delta - 1e-10, "calibration is tight: {gap} vs {delta}");
            }
        }
    }
}

proptest! {
    #[test]
    fn residual_and_sigma_formula(eps in 0.01f64..20.0, log_delta in -12.0f64..-0.5, sensitivity in 0.1f64..10.0) {
        let budget = validate_budget(eps, 10f64.powf(log_delta)).unwrap();
        let cal = optimal_sigma(budget, sensitivity).unwrap();
        prop_assert!(calibration_residual(cal.xi, &budget).abs() <= 1e-12);
        let expected = (cal.xi + (cal.xi * cal.xi + eps).sqrt()) * sensitivity / (eps * 2f64.sqrt());
        prop_assert!((cal.sigma - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn root_is_bracket_independent(eps in 0.05f64..10.0, log_delta in -10.0f64..-1.0, half_width in 0.01f64..40.0) {
        let budget = validate_budget(eps, 10f64.powf(log_delta)).unwrap();
        let a = solve_xi(&budget).unwrap();
        let b = solve_xi_from(&budget, half_width).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }
}
