//! Noise scale of the optimal Gaussian mechanism.
//!
//! For budget `(ε, δ)` and ℓ₂ sensitivity `Δ`, the smallest σ is
//! `(ξ + √(ξ² + ε))·Δ/(ε√2)` where `ξ` solves
//! `erfc(ξ) − e^ε·erfc(√(ξ² + ε)) = 2δ`.

use serde::Serialize;

use crate::budget::PrivacyBudget;
use crate::error::{LdpError, Result};

/// Bracket expansion stops once `|ξ|` would exceed this.
pub const XI_LIMIT: f64 = 50.0;
const BISECTION_WIDTH: f64 = 1e-14;
const BISECTION_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianCalibration {
    pub xi: f64,
    pub sigma: f64,
    pub sensitivity: f64,
    pub budget: PrivacyBudget,
}

impl GaussianCalibration {
    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Left side minus right side of the calibration equation.
pub fn calibration_residual(xi: f64, budget: &PrivacyBudget) -> f64 {
    let eps = budget.epsilon();
    erfc(xi) - budget.exp_epsilon() * erfc((xi * xi + eps).sqrt()) - 2.0 * budget.delta()
}

fn require_positive_delta(budget: &PrivacyBudget) -> Result<()> {
    if budget.delta() <= 0.0 {
        return Err(LdpError::InvalidBudget(
            "Gaussian calibration needs delta > 0".to_string(),
        ));
    }
    Ok(())
}

/// Root of the calibration equation. The residual is strictly decreasing in
/// `ξ`, positive as `ξ → −∞` and equal to `−2δ` as `ξ → +∞`.
pub fn solve_xi(budget: &PrivacyBudget) -> Result<f64> {
    solve_xi_from(budget, 1.0)
}

/// [`solve_xi`] with an explicit initial bracket `[−half_width, half_width]`.
pub fn solve_xi_from(budget: &PrivacyBudget, half_width: f64) -> Result<f64> {
    require_positive_delta(budget)?;
    let f = |xi: f64| calibration_residual(xi, budget);
    let mut width = half_width.clamp(f64::MIN_POSITIVE, XI_LIMIT);
    let (mut lo, mut hi) = (-width, width);
    while !(f(lo) >= 0.0 && f(hi) <= 0.0) {
        if width >= XI_LIMIT {
            return Err(LdpError::NoRootInBracket { limit: XI_LIMIT });
        }
        width = (width * 2.0).min(XI_LIMIT);
        lo = -width;
        hi = width;
    }
    for _ in 0..BISECTION_MAX_ITERS {
        if hi - lo <= BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Return whichever end has the smaller residual.
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// `σ = (ξ + √(ξ² + ε))·Δ/(ε√2)`.
pub fn optimal_sigma(budget: PrivacyBudget, sensitivity: f64) -> Result<GaussianCalibration> {
    if !(sensitivity.is_finite() && sensitivity > 0.0) {
        return Err(LdpError::InvalidArgument(format!(
            "sensitivity must be positive, got {sensitivity}"
        )));
    }
    let xi = solve_xi(&budget)?;
    let eps = budget.epsilon();
    let sigma = (xi + (xi * xi + eps).sqrt()) * sensitivity / (eps * std::f64::consts::SQRT_2);
    Ok(GaussianCalibration {
        xi,
        sigma,
        sensitivity,
        budget,
    })
}

/// The textbook calibration `Δ√(2 ln(1.25/δ))/ε`.
pub fn classical_sigma(budget: &PrivacyBudget, sensitivity: f64) -> Result<f64> {
    require_positive_delta(budget)?;
    Ok(sensitivity * (2.0 * (1.25 / budget.delta()).ln()).sqrt() / budget.epsilon())
}

/// Largest single-event privacy loss gap of Gaussian noise at scale σ for
/// two inputs at distance Δ: `Φ(Δ/2σ − εσ/Δ) − e^ε·Φ(−Δ/2σ − εσ/Δ)`.
/// A calibration is valid when this is at most δ.
pub fn gaussian_privacy_gap(sigma: f64, sensitivity: f64, budget: &PrivacyBudget) -> f64 {
    let a = sensitivity / (2.0 * sigma);
    let b = budget.epsilon() * sigma / sensitivity;
    normal_cdf(a - b) - budget.exp_epsilon() * normal_cdf(-a - b)
}
