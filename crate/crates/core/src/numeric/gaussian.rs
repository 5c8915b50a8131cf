//! Additive Gaussian noise baseline for numeric tuples.

use super::{check_tuple, MechanismTag, NumericReport};
use crate::error::{LdpError, Result};
use crate::rng::RandomSource;

/// ℓ₂ diameter of `[-1, 1]^d`, i.e. `2√d`.
pub fn numeric_sensitivity(d: usize) -> f64 {
    2.0 * (d as f64).sqrt()
}

/// Adds independent `N(0, σ²)` noise to every coordinate. Outputs are not clamped.
pub fn gaussian_perturb_numeric(x: &[f64], sigma: f64, rng: &mut RandomSource) -> Result<NumericReport> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(LdpError::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let x = check_tuple(x, x.len())?;
    let values = x.iter().map(|&v| v + sigma * rng.standard_normal()).collect();
    Ok(NumericReport {
        values,
        mechanism: MechanismTag::Gaussian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_sigma_returns_input() {
        let mut rng = RandomSource::new(1);
        let r = gaussian_perturb_numeric(&[0.3, -0.7], 1e-300, &mut rng).unwrap();
        assert_eq!(r.values, vec![0.3, -0.7]);
        assert!(gaussian_perturb_numeric(&[0.0], 0.0, &mut rng).is_err());
    }

    #[test]
    fn mean_and_variance() {
        let mut rng = RandomSource::new(77);
        let n = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let v = gaussian_perturb_numeric(&[0.3], 1.0, &mut rng).unwrap().values[0];
            sum += v;
            sq += v * v;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!((mean - 0.3).abs() < 3.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn sensitivity_is_diameter() {
        assert_eq!(numeric_sensitivity(1), 2.0);
        assert!((numeric_sensitivity(4) - 4.0).abs() < 1e-15);
    }
}
