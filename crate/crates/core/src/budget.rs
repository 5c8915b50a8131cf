use serde::{Deserialize, Serialize};

use crate::error::{LdpError, Result};

/// The pair (ε, δ) every mechanism is parameterised by.
///
/// Invariant: `epsilon > 0` and `0 <= delta < 1`. A value can only be built
/// through [`validate_budget`] / [`PrivacyBudget::new`], so holding one means
/// the bounds were checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
}

pub fn validate_budget(epsilon: f64, delta: f64) -> Result<PrivacyBudget> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(LdpError::InvalidBudget(format!(
            "epsilon must be a finite positive number, got {epsilon}"
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(LdpError::InvalidBudget(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    Ok(PrivacyBudget { epsilon, delta })
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        validate_budget(epsilon, delta)
    }

    /// Pure ε-LDP budget (δ = 0).
    pub fn pure(epsilon: f64) -> Result<Self> {
        validate_budget(epsilon, 0.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn exp_epsilon(&self) -> f64 {
        self.epsilon.exp()
    }

    /// Even share (ε/k, δ/k) used when k independent sub-mechanisms compose.
    pub fn split(&self, parts: usize) -> Self {
        assert!(parts >= 1, "cannot split a budget into zero parts");
        let k = parts as f64;
        Self {
            epsilon: self.epsilon / k,
            delta: self.delta / k,
        }
    }
}

impl std::fmt::Display for PrivacyBudget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(ε={}, δ={})", self.epsilon, self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_in_range() {
        let b = validate_budget(1.0, 1e-6).unwrap();
        assert_eq!(b.epsilon(), 1.0);
        assert_eq!(b.delta(), 1e-6);
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let err = validate_budget(0.0, 0.1).unwrap_err();
        assert!(matches!(err, LdpError::InvalidBudget(ref m) if m.contains("epsilon")));
        assert!(validate_budget(-1.0, 0.0).is_err());
        assert!(validate_budget(f64::NAN, 0.0).is_err());
        assert!(validate_budget(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn rejects_delta_at_one() {
        let err = validate_budget(1.0, 1.0).unwrap_err();
        assert!(matches!(err, LdpError::InvalidBudget(ref m) if m.contains("delta")));
        assert!(validate_budget(1.0, -1e-9).is_err());
    }

    #[test]
    fn split_divides_both() {
        let b = validate_budget(3.0, 3e-6).unwrap().split(3);
        assert!((b.epsilon() - 1.0).abs() < 1e-15);
        assert!((b.delta() - 1e-6).abs() < 1e-21);
    }
}
