//! Exact set sizes and constants of the sign-vector mechanism.
//!
//! With `v ∈ {-1,1}^d` fixed, an output `x* ∈ {-B,B}^d` is classified by the
//! number `a` of coordinates where `x*` and `v` agree in sign:
//! `x*·v = B(2a − d)`. `T⁺(v)` collects the outputs with `x*·v > 0` (strict
//! rule) or `x*·v ≥ 0` (inclusive rule); `T⁻(v)` is the complement. Both
//! sizes are independent of `v`.

use serde::{Deserialize, Serialize};

use crate::budget::PrivacyBudget;
use crate::error::{LdpError, Result};

/// Largest dimension with exact 64-bit set sizes.
pub const MAX_DIMS: usize = 62;

/// How outputs orthogonal to `v` (possible only for even `d`) are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// `T⁺ = {x*·v > 0}`, `T⁻ = {x*·v ≤ 0}`.
    #[default]
    Strict,
    /// `T⁺ = {x*·v ≥ 0}`, `T⁻ = {x*·v < 0}`.
    Inclusive,
}

impl TieRule {
    /// Smallest agreement count that puts an output in `T⁺`.
    pub fn min_plus_agreement(self, d: usize) -> usize {
        match self {
            TieRule::Strict => d / 2 + 1,
            TieRule::Inclusive => d.div_ceil(2),
        }
    }
}

/// `binom(n, r)` in exact integer arithmetic; `None` on overflow.
pub fn binomial(n: u64, r: u64) -> Option<u64> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

fn check_dims(d: usize) -> Result<()> {
    if d == 0 {
        return Err(LdpError::InvalidArgument("dimension must be at least 1".into()));
    }
    if d > MAX_DIMS {
        return Err(LdpError::Overflow(format!(
            "set sizes for d = {d} (supported up to d = {MAX_DIMS})"
        )));
    }
    Ok(())
}

/// `C_d`: `2^(d−1)` for odd `d`, `2^(d−1) − binom(d, d/2)/2` for even `d`.
/// Equals `|T⁺|` under the strict rule.
pub fn compute_cd(d: usize) -> Result<u64> {
    check_dims(d)?;
    let half = 1u64 << (d - 1);
    if d % 2 == 1 {
        Ok(half)
    } else {
        let middle = binomial(d as u64, d as u64 / 2)
            .ok_or_else(|| LdpError::Overflow(format!("binom({d}, {})", d / 2)))?;
        Ok(half - middle / 2)
    }
}

/// `(|T⁺|, |T⁻|)` for the given rule.
pub fn set_sizes(d: usize, rule: TieRule) -> Result<(u64, u64)> {
    let cd = compute_cd(d)?;
    let total = 1u64 << d;
    Ok(match rule {
        TieRule::Strict => (cd, total - cd),
        TieRule::Inclusive => (total - cd, cd),
    })
}

/// Largest δ (exclusive) for which the mechanism is well defined:
/// `α < 1` requires `|T⁺|·δ < 1`.
pub fn max_admissible_delta(d: usize, rule: TieRule) -> Result<f64> {
    let (plus, _) = set_sizes(d, rule)?;
    Ok(1.0 / plus as f64)
}

fn check_admissible(d: usize, plus: u64, budget: &PrivacyBudget) -> Result<()> {
    if plus as f64 * budget.delta() >= 1.0 {
        return Err(LdpError::ConstraintViolated(format!(
            "|T+|·δ = {}·{} >= 1 at d = {d}",
            plus,
            budget.delta()
        )));
    }
    Ok(())
}

/// `binom(d−1, ⌊d/2⌋)`: the per-coordinate agreement surplus of `T⁺`.
fn centre_binomial(d: usize) -> Result<u64> {
    binomial(d as u64 - 1, d as u64 / 2).ok_or_else(|| LdpError::Overflow(format!("binom({}, {})", d - 1, d / 2)))
}

/// Output magnitude `B` under the strict rule:
/// `(2^d + C_d(e^ε − 1)) / (binom(d−1, ⌊d/2⌋)·(e^ε + 2^d·δ − 1))`.
pub fn compute_b(d: usize, budget: &PrivacyBudget) -> Result<f64> {
    compute_b_with_rule(d, budget, TieRule::Strict)
}

/// Output magnitude making the mechanism unbiased under either rule:
/// `(|T⁺|e^ε + |T⁻|) / (binom(d−1, ⌊d/2⌋)·(e^ε + 2^d·δ − 1))`.
/// For the strict rule the numerator is `2^d + C_d(e^ε − 1)`.
pub fn compute_b_with_rule(d: usize, budget: &PrivacyBudget, rule: TieRule) -> Result<f64> {
    let (plus, minus) = set_sizes(d, rule)?;
    check_admissible(d, plus, budget)?;
    let e = budget.exp_epsilon();
    let two_d = (1u64 << d) as f64;
    let numerator = plus as f64 * e + minus as f64;
    let denominator = centre_binomial(d)? as f64 * (e + two_d * budget.delta() - 1.0);
    Ok(numerator / denominator)
}

/// Probability `α` of reporting from `T⁺`, chosen so that
/// `α/|T⁺| = e^ε(1 − α)/|T⁻| + δ`:
/// `α = (|T⁺|e^ε + |T⁺||T⁻|δ) / (|T⁺|e^ε + |T⁻|)`.
///
/// Strict rule: odd `d` gives `(e^ε + C_dδ)/(e^ε + 1)`, even `d` gives
/// `(e^εC_d + δC_d(2^d − C_d))/((e^ε − 1)C_d + 2^d)`. Inclusive rule, even
/// `d`: `(e^ε(2^d − C_d) + δC_d(2^d − C_d))/(e^ε(2^d − C_d) + C_d)`.
pub fn compute_alpha(d: usize, budget: &PrivacyBudget, rule: TieRule) -> Result<f64> {
    let (plus, minus) = set_sizes(d, rule)?;
    check_admissible(d, plus, budget)?;
    Ok(alpha_for_sizes(plus, minus, budget.exp_epsilon(), budget.delta()))
}

pub(crate) fn alpha_for_sizes(plus: u64, minus: u64, exp_eps: f64, delta: f64) -> f64 {
    let (p, m) = (plus as f64, minus as f64);
    (p * exp_eps + p * m * delta) / (p * exp_eps + m)
}
