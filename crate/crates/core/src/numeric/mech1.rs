//! The sign-vector mechanism: discretise `x` to a random sign vector `v`,
//! then report a uniformly random vertex of `{-B, B}^d` from `T⁺(v)` with
//! probability `α` or from `T⁻(v)` otherwise.

use serde::Serialize;

use super::combinatorics::{
    alpha_for_sizes, binomial, compute_alpha, compute_b_with_rule, compute_cd, set_sizes, TieRule,
};
use super::{check_tuple, MechanismTag, NumericReport};
use crate::budget::PrivacyBudget;
use crate::error::Result;
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mech1Params {
    pub d: usize,
    pub budget: PrivacyBudget,
    pub tie_rule: TieRule,
    pub c_d: u64,
    pub b: f64,
    pub alpha: f64,
    pub plus_size: u64,
    pub minus_size: u64,
    #[serde(skip)]
    pub(crate) tag: MechanismTag,
    /// `binom(d, a)` for `a = 0..=d`.
    #[serde(skip)]
    binoms: Vec<u64>,
}

impl Mech1Params {
    pub fn new(d: usize, budget: PrivacyBudget, tie_rule: TieRule) -> Result<Self> {
        let alpha = compute_alpha(d, &budget, tie_rule)?;
        Self::assemble(d, budget, tie_rule, alpha, MechanismTag::Mech1)
    }

    pub(crate) fn assemble(
        d: usize,
        budget: PrivacyBudget,
        tie_rule: TieRule,
        alpha: f64,
        tag: MechanismTag,
    ) -> Result<Self> {
        let (plus_size, minus_size) = set_sizes(d, tie_rule)?;
        let b = compute_b_with_rule(d, &budget, tie_rule)?;
        let binoms = (0..=d as u64).map(|a| binomial(d as u64, a).expect("d <= 62")).collect();
        Ok(Self {
            d,
            budget,
            tie_rule,
            c_d: compute_cd(d)?,
            b,
            alpha,
            plus_size,
            minus_size,
            tag,
            binoms,
        })
    }

    pub fn tag(&self) -> MechanismTag {
        self.tag
    }

    /// Whether an output agreeing with `v` in `agreement` coordinates is in `T⁺(v)`.
    pub fn in_plus(&self, agreement: usize) -> bool {
        agreement >= self.tie_rule.min_plus_agreement(self.d)
    }

    /// Probability of one specific output vertex given `v`, as a function of
    /// how many coordinates agree.
    pub fn vertex_probability(&self, agreement: usize) -> f64 {
        if self.in_plus(agreement) {
            self.alpha / self.plus_size as f64
        } else {
            (1.0 - self.alpha) / self.minus_size as f64
        }
    }

    /// Per-coordinate worst-case variance `B² − x²` at `x = 0`.
    pub fn worst_case_variance(&self) -> f64 {
        self.b * self.b
    }

    /// Perturbs `x` (already validated) into `out`.
    pub(crate) fn perturb_into(&self, x: &[f64], rng: &mut RandomSource, out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.d);
        // out[j] holds −B·v_j: every coordinate starts out disagreeing.
        for (o, &xj) in out.iter_mut().zip(x) {
            let vj = if rng.bernoulli(0.5 + 0.5 * xj) { 1.0 } else { -1.0 };
            *o = -self.b * vj;
        }
        let from_plus = rng.bernoulli(self.alpha);
        let first_plus = self.tie_rule.min_plus_agreement(self.d);
        let (range, total) = if from_plus {
            (first_plus..=self.d, self.plus_size)
        } else {
            (0..=first_plus - 1, self.minus_size)
        };
        // Vertices with equal agreement are exchangeable: draw the agreement
        // count with weight binom(d, a), then the agreeing coordinates.
        let mut ticket = rng.below(total);
        let mut agreement = *range.end();
        for a in range {
            let w = self.binoms[a];
            if ticket < w {
                agreement = a;
                break;
            }
            ticket -= w;
        }
        let mut positions = [0u8; 64];
        for (j, p) in positions.iter_mut().enumerate().take(self.d) {
            *p = j as u8;
        }
        for &j in rng.choose_in_place(&mut positions[..self.d], agreement).iter() {
            out[j as usize] = -out[j as usize];
        }
    }
}

/// One report of the sign-vector mechanism.
pub fn mech1_perturb(x: &[f64], params: &Mech1Params, rng: &mut RandomSource) -> Result<NumericReport> {
    let x = check_tuple(x, params.d)?;
    let mut values = vec![0.0; params.d];
    params.perturb_into(&x, rng, &mut values);
    Ok(NumericReport {
        values,
        mechanism: params.tag,
    })
}

/// `α` that makes `α/|T⁺| = e^ε(1 − α)/|T⁻|` exactly, i.e. the pure-LDP
/// choice for the given set sizes.
pub(crate) fn pure_alpha(plus: u64, minus: u64, exp_eps: f64) -> f64 {
    alpha_for_sizes(plus, minus, exp_eps, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::validate_budget;

    #[test]
    fn outputs_are_vertices() {
        let params = Mech1Params::new(5, validate_budget(1.0, 1e-6).unwrap(), TieRule::Strict).unwrap();
        let mut rng = RandomSource::new(3);
        for _ in 0..200 {
            let r = mech1_perturb(&[0.1, -0.4, 0.9, 0.0, -1.0], &params, &mut rng).unwrap();
            assert_eq!(r.mechanism, MechanismTag::Mech1);
            assert!(r.values.iter().all(|&v| v == params.b || v == -params.b));
        }
    }

    #[test]
    fn vertex_input_fixes_v() {
        // x ∈ {−1,1}^d gives v = x, so agreement with x decides T⁺/T⁻ membership.
        let params = Mech1Params::new(3, validate_budget(2.0, 0.0).unwrap(), TieRule::Strict).unwrap();
        let x = [1.0, -1.0, 1.0];
        let mut rng = RandomSource::new(11);
        let n = 200_000;
        let mut plus = 0;
        for _ in 0..n {
            let r = mech1_perturb(&x, &params, &mut rng).unwrap();
            let agree = r.values.iter().zip(&x).filter(|(o, xi)| o.signum() == xi.signum()).count();
            plus += usize::from(params.in_plus(agree));
        }
        let freq = plus as f64 / n as f64;
        let se = (params.alpha * (1.0 - params.alpha) / n as f64).sqrt();
        assert!((freq - params.alpha).abs() < 4.0 * se, "freq {freq} alpha {}", params.alpha);
    }

    #[test]
    fn d1_zero_input_is_fair_coin() {
        let params = Mech1Params::new(1, validate_budget(1.5, 0.01).unwrap(), TieRule::Strict).unwrap();
        // α/2 + (1−α)/2 = 1/2 exactly
        let p_plus = 0.5 * params.alpha + 0.5 * (1.0 - params.alpha);
        assert!((p_plus - 0.5).abs() < 1e-15);
        let mut rng = RandomSource::new(5);
        let n = 100_000;
        let pos = (0..n)
            .filter(|_| mech1_perturb(&[0.0], &params, &mut rng).unwrap().values[0] > 0.0)
            .count();
        assert!((pos as f64 / n as f64 - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn agreement_counts_follow_binomial_profile() {
        // Inside T⁺ at d = 4 (strict), agreement 3 vs 4 occurs in ratio binom(4,3):binom(4,4) = 4:1.
        let params = Mech1Params::new(4, validate_budget(8.0, 0.0).unwrap(), TieRule::Strict).unwrap();
        let x = [1.0; 4];
        let mut rng = RandomSource::new(8);
        let (mut three, mut four) = (0u32, 0u32);
        for _ in 0..100_000 {
            let r = mech1_perturb(&x, &params, &mut rng).unwrap();
            match r.values.iter().filter(|&&v| v > 0.0).count() {
                3 => three += 1,
                4 => four += 1,
                _ => {}
            }
        }
        let ratio = f64::from(three) / f64::from(four);
        assert!((ratio - 4.0).abs() < 0.15, "ratio {ratio}");
    }

    #[test]
    fn rejects_wrong_dimension_and_domain() {
        let params = Mech1Params::new(2, validate_budget(1.0, 0.0).unwrap(), TieRule::Strict).unwrap();
        let mut rng = RandomSource::new(1);
        assert!(mech1_perturb(&[0.0], &params, &mut rng).is_err());
        assert!(mech1_perturb(&[0.0, 1.5], &params, &mut rng).is_err());
    }

    #[test]
    fn deterministic_replay() {
        let params = Mech1Params::new(6, validate_budget(1.0, 1e-5).unwrap(), TieRule::Inclusive).unwrap();
        let x = [0.3, -0.2, 0.0, 0.9, -0.9, 0.5];
        let a = mech1_perturb(&x, &params, &mut RandomSource::for_user(4, 17)).unwrap();
        let b = mech1_perturb(&x, &params, &mut RandomSource::for_user(4, 17)).unwrap();
        assert_eq!(a, b);
    }
}
