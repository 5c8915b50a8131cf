//! The pure-LDP sign-vector baseline and its two corrected variants.
//!
//! All three share the sign-vector construction and δ = 0. They differ in
//! the probability of reporting from `T⁺`:
//! * `Original` always uses `e^ε/(e^ε + 1)`, which is only private for odd `d`;
//! * `FixedStrict` uses `e^ε|T⁺|/(e^ε|T⁺| + |T⁻|)` with the strict sets;
//! * `FixedInclusive` does the same with the inclusive sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::combinatorics::{set_sizes, TieRule};
use super::mech1::{mech1_perturb, pure_alpha, Mech1Params};
use super::{MechanismTag, NumericReport};
use crate::budget::PrivacyBudget;
use crate::error::{LdpError, Result};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DuchiVariant {
    #[default]
    Original,
    FixedStrict,
    FixedInclusive,
}

impl DuchiVariant {
    pub const ALL: [DuchiVariant; 3] = [Self::Original, Self::FixedStrict, Self::FixedInclusive];

    pub fn tie_rule(self) -> TieRule {
        match self {
            Self::FixedInclusive => TieRule::Inclusive,
            _ => TieRule::Strict,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Original => "original",
            Self::FixedStrict => "fixed-strict",
            Self::FixedInclusive => "fixed-inclusive",
        }
    }
}

impl fmt::Display for DuchiVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DuchiVariant {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s.trim().to_ascii_lowercase().replace('_', "-"))
            .ok_or_else(|| LdpError::InvalidArgument(format!("unknown variant '{s}'")))
    }
}

pub fn duchi_alpha(d: usize, epsilon: f64, variant: DuchiVariant) -> Result<f64> {
    let e = PrivacyBudget::pure(epsilon)?.exp_epsilon();
    Ok(match variant {
        DuchiVariant::Original => {
            set_sizes(d, TieRule::Strict)?;
            e / (e + 1.0)
        }
        _ => {
            let (plus, minus) = set_sizes(d, variant.tie_rule())?;
            pure_alpha(plus, minus, e)
        }
    })
}

pub fn duchi_params(d: usize, epsilon: f64, variant: DuchiVariant) -> Result<Mech1Params> {
    let budget = PrivacyBudget::pure(epsilon)?;
    let alpha = duchi_alpha(d, epsilon, variant)?;
    // The original keeps the strict-rule scale even where its α is off.
    Mech1Params::assemble(d, budget, variant.tie_rule(), alpha, MechanismTag::Duchi)
}

pub fn duchi_perturb(
    x: &[f64],
    epsilon: f64,
    rng: &mut RandomSource,
    variant: DuchiVariant,
) -> Result<NumericReport> {
    let params = duchi_params(x.len(), epsilon, variant)?;
    mech1_perturb(x, &params, rng)
}
