//! Perturbation of numeric tuples in `[-1, 1]^d`.

mod combinatorics;
mod duchi;
pub mod exact;
mod gaussian;
mod mech1;
mod mech2;
mod onedim;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use combinatorics::{
    binomial, compute_alpha, compute_b, compute_b_with_rule, compute_cd, max_admissible_delta, set_sizes,
    TieRule, MAX_DIMS,
};
pub use duchi::{duchi_alpha, duchi_params, duchi_perturb, DuchiVariant};
pub use gaussian::{gaussian_perturb_numeric, numeric_sensitivity};
pub use mech1::{mech1_perturb, Mech1Params};
pub use mech2::{
    mech2_perturb, mech2_perturb_with, mech2_worst_case_variance, optimal_k, variance_optimal_k, Mech2Params,
    K_DIVISOR,
};
pub use onedim::{onedim_magnitude, onedim_perturb, OneDimParams};

use crate::budget::PrivacyBudget;
use crate::calibration::optimal_sigma;
use crate::data::clamp_to_domain;
use crate::error::{LdpError, Result};
use crate::rng::RandomSource;

/// Which mechanism produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MechanismTag {
    Mech1,
    Mech2,
    OneDim,
    Duchi,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericReport {
    pub values: Vec<f64>,
    pub mechanism: MechanismTag,
}

/// Checks the length and the domain of `x`, clamping float noise.
pub(crate) fn check_tuple(x: &[f64], d: usize) -> Result<Vec<f64>> {
    if x.len() != d {
        return Err(LdpError::DimensionMismatch {
            expected: d,
            actual: x.len(),
        });
    }
    x.iter().enumerate().map(|(i, &v)| clamp_to_domain(i, v)).collect()
}

/// A numeric mechanism as chosen on the command line or in a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericMechanism {
    Mech1,
    Mech1Inclusive,
    Mech2,
    OneDim,
    Duchi,
    DuchiFixed,
    DuchiInclusive,
    Gaussian,
}

impl NumericMechanism {
    pub const ALL: [NumericMechanism; 8] = [
        Self::Mech1,
        Self::Mech1Inclusive,
        Self::Mech2,
        Self::OneDim,
        Self::Duchi,
        Self::DuchiFixed,
        Self::DuchiInclusive,
        Self::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mech1 => "mech1",
            Self::Mech1Inclusive => "mech1-inclusive",
            Self::Mech2 => "mech2",
            Self::OneDim => "onedim",
            Self::Duchi => "duchi",
            Self::DuchiFixed => "duchi-fixed",
            Self::DuchiInclusive => "duchi-inclusive",
            Self::Gaussian => "opt-gm",
        }
    }

    /// Builds the per-run constants for tuples of dimension `d`.
    pub fn prepare(self, d: usize, budget: PrivacyBudget) -> Result<PreparedNumeric> {
        Ok(match self {
            Self::Mech1 => PreparedNumeric::Mech1(Mech1Params::new(d, budget, TieRule::Strict)?),
            Self::Mech1Inclusive => PreparedNumeric::Mech1(Mech1Params::new(d, budget, TieRule::Inclusive)?),
            Self::Mech2 => PreparedNumeric::Mech2(Mech2Params::new(d, budget)?),
            Self::OneDim => {
                if d != 1 {
                    return Err(LdpError::DimensionMismatch { expected: 1, actual: d });
                }
                PreparedNumeric::OneDim(OneDimParams::new(budget))
            }
            Self::Duchi => PreparedNumeric::Mech1(duchi_params(d, budget.epsilon(), DuchiVariant::Original)?),
            Self::DuchiFixed => {
                PreparedNumeric::Mech1(duchi_params(d, budget.epsilon(), DuchiVariant::FixedStrict)?)
            }
            Self::DuchiInclusive => {
                PreparedNumeric::Mech1(duchi_params(d, budget.epsilon(), DuchiVariant::FixedInclusive)?)
            }
            Self::Gaussian => {
                let calibration = optimal_sigma(budget, numeric_sensitivity(d))?;
                PreparedNumeric::Gaussian {
                    d,
                    sigma: calibration.sigma,
                }
            }
        })
    }
}

impl fmt::Display for NumericMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NumericMechanism {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .or(match lower.as_str() {
                "gaussian" | "optgm" | "gm" => Some(Self::Gaussian),
                "mechanism-1" | "m1" => Some(Self::Mech1),
                "mechanism-2" | "m2" => Some(Self::Mech2),
                _ => None,
            })
            .ok_or_else(|| LdpError::InvalidArgument(format!("unknown numeric mechanism '{s}'")))
    }
}

/// A mechanism with its constants computed, ready to perturb many tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PreparedNumeric {
    Mech1(Mech1Params),
    Mech2(Mech2Params),
    OneDim(OneDimParams),
    Gaussian { d: usize, sigma: f64 },
}

impl PreparedNumeric {
    pub fn dims(&self) -> usize {
        match self {
            Self::Mech1(p) => p.d,
            Self::Mech2(p) => p.d,
            Self::OneDim(_) => 1,
            Self::Gaussian { d, .. } => *d,
        }
    }

    pub fn tag(&self) -> MechanismTag {
        match self {
            Self::Mech1(p) => p.tag(),
            Self::Mech2(_) => MechanismTag::Mech2,
            Self::OneDim(_) => MechanismTag::OneDim,
            Self::Gaussian { .. } => MechanismTag::Gaussian,
        }
    }

    /// Largest per-coordinate output variance over the input domain.
    pub fn worst_case_variance(&self) -> f64 {
        match self {
            Self::Mech1(p) => p.worst_case_variance(),
            Self::Mech2(p) => p.worst_case_variance(),
            Self::OneDim(p) => p.worst_case_variance(),
            Self::Gaussian { sigma, .. } => sigma * sigma,
        }
    }

    /// Perturbs an already validated tuple into `out` (both of length `dims()`).
    pub fn perturb_into(&self, x: &[f64], rng: &mut RandomSource, out: &mut [f64]) {
        match self {
            Self::Mech1(p) => p.perturb_into(x, rng, out),
            Self::Mech2(p) => p.perturb_into(x, rng, out),
            Self::OneDim(p) => out[0] = p.sample(x[0], rng),
            Self::Gaussian { sigma, .. } => {
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = v + sigma * rng.standard_normal();
                }
            }
        }
    }

    pub fn perturb(&self, x: &[f64], rng: &mut RandomSource) -> Result<NumericReport> {
        let x = check_tuple(x, self.dims())?;
        let mut values = vec![0.0; x.len()];
        self.perturb_into(&x, rng, &mut values);
        Ok(NumericReport {
            values,
            mechanism: self.tag(),
        })
    }
}
