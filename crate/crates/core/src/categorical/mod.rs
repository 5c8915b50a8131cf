//! Frequency oracles for a categorical attribute with domain `0..k`.
//!
//! Every protocol is described by a [`ProtocolParams`]: the probability `p`
//! that the encoding of the true value survives, the probability `q` that a
//! given other value (or bit) is reported, and the aggregation-side support
//! probabilities `p*`, `q*` used to unbias support counts.

mod codec;
mod estimate;
mod hash;
mod params;
mod perturb;
mod privacy;
mod variance;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use codec::{decode_report, encode_report, report_from_bytes, report_to_bytes};
pub use estimate::{estimate_frequencies, postprocess_frequencies, FrequencyEstimate, SupportCounts};
pub use hash::{mix64, seeded_hash};
pub use params::{
    grr_params, lh_params, olh_g_real, olh_optimal_g, olh_params, optgm_params, prr_params, sprr_params,
    MAX_HASH_RANGE, OLH_DELTA_THRESHOLD,
};
pub use perturb::{perturb_categorical, perturb_into_counts};
pub use privacy::{bit_privacy_gap, value_privacy_gap};
pub use variance::{
    analytic_variance, count_variance, var_star_grr, var_star_lh, var_star_optgm, var_star_prr, var_star_sprr,
    VarianceSummary,
};

use crate::budget::PrivacyBudget;
use crate::error::{LdpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Grr,
    Prr,
    Sprr,
    Lh,
    Olh,
    OptGm,
}

impl Protocol {
    pub const ALL: [Protocol; 6] = [Self::Grr, Self::Prr, Self::Sprr, Self::Lh, Self::Olh, Self::OptGm];

    pub fn name(self) -> &'static str {
        match self {
            Self::Grr => "grr",
            Self::Prr => "prr",
            Self::Sprr => "sprr",
            Self::Lh => "lh",
            Self::Olh => "olh",
            Self::OptGm => "opt-gm",
        }
    }

    /// Protocols whose reports are bit vectors.
    pub fn is_bitwise(self) -> bool {
        matches!(self, Self::Prr | Self::Sprr)
    }

    pub fn is_hashed(self) -> bool {
        matches!(self, Self::Lh | Self::Olh)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = LdpError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|p| p.name() == lower)
            .or((lower == "optgm" || lower == "gaussian").then_some(Self::OptGm))
            .ok_or_else(|| LdpError::InvalidArgument(format!("unknown protocol '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    pub protocol: Protocol,
    pub k: u32,
    pub budget: PrivacyBudget,
    pub p: f64,
    pub q: f64,
    pub p_star: f64,
    pub q_star: f64,
    /// Hash range for LH/OLH.
    pub g: Option<u32>,
    /// Per-bit noise scale for Opt-GM.
    pub sigma: Option<f64>,
}

impl ProtocolParams {
    /// Default parameters of a protocol: PRR uses the symmetric choice of
    /// `q`, LH uses `g = k`, OLH the variance-optimal `g`.
    pub fn for_protocol(protocol: Protocol, k: u32, budget: PrivacyBudget) -> Result<Self> {
        match protocol {
            Protocol::Grr => grr_params(k, budget),
            Protocol::Prr => {
                let sym = sprr_params(k, budget)?;
                prr_params(k, budget, sym.q)
            }
            Protocol::Sprr => sprr_params(k, budget),
            Protocol::Lh => lh_params(k, budget, k),
            Protocol::Olh => olh_params(k, budget),
            Protocol::OptGm => optgm_params(k, budget),
        }
    }

    pub fn hash_range(&self) -> u32 {
        self.g.unwrap_or(self.k)
    }
}

/// A single user's perturbed categorical report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CategoricalReport {
    /// GRR: a value in `0..k`.
    Value(u32),
    /// PRR/SPRR: `k` bits packed least-significant-bit first.
    Bits { k: u32, packed: Vec<u8> },
    /// LH/OLH: the hash seed and the perturbed hash value in `0..g`.
    Hash { seed: u64, y: u16 },
    /// Opt-GM: the noisy one-hot vector.
    Real(Vec<f64>),
}

impl CategoricalReport {
    pub fn bit(&self, index: u32) -> Option<bool> {
        match self {
            Self::Bits { k, packed } if index < *k => Some(packed[(index / 8) as usize] >> (index % 8) & 1 == 1),
            _ => None,
        }
    }

    pub fn shape(&self) -> &'static str {
        match self {
            Self::Value(_) => "value",
            Self::Bits { .. } => "bits",
            Self::Hash { .. } => "hash",
            Self::Real(_) => "real",
        }
    }
}

pub(crate) fn pack_bits(bits: impl IntoIterator<Item = bool>, k: u32) -> Vec<u8> {
    let mut packed = vec![0u8; k.div_ceil(8) as usize];
    for (i, b) in bits.into_iter().enumerate() {
        if b {
            packed[i / 8] |= 1 << (i % 8);
        }
    }
    packed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_names_round_trip() {
        for p in Protocol::ALL {
            assert_eq!(p.name().parse::<Protocol>().unwrap(), p);
        }
        assert_eq!("OPT_GM".parse::<Protocol>().unwrap(), Protocol::OptGm);
        assert!("rappor".parse::<Protocol>().is_err());
    }

    #[test]
    fn bits_accessor() {
        let r = CategoricalReport::Bits {
            k: 10,
            packed: pack_bits([true, false, false, false, false, false, false, false, false, true], 10),
        };
        assert_eq!(r.bit(0), Some(true));
        assert_eq!(r.bit(1), Some(false));
        assert_eq!(r.bit(9), Some(true));
        assert_eq!(r.bit(10), None);
    }
}
