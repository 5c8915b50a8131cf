//! Wire format of categorical reports.
//!
//! Binary: GRR is a little-endian `u32`; PRR/SPRR the packed bit vector;
//! LH/OLH the seed (`u64`) then `y` (`u16`), both little-endian; Opt-GM `k`
//! little-endian `f64`s. In text form GRR is a decimal integer and the rest
//! are the hex encoding of the binary form.

use super::{CategoricalReport, Protocol, ProtocolParams};
use crate::error::{LdpError, Result};

pub fn report_to_bytes(report: &CategoricalReport) -> Vec<u8> {
    match report {
        CategoricalReport::Value(v) => v.to_le_bytes().to_vec(),
        CategoricalReport::Bits { packed, .. } => packed.clone(),
        CategoricalReport::Hash { seed, y } => {
            let mut out = seed.to_le_bytes().to_vec();
            out.extend_from_slice(&y.to_le_bytes());
            out
        }
        CategoricalReport::Real(values) => values.iter().flat_map(|v| v.to_le_bytes()).collect(),
    }
}

fn bad(params: &ProtocolParams, len: usize) -> LdpError {
    LdpError::MixedProtocolReports(format!(
        "{len}-byte payload is not a {} report for k = {}",
        params.protocol, params.k
    ))
}

pub fn report_from_bytes(bytes: &[u8], params: &ProtocolParams) -> Result<CategoricalReport> {
    let k = params.k;
    let report = match params.protocol {
        Protocol::Grr => {
            let raw: [u8; 4] = bytes.try_into().map_err(|_| bad(params, bytes.len()))?;
            CategoricalReport::Value(u32::from_le_bytes(raw))
        }
        Protocol::Prr | Protocol::Sprr => {
            if bytes.len() != k.div_ceil(8) as usize {
                return Err(bad(params, bytes.len()));
            }
            CategoricalReport::Bits {
                k,
                packed: bytes.to_vec(),
            }
        }
        Protocol::Lh | Protocol::Olh => {
            if bytes.len() != 10 {
                return Err(bad(params, bytes.len()));
            }
            CategoricalReport::Hash {
                seed: u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")),
                y: u16::from_le_bytes([bytes[8], bytes[9]]),
            }
        }
        Protocol::OptGm => {
            if bytes.len() != 8 * k as usize {
                return Err(bad(params, bytes.len()));
            }
            CategoricalReport::Real(
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect(),
            )
        }
    };
    Ok(report)
}

pub fn encode_report(report: &CategoricalReport) -> String {
    match report {
        CategoricalReport::Value(v) => v.to_string(),
        other => hex::encode(report_to_bytes(other)),
    }
}

pub fn decode_report(text: &str, params: &ProtocolParams) -> Result<CategoricalReport> {
    let text = text.trim();
    if params.protocol == Protocol::Grr {
        return text
            .parse::<u32>()
            .map(CategoricalReport::Value)
            .map_err(|e| LdpError::InvalidArgument(format!("bad GRR report '{text}': {e}")));
    }
    let bytes = hex::decode(text).map_err(|e| LdpError::InvalidArgument(format!("bad hex report: {e}")))?;
    report_from_bytes(&bytes, params)
}
