//! Exhaustive single-output privacy audits of discrete mechanisms.
//!
//! For every ordered pair of inputs `(x, x′)` and every output `y` the audit
//! evaluates `P[y|x] − e^ε·P[y|x′]` from the exact output distributions.
//! Numeric mechanisms are audited on the vertex inputs `{−1, 1}^d`, which
//! are extremal for them.

use serde::Serialize;

use crate::budget::PrivacyBudget;
use crate::categorical::{seeded_hash, Protocol, ProtocolParams};
use crate::error::{LdpError, Result};
use crate::numeric::exact::{mech1_output_distribution, onedim_distribution};
use crate::numeric::{Mech2Params, NumericMechanism, PreparedNumeric};

/// Largest numeric dimension audited.
pub const MAX_AUDIT_DIMS: usize = 3;
/// Largest categorical domain audited.
pub const MAX_AUDIT_DOMAIN: u32 = 8;
/// Allowed excess of the worst gap over δ.
pub const AUDIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuditTarget {
    Numeric { mechanism: NumericMechanism, d: usize },
    Categorical { protocol: Protocol, k: u32 },
}

impl AuditTarget {
    pub fn describe(&self) -> String {
        match self {
            Self::Numeric { mechanism, d } => format!("{mechanism} d={d}"),
            Self::Categorical { protocol, k } => format!("{protocol} k={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub target: String,
    pub epsilon: f64,
    pub delta: f64,
    /// `max P[y|x] − e^ε·P[y|x′]`.
    pub max_gap: f64,
    /// `δ − max_gap`; negative means a violation.
    pub slack: f64,
    /// `max P[y|x] / P[y|x′]` (infinite if some output is impossible under `x′`).
    pub max_ratio: f64,
    /// `max_{x,x′} Σ_y (P[y|x] − e^ε·P[y|x′])⁺`: the δ needed when the
    /// guarantee must hold for every set of outputs.
    pub set_level_delta: f64,
    pub passes: bool,
    /// Indices of the worst input pair and output.
    pub worst_input: usize,
    pub worst_other: usize,
    pub worst_output: usize,
    pub inputs: usize,
    pub outputs: usize,
}

fn numeric_distributions(mechanism: NumericMechanism, d: usize, budget: PrivacyBudget) -> Result<Vec<Vec<f64>>> {
    if d > MAX_AUDIT_DIMS {
        return Err(LdpError::DomainTooLarge(format!("d = {d} (audits support d <= {MAX_AUDIT_DIMS})")));
    }
    let vertex = |mask: u32| -> Vec<f64> { (0..d).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect() };
    let prepared = mechanism.prepare(d, budget)?;
    (0..1u32 << d)
        .map(|mask| {
            let x = vertex(mask);
            match &prepared {
                PreparedNumeric::Mech1(p) => mech1_output_distribution(p, &x),
                PreparedNumeric::OneDim(p) => Ok(onedim_distribution(p, x[0]).to_vec()),
                PreparedNumeric::Mech2(p) => Ok(mech2_distribution(p, &x)),
                PreparedNumeric::Gaussian { .. } => Err(LdpError::InvalidArgument(
                    "the Gaussian mechanism has continuous outputs and cannot be audited exhaustively".into(),
                )),
            }
        })
        .collect()
}

/// Outputs indexed by `subset_mask · 2^d + sign_mask`.
fn mech2_distribution(params: &Mech2Params, x: &[f64]) -> Vec<f64> {
    let d = params.d;
    let subsets: Vec<u32> = (0..1u32 << d).filter(|s| s.count_ones() as usize == params.k).collect();
    let weight = 1.0 / subsets.len() as f64;
    let mut dist = vec![0.0; 1 << (2 * d)];
    for s in subsets {
        for signs in 0..1u32 << d {
            if signs & !s != 0 {
                continue;
            }
            let mut p = weight;
            for (j, &xj) in x.iter().enumerate() {
                if s >> j & 1 == 1 {
                    let [neg, pos] = onedim_distribution(&params.inner, xj);
                    p *= if signs >> j & 1 == 1 { pos } else { neg };
                }
            }
            dist[((s as usize) << d) | signs as usize] = p;
        }
    }
    dist
}

fn categorical_distributions(protocol: Protocol, k: u32, budget: PrivacyBudget) -> Result<Vec<Vec<f64>>> {
    if k > MAX_AUDIT_DOMAIN {
        return Err(LdpError::DomainTooLarge(format!(
            "k = {k} (audits support k <= {MAX_AUDIT_DOMAIN})"
        )));
    }
    let params = ProtocolParams::for_protocol(protocol, k, budget)?;
    let (p, q) = (params.p, params.q);
    Ok(match protocol {
        Protocol::Grr => (0..k)
            .map(|v| (0..k).map(|y| if y == v { p } else { q }).collect())
            .collect(),
        Protocol::Prr | Protocol::Sprr => (0..k)
            .map(|v| {
                (0..1u32 << k)
                    .map(|bits| {
                        (0..k)
                            .map(|j| {
                                let (on, set) = (if j == v { p } else { q }, bits >> j & 1 == 1);
                                if set {
                                    on
                                } else {
                                    1.0 - on
                                }
                            })
                            .product()
                    })
                    .collect()
            })
            .collect(),
        Protocol::Lh | Protocol::Olh => {
            // For a fixed seed the report is randomised response over the
            // hash range; audit every value under a fixed seed.
            let g = params.hash_range();
            if u64::from(g) * u64::from(k) * u64::from(k) > 50_000_000 {
                return Err(LdpError::DomainTooLarge(format!("hash range g = {g}")));
            }
            let seed = 0x5eed;
            (0..k)
                .map(|v| {
                    let y0 = seeded_hash(seed, v, g);
                    (0..g).map(|y| if y == y0 { p } else { q }).collect()
                })
                .collect()
        }
        Protocol::OptGm => {
            return Err(LdpError::InvalidArgument(
                "Opt-GM has continuous outputs and cannot be audited exhaustively".into(),
            ))
        }
    })
}

pub fn run_privacy_audit(target: AuditTarget, budget: PrivacyBudget) -> Result<AuditReport> {
    let dists = match target {
        AuditTarget::Numeric { mechanism, d } => numeric_distributions(mechanism, d, budget)?,
        AuditTarget::Categorical { protocol, k } => categorical_distributions(protocol, k, budget)?,
    };
    let e = budget.exp_epsilon();
    let mut report = AuditReport {
        target: target.describe(),
        epsilon: budget.epsilon(),
        delta: budget.delta(),
        max_gap: f64::NEG_INFINITY,
        slack: 0.0,
        max_ratio: 0.0,
        set_level_delta: 0.0,
        passes: false,
        worst_input: 0,
        worst_other: 0,
        worst_output: 0,
        inputs: dists.len(),
        outputs: dists.first().map_or(0, Vec::len),
    };
    for (a, pa) in dists.iter().enumerate() {
        for (b, pb) in dists.iter().enumerate() {
            if a == b {
                continue;
            }
            let mut set_gap = 0.0;
            for (y, (&x, &z)) in pa.iter().zip(pb).enumerate() {
                let gap = x - e * z;
                if gap > report.max_gap {
                    report.max_gap = gap;
                    report.worst_input = a;
                    report.worst_other = b;
                    report.worst_output = y;
                }
                if gap > 0.0 {
                    set_gap += gap;
                }
                let ratio = if z > 0.0 {
                    x / z
                } else if x > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                report.max_ratio = report.max_ratio.max(ratio);
            }
            report.set_level_delta = report.set_level_delta.max(set_gap);
        }
    }
    report.slack = budget.delta() - report.max_gap;
    report.passes = report.max_gap <= budget.delta() + AUDIT_TOLERANCE;
    Ok(report)
}
