use super::ProtocolParams;

/// Largest `P[y|v₁] − e^ε·P[y|v₂]` for a protocol that reports one outcome
/// out of a set (GRR, and LH/OLH for a fixed hash seed).
pub fn value_privacy_gap(params: &ProtocolParams) -> f64 {
    let e = params.budget.exp_epsilon();
    let (p, q) = (params.p, params.q);
    [p - e * q, q - e * p, q - e * q, p - e * p]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest gap over the four patterns of the two bits in which one-hot
/// encodings of two distinct values differ. All other bits are identically
/// distributed under both values, so this bounds the gap for whole reports.
pub fn bit_privacy_gap(params: &ProtocolParams) -> f64 {
    let e = params.budget.exp_epsilon();
    let (p, q) = (params.p, params.q);
    let one = |b: bool| if b { p } else { 1.0 - p };
    let zero = |b: bool| if b { q } else { 1.0 - q };
    [(false, false), (false, true), (true, false), (true, true)]
        .into_iter()
        .map(|(a, b)| one(a) * zero(b) - e * zero(a) * one(b))
        .fold(f64::NEG_INFINITY, f64::max)
}
