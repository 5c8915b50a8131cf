//! Exact output distributions for small dimensions.
//!
//! Outputs of the sign-vector mechanism are indexed by a bit mask: bit `j`
//! set means coordinate `j` is `+B`. Sign vectors use the same encoding.
//! These are used by the privacy audit and by the unbiasedness checks.

use super::mech1::Mech1Params;
use super::mech2::Mech2Params;
use super::onedim::OneDimParams;
use super::check_tuple;
use crate::error::{LdpError, Result};

/// Largest `d` for which distributions over `2^d` outputs are materialised.
pub const EXACT_MAX_DIMS: usize = 12;

fn check_small(d: usize) -> Result<()> {
    if d > EXACT_MAX_DIMS {
        return Err(LdpError::DomainTooLarge(format!(
            "d = {d} (exact enumeration supports d <= {EXACT_MAX_DIMS})"
        )));
    }
    Ok(())
}

/// `P[output = y | V = v]` for every output mask `y`.
pub fn mech1_conditional(params: &Mech1Params, v_mask: u32) -> Result<Vec<f64>> {
    check_small(params.d)?;
    let d = params.d;
    let full = (1u32 << d) - 1;
    Ok((0..1u32 << d)
        .map(|y| {
            let agreement = (!(y ^ v_mask) & full).count_ones() as usize;
            params.vertex_probability(agreement)
        })
        .collect())
}

/// `P[V = v | x]` for every sign-vector mask `v`.
pub fn sign_vector_distribution(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..1u32 << d)
        .map(|v| {
            x.iter()
                .enumerate()
                .map(|(j, &xj)| if v >> j & 1 == 1 { 0.5 + 0.5 * xj } else { 0.5 - 0.5 * xj })
                .product()
        })
        .collect()
}

/// `P[output = y | x]`, summing over all sign vectors.
pub fn mech1_output_distribution(params: &Mech1Params, x: &[f64]) -> Result<Vec<f64>> {
    let x = check_tuple(x, params.d)?;
    check_small(params.d)?;
    let mut dist = vec![0.0; 1 << params.d];
    for (v, pv) in sign_vector_distribution(&x).into_iter().enumerate() {
        if pv == 0.0 {
            continue;
        }
        for (acc, py) in dist.iter_mut().zip(mech1_conditional(params, v as u32)?) {
            *acc += pv * py;
        }
    }
    Ok(dist)
}

/// Value of output mask `y` as a tuple in `{-B, B}^d`.
pub fn output_vertex(params: &Mech1Params, y: u32) -> Vec<f64> {
    (0..params.d)
        .map(|j| if y >> j & 1 == 1 { params.b } else { -params.b })
        .collect()
}

/// `E[output | x]`, computed by summing over every sign vector and output.
pub fn mech1_expectation(params: &Mech1Params, x: &[f64]) -> Result<Vec<f64>> {
    let dist = mech1_output_distribution(params, x)?;
    let mut mean = vec![0.0; params.d];
    for (y, p) in dist.into_iter().enumerate() {
        for (m, v) in mean.iter_mut().zip(output_vertex(params, y as u32)) {
            *m += p * v;
        }
    }
    Ok(mean)
}

/// `[P[−M | x], P[+M | x]]`.
pub fn onedim_distribution(params: &OneDimParams, x: f64) -> [f64; 2] {
    let p = params.positive_probability(x);
    [1.0 - p, p]
}

/// `E[output | x]` by enumerating every size-`k` subset of coordinates.
pub fn mech2_expectation(params: &Mech2Params, x: &[f64]) -> Result<Vec<f64>> {
    let x = check_tuple(x, params.d)?;
    check_small(params.d)?;
    let subsets: Vec<u32> = (0..1u32 << params.d)
        .filter(|s| s.count_ones() as usize == params.k)
        .collect();
    let weight = 1.0 / subsets.len() as f64;
    let mut mean = vec![0.0; params.d];
    for s in subsets {
        for (j, m) in mean.iter_mut().enumerate() {
            if s >> j & 1 == 1 {
                let [neg, pos] = onedim_distribution(&params.inner, x[j]);
                *m += weight * params.scale * params.inner.magnitude * (pos - neg);
            }
        }
    }
    Ok(mean)
}
