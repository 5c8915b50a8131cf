use super::{Protocol, ProtocolParams};
use crate::budget::PrivacyBudget;
use crate::calibration::optimal_sigma;
use crate::error::{LdpError, Result};

/// Below this δ the closed-form optimal `g` is replaced by its δ → 0 limit `e^ε + 1`.
pub const OLH_DELTA_THRESHOLD: f64 = 1e-12;

/// Hashed reports carry `y` as a 16-bit integer.
pub const MAX_HASH_RANGE: u32 = 1 << 16;

fn check_domain(k: u32) -> Result<()> {
    if k < 2 {
        return Err(LdpError::InvalidArgument(format!("domain size must be at least 2, got {k}")));
    }
    Ok(())
}

/// Randomised response over `size` outcomes tuned so that `p = q·e^ε + δ`.
fn rr_pair(size: u32, budget: &PrivacyBudget) -> (f64, f64) {
    let e = budget.exp_epsilon();
    let m = f64::from(size) - 1.0;
    let delta = budget.delta();
    ((e + m * delta) / (e + m), (1.0 - delta) / (e + m))
}

pub fn grr_params(k: u32, budget: PrivacyBudget) -> Result<ProtocolParams> {
    check_domain(k)?;
    let (p, q) = rr_pair(k, &budget);
    Ok(ProtocolParams {
        protocol: Protocol::Grr,
        k,
        budget,
        p,
        q,
        p_star: p,
        q_star: q,
        g: None,
        sigma: None,
    })
}

/// Bit-flipping randomised response with a free choice of `q`; `p` makes
/// `p(1 − q) = e^ε·q(1 − p) + δ` tight.
pub fn prr_params(k: u32, budget: PrivacyBudget, q: f64) -> Result<ProtocolParams> {
    check_domain(k)?;
    let e = budget.exp_epsilon();
    let p = (q * e + budget.delta()) / (1.0 - q + q * e);
    if !(q > 0.0 && q < 1.0) || !(p > q) || p > 1.0 {
        return Err(LdpError::InvalidQ { q, p });
    }
    Ok(ProtocolParams {
        protocol: Protocol::Prr,
        k,
        budget,
        p,
        q,
        p_star: p,
        q_star: q,
        g: None,
        sigma: None,
    })
}

/// Symmetric bit flipping: `p + q = 1`.
pub fn sprr_params(k: u32, budget: PrivacyBudget) -> Result<ProtocolParams> {
    check_domain(k)?;
    let e = budget.exp_epsilon();
    let delta = budget.delta();
    let p = (e - (e * (1.0 - delta) + delta).sqrt()) / (e - 1.0);
    let q = 1.0 - p;
    Ok(ProtocolParams {
        protocol: Protocol::Sprr,
        k,
        budget,
        p,
        q,
        p_star: p,
        q_star: q,
        g: None,
        sigma: None,
    })
}

fn hashed_params(protocol: Protocol, k: u32, budget: PrivacyBudget, g: u32) -> Result<ProtocolParams> {
    check_domain(k)?;
    if !(2..=MAX_HASH_RANGE).contains(&g) {
        return Err(LdpError::InvalidArgument(format!(
            "hash range g = {g} outside [2, {MAX_HASH_RANGE}]"
        )));
    }
    let (p, q) = rr_pair(g, &budget);
    Ok(ProtocolParams {
        protocol,
        k,
        budget,
        p,
        q,
        p_star: p,
        q_star: 1.0 / f64::from(g),
        g: Some(g),
        sigma: None,
    })
}

/// Local hashing into `0..g` followed by randomised response over the hash range.
pub fn lh_params(k: u32, budget: PrivacyBudget, g: u32) -> Result<ProtocolParams> {
    hashed_params(Protocol::Lh, k, budget, g)
}

pub fn olh_params(k: u32, budget: PrivacyBudget) -> Result<ProtocolParams> {
    hashed_params(Protocol::Olh, k, budget, olh_optimal_g(&budget))
}

/// One-hot encoding plus Gaussian noise calibrated to ℓ₂ sensitivity `√2`.
pub fn optgm_params(k: u32, budget: PrivacyBudget) -> Result<ProtocolParams> {
    check_domain(k)?;
    let sigma = optimal_sigma(budget, std::f64::consts::SQRT_2)?.sigma;
    Ok(ProtocolParams {
        protocol: Protocol::OptGm,
        k,
        budget,
        p: 1.0,
        q: 0.0,
        p_star: 1.0,
        q_star: 0.0,
        g: None,
        sigma: Some(sigma),
    })
}

/// Real-valued minimiser of the hashed-protocol variance over `g`.
pub fn olh_g_real(budget: &PrivacyBudget) -> Result<f64> {
    let e = budget.exp_epsilon();
    let delta = budget.delta();
    if delta < OLH_DELTA_THRESHOLD {
        return Ok(e + 1.0);
    }
    let disc = (1.0 - delta) * (e + delta - 9.0 * e * delta - 1.0);
    if disc < 0.0 {
        return Err(LdpError::NegativeDiscriminant(disc));
    }
    Ok((-3.0 * e * delta - (e - 1.0).sqrt() * disc.sqrt() + e + 3.0 * delta - 1.0) / (2.0 * delta))
}

/// Integer hash range minimising the approximate variance: the better of
/// the floor and ceiling of [`olh_g_real`], or an exhaustive search when
/// the closed form does not apply.
pub fn olh_optimal_g(budget: &PrivacyBudget) -> u32 {
    let cost = |g: u32| super::var_star_lh(budget, g, 1);
    match olh_g_real(budget) {
        Ok(g_real) if g_real.is_finite() => {
            let clamp = |x: f64| x.clamp(2.0, f64::from(MAX_HASH_RANGE)) as u32;
            let (lo, hi) = (clamp(g_real.floor()), clamp(g_real.ceil()));
            if cost(hi) < cost(lo) {
                hi
            } else {
                lo
            }
        }
        _ => {
            let upper = (10.0 * (budget.exp_epsilon() + 1.0)).min(f64::from(MAX_HASH_RANGE)) as u32;
            (2..=upper.max(2))
                .min_by(|&a, &b| cost(a).total_cmp(&cost(b)))
                .unwrap_or(2)
        }
    }
}
