use super::{pack_bits, seeded_hash, CategoricalReport, Protocol, ProtocolParams, SupportCounts};
use crate::data::CategoricalValue;
use crate::error::{LdpError, Result};
use crate::rng::RandomSource;

/// Randomised response over `0..size`: keep `value` with probability `p`,
/// otherwise report one of the other `size − 1` outcomes uniformly.
fn randomized_response(value: u32, size: u32, p: f64, rng: &mut RandomSource) -> u32 {
    if rng.bernoulli(p) {
        value
    } else {
        let r = rng.below(u64::from(size - 1)) as u32;
        if r >= value {
            r + 1
        } else {
            r
        }
    }
}

/// One user's report of `value` under `params`.
pub fn perturb_categorical(
    value: CategoricalValue,
    params: &ProtocolParams,
    rng: &mut RandomSource,
) -> Result<CategoricalReport> {
    if value.domain_size() != params.k {
        return Err(LdpError::DimensionMismatch {
            expected: params.k as usize,
            actual: value.domain_size() as usize,
        });
    }
    Ok(perturb_index(value.index(), params, rng))
}

pub(crate) fn perturb_index(v: u32, params: &ProtocolParams, rng: &mut RandomSource) -> CategoricalReport {
    let k = params.k;
    debug_assert!(v < k);
    match params.protocol {
        Protocol::Grr => CategoricalReport::Value(randomized_response(v, k, params.p, rng)),
        Protocol::Prr | Protocol::Sprr => {
            let bits = (0..k).map(|j| rng.bernoulli(if j == v { params.p } else { params.q }));
            CategoricalReport::Bits {
                k,
                packed: pack_bits(bits, k),
            }
        }
        Protocol::Lh | Protocol::Olh => {
            let g = params.hash_range();
            let seed = rng.next_u64();
            let y0 = seeded_hash(seed, v, g);
            CategoricalReport::Hash {
                seed,
                y: randomized_response(y0, g, params.p, rng) as u16,
            }
        }
        Protocol::OptGm => {
            let sigma = params.sigma.expect("Opt-GM parameters carry sigma");
            CategoricalReport::Real(
                (0..k)
                    .map(|j| f64::from(u8::from(j == v)) + sigma * rng.standard_normal())
                    .collect(),
            )
        }
    }
}

/// Perturbs `value` and folds the report straight into `counts`.
pub fn perturb_into_counts(
    value: u32,
    params: &ProtocolParams,
    rng: &mut RandomSource,
    counts: &mut SupportCounts,
) -> Result<()> {
    if value >= params.k {
        return Err(LdpError::InvalidArgument(format!(
            "value {value} outside domain 0..{}",
            params.k
        )));
    }
    counts.add(&perturb_index(value, params, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::validate_budget;
    use crate::categorical::{grr_params, lh_params, prr_params};

    #[test]
    fn grr_distribution() {
        let params = grr_params(3, validate_budget(2f64.ln(), 0.0).unwrap()).unwrap();
        let mut rng = RandomSource::new(5);
        let n = 200_000;
        let mut hist = [0u32; 3];
        for _ in 0..n {
            match perturb_categorical(CategoricalValue::new(0, 3).unwrap(), &params, &mut rng).unwrap() {
                CategoricalReport::Value(r) => hist[r as usize] += 1,
                other => panic!("{other:?}"),
            }
        }
        for (h, want) in hist.iter().zip([0.5, 0.25, 0.25]) {
            let f = f64::from(*h) / n as f64;
            assert!((f - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt(), "{hist:?}");
        }
    }

    #[test]
    fn grr_large_epsilon_keeps_value() {
        let params = grr_params(5, validate_budget(60.0, 0.0).unwrap()).unwrap();
        let mut rng = RandomSource::new(1);
        for v in 0..5 {
            let r = perturb_categorical(CategoricalValue::new(v, 5).unwrap(), &params, &mut rng).unwrap();
            assert_eq!(r, CategoricalReport::Value(v));
        }
    }

    #[test]
    fn prr_exact_when_p1_q0() {
        let mut params = prr_params(6, validate_budget(1.0, 0.0).unwrap(), 0.2).unwrap();
        params.p = 1.0;
        params.q = 0.0;
        let r = perturb_categorical(CategoricalValue::new(4, 6).unwrap(), &params, &mut RandomSource::new(0)).unwrap();
        assert_eq!(
            (0..6).map(|j| r.bit(j).unwrap()).collect::<Vec<_>>(),
            vec![false, false, false, false, true, false]
        );
    }

    #[test]
    fn lh_report_in_range() {
        let params = lh_params(20, validate_budget(1.0, 1e-6).unwrap(), 5).unwrap();
        let mut rng = RandomSource::new(3);
        for v in 0..20 {
            match perturb_categorical(CategoricalValue::new(v, 20).unwrap(), &params, &mut rng).unwrap() {
                CategoricalReport::Hash { y, .. } => assert!(y < 5),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn domain_mismatch() {
        let params = grr_params(3, validate_budget(1.0, 0.0).unwrap()).unwrap();
        let v = CategoricalValue::new(0, 4).unwrap();
        assert!(perturb_categorical(v, &params, &mut RandomSource::new(0)).is_err());
    }
}
