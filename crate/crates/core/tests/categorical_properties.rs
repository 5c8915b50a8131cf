use ldpkit::categorical::{
    analytic_variance, decode_report, encode_report, estimate_frequencies, perturb_categorical,
    postprocess_frequencies, report_from_bytes, report_to_bytes, Protocol, ProtocolParams,
};
use ldpkit::data::CategoricalValue;
use ldpkit::harness::{gen_zipf_categorical, run_privacy_audit, AuditTarget};
use ldpkit::{validate_budget, RandomSource};
use proptest::prelude::*;

const PROTOCOLS: [Protocol; 6] =
    [Protocol::Grr, Protocol::Prr, Protocol::Sprr, Protocol::Lh, Protocol::Olh, Protocol::OptGm];

fn protocol() -> impl Strategy<Value = Protocol> {
    prop::sample::select(PROTOCOLS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn params_are_valid_probabilities(p in protocol(), k in 2u32..300, eps in 0.05f64..10.0, delta in 0.0f64..0.2) {
        let delta = if p == Protocol::OptGm { delta.max(1e-9) } else { delta };
        let params = ProtocolParams::for_protocol(p, k, validate_budget(eps, delta).unwrap()).unwrap();
        if p != Protocol::OptGm {
            prop_assert!(params.p > params.q);
            prop_assert!((0.0..=1.0).contains(&params.p) && (0.0..=1.0).contains(&params.q));
            prop_assert!(params.p_star > params.q_star);
        }
    }

    #[test]
    fn discrete_protocols_pass_exhaustive_audit(
        p in prop::sample::select(vec![Protocol::Grr, Protocol::Prr, Protocol::Sprr, Protocol::Lh, Protocol::Olh]),
        k in 2u32..=6, eps in 0.05f64..4.0, delta in 0.0f64..0.1,
    ) {
        let report = run_privacy_audit(AuditTarget::Categorical { protocol: p, k }, validate_budget(eps, delta).unwrap()).unwrap();
        prop_assert!(report.passes, "{report:?}");
    }

    #[test]
    fn grr_raw_counts_sum_to_n(values in prop::collection::vec(0u32..7, 1..400), eps in 0.1f64..5.0, seed in any::<u64>()) {
        let params = ProtocolParams::for_protocol(Protocol::Grr, 7, validate_budget(eps, 1e-5).unwrap()).unwrap();
        let reports: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| perturb_categorical(CategoricalValue::new(v, 7).unwrap(), &params, &mut RandomSource::for_user(seed, i as u64)).unwrap())
            .collect();
        let est = estimate_frequencies(&reports, &params).unwrap();
        prop_assert!((est.counts.iter().sum::<f64>() - values.len() as f64).abs() < 1e-6);
    }

    #[test]
    fn codecs_round_trip(p in protocol(), k in 2u32..40, v in 0u32..40, seed in any::<u64>()) {
        let v = v % k;
        let params = ProtocolParams::for_protocol(p, k, validate_budget(1.0, 1e-6).unwrap()).unwrap();
        let report = perturb_categorical(CategoricalValue::new(v, k).unwrap(), &params, &mut RandomSource::new(seed)).unwrap();
        prop_assert_eq!(&decode_report(&encode_report(&report), &params).unwrap(), &report);
        prop_assert_eq!(&report_from_bytes(&report_to_bytes(&report), &params).unwrap(), &report);
    }

    #[test]
    fn postprocessing_yields_distribution(counts in prop::collection::vec(-50.0f64..50.0, 2..30), round: bool) {
        let f = postprocess_frequencies(&counts, round);
        prop_assert!(f.iter().all(|&x| x >= 0.0));
        prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

/// Every protocol's unclipped estimate is within four standard deviations
/// of the truth for every value.
#[test]
fn estimators_are_unbiased() {
    let (k, n) = (8u32, 200_000usize);
    let data = gen_zipf_categorical(n, k, 1.3, &mut RandomSource::new(21)).unwrap();
    let column = &data.categorical_columns()[0];
    let truth = column.frequencies();
    let budget = validate_budget(1.0, 1e-6).unwrap();
    for p in PROTOCOLS {
        let params = ProtocolParams::for_protocol(p, k, budget).unwrap();
        let reports: Vec<_> = column
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                perturb_categorical(CategoricalValue::new(v, k).unwrap(), &params, &mut RandomSource::for_user(3, i as u64))
                    .unwrap()
            })
            .collect();
        let est = estimate_frequencies(&reports, &params).unwrap();
        for (v, (&f_hat, &f)) in est.raw_frequencies.iter().zip(&truth).enumerate() {
            let sd = analytic_variance(&params, n as u64, f).exact.sqrt() / n as f64;
            assert!((f_hat - f).abs() <= 4.0 * sd, "{p} value {v}: {f_hat} vs {f} (sd {sd})");
        }
    }
}
