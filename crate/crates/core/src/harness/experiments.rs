#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::generate::{gen_gaussian_numeric, gen_zipf_categorical};
use super::{sort_records, ExperimentConfig, MseRecord};
use crate::budget::validate_budget;
use crate::categorical::{perturb_into_counts, Protocol, ProtocolParams, SupportCounts};
use crate::error::Result;
use crate::numeric::NumericMechanism;
use crate::rng::RandomSource;

/// Runs `job` over every (size, repetition) cell, in parallel when enabled.
fn run_cells<F>(config: &ExperimentConfig, job: F) -> Result<Vec<MseRecord>>
where
    F: Fn(u32, usize) -> Result<Vec<MseRecord>> + Sync,
{
    let cells: Vec<(u32, usize)> = config
        .sizes
        .iter()
        .flat_map(|&s| (0..config.reps).map(move |r| (s, r)))
        .collect();
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Vec<MseRecord>>> = cells.par_iter().map(|&(s, r)| job(s, r)).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Vec<MseRecord>>> = cells.iter().map(|&(s, r)| job(s, r)).collect();
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    sort_records(&mut records);
    Ok(records)
}

/// Mean estimation on `N(0, 1/16)` data: MSE is averaged over dimensions,
/// `(1/d)·Σ_j (Z_j − X_j)²` with `Z_j` the mean report and `X_j` the true mean.
pub fn run_mean_experiment(config: &ExperimentConfig) -> Result<Vec<MseRecord>> {
    config.validate()?;
    let mechanisms: Vec<NumericMechanism> = config.parsed_mechanisms()?;
    run_cells(config, |size, rep| {
        let d = size as usize;
        let data = gen_gaussian_numeric(config.n, d, &mut RandomSource::new(config.data_seed(size, rep)))?;
        let truth = data.numeric_means();
        let rep_seed = config.rep_seed(rep);
        let mut out = Vec::new();
        let mut buf = vec![0.0; d];
        for &mech in &mechanisms {
            for &eps in &config.epsilons {
                for &delta in &config.deltas {
                    let prepared = mech.prepare(d, validate_budget(eps, delta)?)?;
                    let mut sums = vec![0.0; d];
                    for (i, row) in data.numeric_rows().enumerate() {
                        let mut rng = RandomSource::for_user(rep_seed, i as u64);
                        prepared.perturb_into(row, &mut rng, &mut buf);
                        for (s, v) in sums.iter_mut().zip(&buf) {
                            *s += v;
                        }
                    }
                    let n = config.n as f64;
                    let mse = sums.iter().zip(&truth).map(|(s, t)| (s / n - t).powi(2)).sum::<f64>() / d as f64;
                    out.push(MseRecord {
                        mechanism: mech.name().to_string(),
                        epsilon: eps,
                        delta,
                        size,
                        n: config.n,
                        rep,
                        mse,
                    });
                }
            }
        }
        Ok(out)
    })
}

/// Frequency estimation on Zipf data: MSE of the unbiased (unclipped)
/// frequencies, averaged over the `k` values.
pub fn run_freq_experiment(config: &ExperimentConfig) -> Result<Vec<MseRecord>> {
    config.validate()?;
    let protocols: Vec<Protocol> = config.parsed_mechanisms()?;
    run_cells(config, |k, rep| {
        let data = gen_zipf_categorical(
            config.n,
            k,
            config.zipf_exponent,
            &mut RandomSource::new(config.data_seed(k, rep)),
        )?;
        let column = &data.categorical_columns()[0];
        let truth = column.frequencies();
        let rep_seed = config.rep_seed(rep);
        let mut out = Vec::new();
        for &protocol in &protocols {
            for &eps in &config.epsilons {
                for &delta in &config.deltas {
                    let params = ProtocolParams::for_protocol(protocol, k, validate_budget(eps, delta)?)?;
                    let mut counts = SupportCounts::new(&params);
                    for (i, &v) in column.values.iter().enumerate() {
                        let mut rng = RandomSource::for_user(rep_seed, i as u64);
                        perturb_into_counts(v, &params, &mut rng, &mut counts)?;
                    }
                    let est = counts.estimate(&params)?;
                    let mse = est
                        .raw_frequencies
                        .iter()
                        .zip(&truth)
                        .map(|(f, t)| (f - t).powi(2))
                        .sum::<f64>()
                        / f64::from(k);
                    out.push(MseRecord {
                        mechanism: protocol.name().to_string(),
                        epsilon: eps,
                        delta,
                        size: k,
                        n: config.n,
                        rep,
                        mse,
                    });
                }
            }
        }
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{median_mse, ExperimentTask};

    fn mean_config() -> ExperimentConfig {
        ExperimentConfig {
            task: ExperimentTask::Mean,
            mechanisms: vec!["mech1".into(), "mech2".into(), "opt-gm".into()],
            epsilons: vec![0.5, 4.0],
            deltas: vec![1e-6],
            sizes: vec![3],
            n: 20_000,
            reps: 3,
            seed: 5,
            zipf_exponent: 1.3,
            output: None,
        }
    }

    #[test]
    fn mean_experiment_shape_and_determinism() {
        let c = mean_config();
        let a = run_mean_experiment(&c).unwrap();
        assert_eq!(a.len(), 3 * 2 * 3);
        assert!(a.iter().all(|r| r.mse >= 0.0));
        assert_eq!(a, run_mean_experiment(&c).unwrap());
        for m in ["mech1", "mech2", "opt-gm"] {
            let lo = median_mse(&a, m, 0.5, 1e-6, 3).unwrap();
            let hi = median_mse(&a, m, 4.0, 1e-6, 3).unwrap();
            assert!(lo > hi, "{m}");
        }
    }

    #[test]
    fn huge_epsilon_is_nearly_exact() {
        let mut c = mean_config();
        c.mechanisms = vec!["mech2".into()];
        c.epsilons = vec![50.0];
        c.n = 400_000;
        c.reps = 1;
        let recs = run_mean_experiment(&c).unwrap();
        assert!(recs[0].mse < 1e-4, "{}", recs[0].mse);
    }

    #[test]
    fn freq_experiment_runs() {
        let c = ExperimentConfig {
            task: ExperimentTask::Freq,
            mechanisms: vec!["grr".into(), "sprr".into(), "olh".into(), "opt-gm".into()],
            epsilons: vec![2.0],
            deltas: vec![1e-6],
            sizes: vec![8],
            n: 10_000,
            reps: 2,
            seed: 3,
            zipf_exponent: 1.3,
            output: None,
        };
        let a = run_freq_experiment(&c).unwrap();
        assert_eq!(a.len(), 8);
        assert_eq!(a, run_freq_experiment(&c).unwrap());
    }

    #[test]
    fn unknown_mechanism_is_an_error() {
        let mut c = mean_config();
        c.mechanisms = vec!["laplace".into()];
        assert!(run_mean_experiment(&c).is_err());
    }
}
