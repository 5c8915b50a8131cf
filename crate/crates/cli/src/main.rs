//! `ldpkit`: perturb datasets, aggregate reports and run the benchmark grids.

mod bench;
mod reports;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ldpkit", version, about = "Local differential privacy toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Lists are comma separated; an empty
/// list means "use the subcommand's default grid".
#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Master seed; every output is a pure function of it and the other flags.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Privacy budgets ε.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Privacy parameters δ.
    #[arg(long, global = true, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Users per experiment.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Numeric dimensions d.
    #[arg(long, global = true, value_delimiter = ',')]
    pub dims: Vec<u32>,
    /// Categorical domain sizes k.
    #[arg(long, global = true, value_delimiter = ',')]
    pub domain: Vec<u32>,
    /// Repetitions per grid point.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Numeric mechanisms (mech1, mech1-inclusive, mech2, onedim, duchi,
    /// duchi-fixed, duchi-inclusive, opt-gm; `non-private` for train).
    #[arg(long, global = true, value_delimiter = ',')]
    pub mechanism: Vec<String>,
    /// Frequency protocols (grr, prr, sprr, lh, olh, opt-gm).
    #[arg(long, global = true, value_delimiter = ',')]
    pub protocol: Vec<String>,
    /// Output CSV; a `<out>.manifest.json` is written next to it. Stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Small CI-sized runs: 50,000 users and 5 repetitions unless given.
    #[arg(long, global = true)]
    pub quick: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Perturb every row of a CSV dataset into one report per user.
    Perturb(reports::PerturbArgs),
    /// Aggregate a report file written by `perturb`.
    Estimate(reports::EstimateArgs),
    /// Mean-estimation MSE on synthetic Gaussian data.
    BenchMean,
    /// Frequency-estimation MSE on synthetic Zipf data.
    BenchFreq(bench::FreqArgs),
    /// Analytic worst-case variances over a budget grid.
    VarianceTable,
    /// Private SGD on synthetic tasks or a CSV dataset.
    Train(bench::TrainArgs),
    /// Exhaustive privacy audit of discrete mechanisms.
    Audit,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Perturb(a) => reports::perturb(g, a),
        Command::Estimate(a) => reports::estimate(g, a),
        Command::BenchMean => bench::bench_mean(g),
        Command::BenchFreq(a) => bench::bench_freq(g, a),
        Command::VarianceTable => bench::variance_table(g),
        Command::Train(a) => bench::train(g, a),
        Command::Audit => bench::audit(g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

impl GlobalArgs {
    pub fn eps_or(&self, default: &[f64]) -> Vec<f64> {
        or_default(&self.eps, default)
    }

    pub fn delta_or(&self, default: &[f64]) -> Vec<f64> {
        or_default(&self.delta, default)
    }

    pub fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(if self.quick { ldpkit::harness::QUICK_USERS } else { default })
    }

    pub fn reps_or(&self, default: usize) -> usize {
        self.reps.unwrap_or(if self.quick { ldpkit::harness::QUICK_REPS } else { default })
    }

    /// `--mechanism` and `--protocol` together, or `default`.
    pub fn mechanisms_or(&self, default: &[&str]) -> Vec<String> {
        let given: Vec<String> = self.mechanism.iter().chain(&self.protocol).cloned().collect();
        if given.is_empty() {
            default.iter().map(|s| s.to_string()).collect()
        } else {
            given
        }
    }

    /// The single budget used by `perturb` and `estimate`.
    pub fn single_budget(&self) -> anyhow::Result<ldpkit::PrivacyBudget> {
        let eps = single(&self.eps, "--eps")?;
        let delta = if self.delta.is_empty() { 0.0 } else { single(&self.delta, "--delta")? };
        Ok(ldpkit::validate_budget(eps, delta)?)
    }
}

fn or_default<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

fn single<T: Copy>(values: &[T], flag: &str) -> anyhow::Result<T> {
    match values {
        [v] => Ok(*v),
        [] => anyhow::bail!("{flag} is required"),
        _ => anyhow::bail!("{flag} takes a single value here"),
    }
}
