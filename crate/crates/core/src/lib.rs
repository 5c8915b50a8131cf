//! Locally differentially private aggregation under (ε, δ)-LDP.
//!
//! The crate is organised around the data flow of a local-privacy deployment:
//!
//! * [`budget`], [`rng`] and [`data`] hold the shared domain types: the
//!   privacy budget, the reproducible per-user random streams and the dataset
//!   containers with CSV ingestion.
//! * [`numeric`] perturbs tuples in `[-1, 1]^d` (the sign-vector mechanism,
//!   the one-dimensional two-point mechanism, the sampled-dimension mechanism,
//!   the pure-LDP baseline and the Gaussian baseline).
//! * [`calibration`] computes the optimal Gaussian noise scale.
//! * [`categorical`] implements the frequency oracles (GRR, PRR, SPRR, LH,
//!   OLH and the Gaussian one-hot protocol) with unbiased aggregation.
//! * [`sgd`] trains linear models from perturbed per-user gradients.
//! * [`harness`] generates synthetic data and runs the benchmark grids,
//!   exhaustive privacy audits and analytic variance tables.

pub mod budget;
pub mod calibration;
pub mod categorical;
pub mod data;
mod error;
pub mod harness;
pub mod numeric;
pub mod rng;
pub mod sgd;

pub use budget::{validate_budget, PrivacyBudget};
pub use error::{LdpError, Result};
pub use rng::RandomSource;
