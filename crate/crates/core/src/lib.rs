//! Exact and asymptotic laws of the bubble sort pass count and of the
//! birthday first-collision count.
//!
//! * [`exact`]: product, series and moment evaluations in double-double
//!   precision, with exact rational oracles.
//! * [`asymptotics`]: Stirling and Euler–Maclaurin based expansions of the
//!   same quantities.
//! * [`sorters`]: instrumented bubble sort variants and permutation
//!   combinatorics.
//! * [`poisson_approx`]: Stein–Chen total-variation bounds for pair-indexed
//!   dissociated indicator families.
//! * [`montecarlo`]: seeded, reproducible samplers and empirical summaries.
//! * [`distributions`]: the Poisson, exponential and Rayleigh reference laws.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod exact;
pub mod hp;
pub mod montecarlo;
pub mod poisson_approx;
pub mod quadrature;
pub mod sorters;

pub use error::{Error, Result};
pub use hp::HPReal;
