//! Certified evaluation of the sinc-product integral deficits.
//!
//! The integral of the product of `n + 1` sinc factors with frequencies
//! `a_0, 1, 1/3, ..., 1/(2n-1)` equals `(pi/2)(1 - t)` once the odd-harmonic
//! sum `s(n) = sum 1/(2k-1)` first exceeds the integer `a_0`. This crate
//! computes the threshold index `n_0`, the certified sum excess
//! `s(n_0) - a_0`, and the tiny deficit `t` to a requested number of
//! certified significant digits, entirely in the log domain: for `a_0 = 25`
//! the decimal exponent of `t` has 23 digits, far beyond any float format.
//!
//! Modules follow the pipeline: [`mpnum`] (significance-tracked arithmetic),
//! [`bernoulli`] (exact Bernoulli data and remainder quadratures),
//! [`partial_sums`] (cached initial blocks), [`euler_maclaurin`] (the two
//! summation-formula instantiations), [`threshold_solver`] (certified
//! `n_0`), [`stirling`] (independent factorial brackets), [`tiny_eval`]
//! (the orchestrated pipeline), and [`oracle`] (brute-force references).

pub mod bernoulli;
pub mod error;
pub mod euler_maclaurin;
pub mod mpnum;
pub mod oracle;
pub mod partial_sums;
mod quadrature;
pub mod stirling;
pub mod threshold_solver;
pub mod tiny_eval;

pub use error::{BindingKnob, Error, Result};

// Re-export the numeric backbone so downstream crates use one version.
pub use rug;
