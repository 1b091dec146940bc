//! Numerical laboratory for persistence probabilities of weighted sums
//! `S_ℓ = Σ_{i ≤ ℓ} σ(i) ξ_i` of a stationary Gaussian sequence `(ξ_i)` with
//! nonnegative correlations.
//!
//! The crate covers correlation and weight families ([`kernels`]), the
//! special functions of the non-summable regime ([`special`]), exact
//! covariance structures ([`covariance`]), exact sampling ([`simulate`]),
//! probability and exponent estimation ([`estimate`]) and the experiment
//! runner behind the command line tool ([`harness`]).

pub mod error;
pub mod estimate;
pub mod harness;
pub mod covariance;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod stationary;

pub use error::{Error, Result};
