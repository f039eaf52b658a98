//! Exact sampling on l_p spheres and L_p balls, with Monte Carlo estimation
//! of norm-threshold tail probabilities and the analytic decay envelopes they
//! obey in high dimension.
//!
//! The engine rests on one representation: a vector of i.i.d. p-exponential
//! variables (density `c_p e^{-t^p}` on `(0, inf)`), normalized by its own
//! l_p norm, is uniform on the positive quadrant of the l_p sphere and
//! independent of the norm that was divided out. Everything else is built on
//! top: sign symmetrization gives the full sphere, a `U^{1/n}` radius gives
//! the ball, and the normalized-q-norm law under the sphere measure equals
//! the law of an explicit ratio statistic of the raw vector, which is what
//! the tail estimator actually samples.
//!
//! Modules:
//! - [`pexp`]: the p-exponential family (sampling, Laplace transform, tail
//!   bounds, moments).
//! - [`geometry`]: sphere/ball samplers, normalized norms, ratio statistic.
//! - [`estimator`]: chunked, reproducible Monte Carlo tail estimation with
//!   exact binomial intervals, plus analytic bound envelopes.
//! - [`radial`]: ball probabilities from sphere probabilities via the radial
//!   decomposition.
//! - [`oracle`]: independent ground truth (closed forms and quadrature at
//!   n <= 3, coordinate laws, exact p-exponential tails) used by the test
//!   suite to validate the samplers and estimators.
//! - [`constants`]: frozen calibrated constants standing in for the
//!   universal constants of the decay bounds.

pub mod config;
pub mod constants;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod oracle;
pub mod output;
pub mod pexp;
pub mod radial;
pub mod special;
pub mod stats;
pub mod stream;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
