//! Bayesian versus plug-in estimates of extreme tail probabilities.
//!
//! For a parametric family `F(x|θ)` and an observed sample, the plug-in
//! estimate of `P(X > a)` is `1 - F(a|θ̂)` at the MLE, while the Bayesian
//! estimate averages the tail over the posterior. This crate computes both,
//! their gap `D(a)` exactly and through a third-order Taylor expansion in
//! posterior moments, and checks whether the tail is convex in `θ`, the
//! condition under which Jensen's inequality orders the two estimates.
//!
//! ```
//! use tailgap::{estimators, Family, PosteriorSpec, Sample};
//!
//! let sample = Sample::new(vec![0.8, 1.3, 0.4, 2.1, 0.9]).unwrap();
//! let spec = PosteriorSpec::with_default_prior(Family::Exponential, sample).unwrap();
//! let c = estimators::difference_exact(&spec, 12.0).unwrap();
//! assert!(c.p_bayes > c.p_freq);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod convexity;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod family;
pub mod montecarlo;
pub mod posterior;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use exec::Execution;
pub use family::{Family, GenericFamily, ParamVector, Sample};
pub use posterior::{PosteriorSpec, Prior};
