//! Deconvolution k-means for noise-contaminated samples.
//!
//! Observations are `Z = X + eps` where `eps` has a known law with a
//! polynomially decaying characteristic function. Clustering `X` directly
//! from `Z` with ordinary k-means targets the wrong risk. Instead, the loss
//! `min_j |x - c_j|^2` is smoothed against a deconvolution kernel, giving
//! the deconvolved empirical risk
//!
//! ```text
//! R_n(c) = (1/n) sum_i int_K (1/lambda) K_eta((Z_i - x)/lambda) min_j |x - c_j|^2 dx
//! ```
//!
//! which is minimised over codebooks `c`. On a quadrature grid this risk is
//! exactly the clustering risk against the signed deconvolution density
//! estimate, so a weighted Lloyd iteration minimises it.
//!
//! Modules:
//! - [`noise`]: noise laws, characteristic functions, samplers.
//! - [`kernels`]: base kernels and deconvolution kernel tables.
//! - [`deconv_risk`]: quadrature grid, density estimate, deconvolved risk.
//! - [`clustering`]: codebooks, weighted Lloyd, multi-start, baselines.
//! - [`experiments`]: sources, bandwidth rules, Monte Carlo rate and bias
//!   experiments.
//! - [`cli`]: configuration files and the subcommands of the binary.
//!
//! The runnable programs under `examples/` walk through each capability.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod clustering;
pub mod deconv_risk;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod noise;
pub mod points;
pub mod rng;
pub mod stats;

pub use clustering::{Codebook, LloydOptions, LloydReport};
pub use deconv_risk::{DeconvDensity, QuadratureGrid};
pub use error::{Error, Result};
pub use kernels::{BaseKernel, DeconvKernelTable, InversionSettings};
pub use noise::{NoiseComponent, NoiseModel};
pub use points::PointSet;
