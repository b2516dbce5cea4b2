//! Predictive recursion (PR) for nonparametric estimation of mixing
//! distributions, with a full toolkit for monotone density estimation via
//! scale mixtures of uniform kernels.
//!
//! The crate is organized around a few pieces:
//!
//! - [`measure`]: hybrid mixing measures (endpoint atoms plus a gridded density).
//! - [`kernels`]: the kernel contract, the uniform scale kernel and a Gaussian
//!   location kernel, and mixture-density evaluation.
//! - [`engine`]: the PR update, weight schedule, permutation-averaged fits and
//!   the `T` diagnostic.
//! - [`monotone`]: ground-truth monotone densities, the restricted target,
//!   the closed-form Kullback-Leibler minimizer and its bias bounds.
//! - [`baselines`]: the Grenander estimator.
//! - [`metrics`]: KL divergence, L1 and Hellinger distances, Hellinger contrast.
//! - [`bench`]: seeded sampling, the simulation study runner, file fitting
//!   and SVG output.

pub mod baselines;
pub mod bench;
pub mod engine;
pub mod error;
pub mod kernels;
pub mod measure;
pub mod metrics;
pub mod monotone;
pub mod quad;

pub use engine::{fit, pr_update, weight, PrConfig, PrFit};
pub use error::{Error, Result};
pub use kernels::{gaussian_kernel, mixture_density, uniform_kernel, Kernel, KernelDescriptor};
pub use measure::{MixingMeasure, SupportInterval};
