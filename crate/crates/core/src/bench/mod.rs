//! Seeded sampling, the simulation study, fitting data files, and plots.

mod experiment;
mod file;
pub mod svg;

pub use experiment::{
    run_experiment, Estimator, ExperimentReport, ExperimentSpec, FloorSummary, Metric, ResultRow,
};
pub use file::{fit_file, parse_observations, read_observations, FitOptions, FitReport};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::StepDensity;
use crate::error::{Error, Result};
use crate::kernels::{uniform_kernel, Kernel};
use crate::measure::MixingMeasure;
use crate::metrics::{l1_distance, DensityPair};
use crate::monotone::{truth_by_name, MonotoneTruth};

/// `n` draws from `truth`.
pub fn sample(truth: &dyn MonotoneTruth, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| truth.sample(rng)).collect()
}

/// `n` draws from the named truth, seeded by `seed`.
pub fn sample_truth(name: &str, n: usize, seed: u64) -> Result<Vec<f64>> {
    let truth = truth_by_name(name)?;
    if n == 0 {
        return Err(Error::config("sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(truth.as_ref(), n, &mut rng))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a path of indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// `∫_0^∞ |m_P - m⋆|` for a uniform-kernel mixture: quadrature on
/// `[0, L]` split at `ℓ`, plus the tail mass of `m⋆` beyond `L`.
pub fn mixture_l1(
    measure: &MixingMeasure,
    truth: &dyn MonotoneTruth,
    resolution: usize,
) -> Result<f64> {
    let support = measure.support();
    let kernel = uniform_kernel();
    let pair = DensityPair::from_batch(
        |xs: &[f64]| kernel.mixture_density_many(measure, xs),
        |xs: &[f64]| Ok(xs.iter().map(|&x| truth.density(x)).collect()),
        0.0,
        support.upper(),
    )?
    .with_resolution(resolution)?
    .with_breakpoints([support.lower()]);
    Ok(l1_distance(&pair)? + truth.survival(support.upper()))
}

/// `∫_0^∞ |f̂ - m⋆|` for a step density.
pub fn step_l1(step: &StepDensity, truth: &dyn MonotoneTruth, resolution: usize) -> Result<f64> {
    let pair = DensityPair::new(|x| step.at(x), |x| truth.density(x), 0.0, step.upper())?
        .with_resolution(resolution)?
        .with_breakpoints(step.breakpoints().iter().copied());
    Ok(l1_distance(&pair)? + truth.survival(step.upper()))
}
