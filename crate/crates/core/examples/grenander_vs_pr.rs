//! Grenander's step estimator against smooth PR on half-normal data.

use predictive_recursion::baselines::grenander;
use predictive_recursion::bench::{mixture_l1, sample_truth, step_l1};
use predictive_recursion::monotone::{
    build_support, initial_guess, origin_estimate, HalfNormal, MonotoneTruth,
};
use predictive_recursion::{fit, uniform_kernel, PrConfig};

fn main() -> predictive_recursion::Result<()> {
    let truth = HalfNormal;
    for n in [50, 200, 1000] {
        let data = sample_truth("halfnormal", n, 11)?;
        let step = grenander(&data)?;
        let support = build_support(&data, 1e-5)?;
        let config = PrConfig::default().with_initial_atoms(1e-7, 1e-7)?;
        let fitted = fit(
            &data,
            &uniform_kernel(),
            &initial_guess(support, &config)?,
            &config,
        )?;
        println!(
            "n = {n:>4}: L1 grenander {:.4}, pr {:.4}; at 0: grenander {:.3}, pr {:.3}, truth {:.3}; {} steps",
            step_l1(&step, &truth, 10_000)?,
            mixture_l1(&fitted.mixing, &truth, 10_000)?,
            step.at(0.0),
            origin_estimate(&fitted)?,
            truth.density(0.0),
            step.heights().len()
        );
    }
    Ok(())
}
