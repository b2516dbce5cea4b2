//! Watch KL(m*L, m_i) along a single PR pass and evaluate the T functional
//! at the end.

use predictive_recursion::bench::sample_truth;
use predictive_recursion::engine::{run_sequence, t_functional};
use predictive_recursion::metrics::{kl_divergence, DensityPair};
use predictive_recursion::monotone::{build_support, initial_guess, restrict_target, Exponential};
use predictive_recursion::{quad, uniform_kernel, Kernel, PrConfig};

fn main() -> predictive_recursion::Result<()> {
    let data = sample_truth("exponential", 400, 5)?;
    let support = build_support(&data, 1e-5)?;
    let target = restrict_target(&Exponential, support.upper())?;
    let config = PrConfig::default().with_weight_constant(0.2)?;
    let kernel = uniform_kernel();
    let initial = initial_guess(support, &config)?;

    let (last, trace) = run_sequence(&data, &kernel, &initial, &config, |i, m| {
        if i % 50 != 0 {
            return Ok(None);
        }
        let pair = DensityPair::from_batch(
            |xs: &[f64]| Ok(xs.iter().map(|&x| target.density(x)).collect()),
            |xs: &[f64]| kernel.mixture_density_many(m, xs),
            0.0,
            support.upper(),
        )?
        .with_breakpoints([support.lower()]);
        kl_divergence(&pair).map(Some)
    })?;

    println!("{:>5} {:>9} {:>10}", "i", "w_i", "KL");
    for entry in trace.iter().filter(|e| e.kl.is_some()) {
        println!(
            "{:>5} {:>9.5} {:>10.5}",
            entry.iteration,
            entry.weight,
            entry.kl.unwrap()
        );
    }
    let xs = quad::linspace(0.0, support.upper(), 4001);
    let t = t_functional(&last, |x| target.density(x), &kernel, &xs)?;
    println!("T(P_n) = {t:.4e}");
    Ok(())
}
