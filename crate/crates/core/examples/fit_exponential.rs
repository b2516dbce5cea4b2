//! Fit predictive recursion to exponential draws and compare with the truth.

use predictive_recursion::bench::{mixture_l1, sample_truth};
use predictive_recursion::monotone::{
    build_support, initial_guess, origin_estimate, Exponential, MonotoneTruth,
};
use predictive_recursion::{fit, uniform_kernel, PrConfig};

fn main() -> predictive_recursion::Result<()> {
    let data = sample_truth("exponential", 500, 7)?;
    let support = build_support(&data, 1e-5)?;
    let config = PrConfig::default().with_initial_atoms(1e-7, 1e-7)?;
    let initial = initial_guess(support, &config)?;
    let fitted = fit(&data, &uniform_kernel(), &initial, &config)?;

    println!(
        "support [{:.0e}, {:.3}], {} orderings",
        support.lower(),
        support.upper(),
        config.permutations
    );
    println!("{:>6} {:>10} {:>10}", "x", "m_n(x)", "m*(x)");
    for x in [0.05, 0.25, 0.5, 1.0, 2.0, 3.0] {
        println!(
            "{x:>6.2} {:>10.4} {:>10.4}",
            fitted.density(x)?,
            Exponential.density(x)
        );
    }
    let mixing = &fitted.mixing;
    println!(
        "atoms: {:.2e} at l, {:.2e} at L; interior mass {:.4}",
        mixing.atom_lower(),
        mixing.atom_upper(),
        mixing.interior_mass()
    );
    println!(
        "L1 distance to truth: {:.4}",
        mixture_l1(mixing, &Exponential, 10_000)?
    );
    println!("m_n(0) = {:.3} (truth 1)", origin_estimate(&fitted)?);
    Ok(())
}
