//! What PR converges to when the mixing support is cut to [l, L]: the KL
//! minimizer's atoms and the L1 bias bound, for a few supports.

use predictive_recursion::monotone::{bias_bound, truth_by_name, KlMinimizer, TRUTH_NAMES};
use predictive_recursion::SupportInterval;

fn main() -> predictive_recursion::Result<()> {
    for name in TRUTH_NAMES {
        let truth = truth_by_name(name)?;
        println!("{name}");
        println!(
            "{:>8} {:>6} {:>11} {:>11} {:>9} {:>11}",
            "l", "L", "a_l", "a_L", "m†(0)", "bias bound"
        );
        for (lower, upper) in [(0.1, 2.0), (0.01, 5.0), (1e-5, 10.0)] {
            let support = SupportInterval::new(lower, upper)?;
            let k = KlMinimizer::new(truth.as_ref(), support)?;
            println!(
                "{lower:>8.0e} {upper:>6} {:>11.3e} {:>11.3e} {:>9.4} {:>11.3e}",
                k.atom_lower(),
                k.atom_upper(),
                k.origin_density(),
                bias_bound(truth.as_ref(), support)?
            );
        }
    }
    Ok(())
}
