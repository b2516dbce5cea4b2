//! Recover the mixing distribution of a monotone density, P(du) = -u dm(u),
//! including the atom a uniform density hides at its right end.

use predictive_recursion::monotone::{williamson_inverse, HalfNormal, MonotoneTruth};
use predictive_recursion::quad;

fn main() -> predictive_recursion::Result<()> {
    let truth = HalfNormal;
    let grid = quad::linspace(0.0, 6.0, 601);
    let inverse = williamson_inverse(|x| truth.density(x), |x| truth.density_derivative(x), &grid)?;
    println!("half-normal: no atoms ({} found)", inverse.atoms().len());
    for u in [0.5, 1.0, 2.0] {
        println!(
            "  p({u}) = {:.6}, closed form {:.6}",
            inverse.density(u),
            truth.mixing_density(u)
        );
    }

    // Unif(0, 2): a single atom at 2, found from the drop of 0.5 there.
    let m = |x: f64| if x <= 2.0 { 0.5 } else { 0.0 };
    let inverse = williamson_inverse(m, |_| 0.0, &quad::linspace(0.0, 3.0, 31))?;
    for atom in inverse.atoms() {
        println!(
            "uniform: atom of mass {:.6} at {:.6}",
            atom.mass, atom.location
        );
    }
    Ok(())
}
