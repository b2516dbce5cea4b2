//! The file workflow behind `prmono fit`: read a one-column CSV, fit PR and
//! Grenander, write estimate.json and density.svg.

use predictive_recursion::bench::{fit_file, FitOptions};
use predictive_recursion::PrConfig;

fn main() -> predictive_recursion::Result<()> {
    let dir = std::env::temp_dir().join("prmono-fit");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("durations.csv");
    let mut text = String::from("days\n");
    for i in 0..120u32 {
        // Deterministic, roughly exponential durations.
        let u = (f64::from(i) + 0.5) / 120.0;
        text.push_str(&format!("{:.3}\n", -30.0 * (1.0 - u).ln()));
    }
    std::fs::write(&input, text)?;

    let options = FitOptions {
        config: PrConfig::default()
            .with_initial_atoms(1e-7, 1e-7)?
            .with_seed(1),
        grenander: true,
        output_dir: dir.join("out"),
        lower: 0.01,
        ..FitOptions::default()
    };
    let report = fit_file(&input, &options)?;
    println!(
        "{} observations, support up to {:.2}",
        report.fit.n_used,
        report.fit.mixing.support().upper()
    );
    println!(
        "PR density at 0: {:.5} (exponential with mean 30: {:.5})",
        report.origin_density,
        1.0 / 30.0
    );
    if let Some(Ok(step)) = &report.grenander {
        println!("Grenander at 0: {:.5}", step.at(0.0));
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
