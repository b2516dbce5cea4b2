//! A small seeded simulation study: results.csv, summary.csv and boxplots
//! land in the output directory.

use predictive_recursion::bench::{run_experiment, Estimator, ExperimentSpec, Metric};

fn main() -> predictive_recursion::Result<()> {
    let out = std::env::temp_dir().join("prmono-simulation");
    let mut spec = ExperimentSpec::new("halfnormal", vec![50, 100, 200], &out);
    spec.replications = 20;
    spec.floor_probes = 5;
    spec.pr_config = spec
        .pr_config
        .with_permutations(10)?
        .with_initial_atoms(1e-7, 1e-7)?;
    let report = run_experiment(&spec)?;

    println!(
        "{:>5} {:>12} {:>14} {:>12}",
        "n", "PR L1", "Grenander L1", "PR m(0)/m*"
    );
    for &n in &spec.sample_sizes {
        println!(
            "{n:>5} {:>12.4} {:>14.4} {:>12.3}",
            report
                .median(Estimator::Pr, n, Metric::L1)
                .unwrap_or(f64::NAN),
            report
                .median(Estimator::Grenander, n, Metric::L1)
                .unwrap_or(f64::NAN),
            report
                .median(Estimator::Pr, n, Metric::OriginRatio)
                .unwrap_or(f64::NAN),
        );
    }
    if let Some(floor) = &report.floor {
        println!(
            "floor: {} checks, {} violations",
            floor.checks, floor.violations
        );
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
