//! Command-line front end: fit a data file, run a simulation study, or
//! print the oracle quantities for a known truth.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use predictive_recursion::bench::{fit_file, run_experiment, ExperimentSpec, FitOptions};
use predictive_recursion::monotone::{bias_bound, truth_by_name, KlMinimizer, DEFAULT_LOWER};
use predictive_recursion::{Error, PrConfig, Result, SupportInterval};

#[derive(Parser)]
#[command(
    name = "prmono",
    version,
    about = "Monotone density estimation by predictive recursion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a one-column CSV of non-negative observations.
    Fit {
        input: PathBuf,
        /// Lower end of the mixing support.
        #[arg(long, default_value_t = DEFAULT_LOWER)]
        ell: f64,
        /// Number of random orderings to average over.
        #[arg(long, default_value_t = 25)]
        perms: usize,
        /// Weight constant in w_i = a / (i + 1).
        #[arg(long, default_value_t = 0.1)]
        a: f64,
        /// Grid nodes for the mixing density.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compute the Grenander estimator.
        #[arg(long)]
        grenander: bool,
        #[arg(long, default_value = "fit")]
        out: PathBuf,
    },
    /// Run a simulation study described by a JSON spec.
    Simulate {
        spec: PathBuf,
        /// Overrides the spec's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the KL-minimizer coefficients and the L1 bias bound.
    Oracle {
        truth: String,
        #[arg(long, default_value_t = DEFAULT_LOWER)]
        ell: f64,
        #[arg(long = "L")]
        upper: f64,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            input,
            ell,
            perms,
            a,
            grid,
            seed,
            grenander,
            out,
        } => {
            let config = PrConfig::default()
                .with_weight_constant(a)?
                .with_permutations(perms)?
                .with_grid_size(grid)?
                .with_seed(seed);
            let options = FitOptions {
                config,
                lower: ell,
                grenander,
                output_dir: out,
            };
            let report = fit_file(&input, &options)?;
            let support = report.fit.mixing.support();
            println!("n_used = {}", report.fit.n_used);
            println!("support = [{}, {}]", support.lower(), support.upper());
            println!("m_n(0) = {}", report.origin_density);
            if let Some(Ok(step)) = &report.grenander {
                println!("grenander(0) = {}", step.at(0.0));
            }
            if let Some(Err(e)) = &report.grenander {
                eprintln!("grenander failed: {e}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Simulate { spec, out } => {
            let text = std::fs::read_to_string(&spec)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", spec.display())))?;
            let mut spec = ExperimentSpec::from_json(&text)?;
            if let Some(dir) = out {
                spec.output_dir = dir;
            }
            let report = run_experiment(&spec)?;
            println!("{} rows, {} failures", report.rows.len(), report.failures());
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Oracle { truth, ell, upper } => {
            let truth = truth_by_name(&truth)?;
            let support = SupportInterval::new(ell, upper)?;
            let k = KlMinimizer::new(truth.as_ref(), support)?;
            let summary = serde_json::json!({
                "truth": truth.name(),
                "lower": ell,
                "upper": upper,
                "a_lower": k.atom_lower(),
                "a_interior": k.coefficient_interior(),
                "a_upper": k.atom_upper(),
                "interior_mass": k.interior_mass(),
                "minimizer_at_origin": k.origin_density(),
                "truth_at_origin": truth.density(0.0),
                "bias_bound": bias_bound(truth.as_ref(), support)?,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
