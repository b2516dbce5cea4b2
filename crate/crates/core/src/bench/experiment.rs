use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svg::{box_stats, boxplot_svg, median};
use super::{derive_seed, mixture_l1, sample, step_l1};
use crate::baselines::grenander;
use crate::engine::{fit_observed, PrConfig};
use crate::error::{Error, Result};
use crate::kernels::{uniform_kernel, Kernel};
use crate::metrics::DEFAULT_RESOLUTION;
use crate::monotone::{
    build_support, initial_guess, origin_estimate, truth_by_name, MixtureFloor, MonotoneTruth,
    DEFAULT_LOWER,
};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Grenander,
    Pr,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Grenander => "grenander",
            Estimator::Pr => "pr",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L1,
    OriginRatio,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::L1 => "l1",
            Metric::OriginRatio => "origin_ratio",
        }
    }
}

/// A simulation study: repeated draws from one truth at several sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub truth_name: String,
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    #[serde(default)]
    pub pr_config: PrConfig,
    /// `ℓ`, the lower end of the PR support.
    #[serde(default = "default_lower")]
    pub lower: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Quadrature nodes for the L1 distances.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// When positive, every PR update is checked against the mixture floor
    /// at this many equally spaced points of `[0, L]`.
    #[serde(default)]
    pub floor_probes: usize,
    #[serde(default = "default_plots")]
    pub plots: bool,
}

fn default_replications() -> usize {
    200
}

fn default_estimators() -> Vec<Estimator> {
    vec![Estimator::Pr, Estimator::Grenander]
}

fn default_lower() -> f64 {
    DEFAULT_LOWER
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

fn default_plots() -> bool {
    true
}

impl ExperimentSpec {
    pub fn new(truth_name: &str, sample_sizes: Vec<usize>, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            truth_name: truth_name.to_string(),
            sample_sizes,
            replications: default_replications(),
            estimators: default_estimators(),
            pr_config: PrConfig::default(),
            lower: DEFAULT_LOWER,
            seed: 0,
            output_dir: output_dir.into(),
            resolution: DEFAULT_RESOLUTION,
            floor_probes: 0,
            plots: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            serde_json::from_str(text).map_err(|e| Error::config(format!("invalid spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        truth_by_name(&self.truth_name)?;
        if self.replications < 1 {
            return Err(Error::config("replications must be at least 1"));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::config(
                "sample sizes must be a non-empty list of positive integers",
            ));
        }
        if self.estimators.is_empty() {
            return Err(Error::config("at least one estimator is required"));
        }
        if !(self.lower > 0.0) || !self.lower.is_finite() {
            return Err(Error::config("lower must be positive"));
        }
        if self.resolution < 2 {
            return Err(Error::config("resolution must be at least 2"));
        }
        self.pr_config.validate()
    }
}

/// One estimator on one simulated data set.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub truth: String,
    pub estimator: Estimator,
    pub n: usize,
    pub replication: usize,
    pub l1: Option<f64>,
    /// `m̂(0) / m⋆(0)`
    pub origin_ratio: Option<f64>,
    pub error: Option<String>,
    pub wall_time_ms: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    truth: &'a str,
    estimator: &'static str,
    n: usize,
    replication: usize,
    l1: Option<f64>,
    origin_ratio: Option<f64>,
    error: &'a str,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    truth: &'a str,
    estimator: &'static str,
    n: usize,
    replication: usize,
    wall_time_ms: f64,
}

/// Outcome of the mixture-floor checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FloorSummary {
    pub checks: u64,
    pub violations: u64,
    /// Smallest `m_i(x) / floor_i` seen.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    /// Sorted by truth, estimator, n and replication.
    pub rows: Vec<ResultRow>,
    pub floor: Option<FloorSummary>,
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn values(&self, estimator: Estimator, n: usize, metric: Metric) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.estimator == estimator && r.n == n)
            .filter_map(|r| match metric {
                Metric::L1 => r.l1,
                Metric::OriginRatio => r.origin_ratio,
            })
            .collect()
    }

    pub fn median(&self, estimator: Estimator, n: usize, metric: Metric) -> Option<f64> {
        median(&self.values(estimator, n, metric))
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

struct Outcome {
    l1: f64,
    origin_ratio: f64,
}

struct FloorCounter {
    checks: AtomicU64,
    violations: AtomicU64,
    /// Bits of the smallest ratio; positive floats order like their bits.
    worst: AtomicU64,
}

impl FloorCounter {
    fn new() -> Self {
        FloorCounter {
            checks: AtomicU64::new(0),
            violations: AtomicU64::new(0),
            worst: AtomicU64::new(f64::INFINITY.to_bits()),
        }
    }

    fn record(&self, ratio: f64) {
        self.checks.fetch_add(1, Ordering::Relaxed);
        if !(ratio >= 1.0) {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
        let bits = if ratio.is_nan() {
            0
        } else {
            ratio.max(0.0).to_bits()
        };
        self.worst.fetch_min(bits, Ordering::Relaxed);
    }

    fn summary(&self) -> FloorSummary {
        FloorSummary {
            checks: self.checks.load(Ordering::Relaxed),
            violations: self.violations.load(Ordering::Relaxed),
            worst_ratio: f64::from_bits(self.worst.load(Ordering::Relaxed)),
        }
    }
}

fn run_pr(
    spec: &ExperimentSpec,
    truth: &dyn MonotoneTruth,
    data: &[f64],
    seed: u64,
    floor: Option<&FloorCounter>,
) -> Result<Outcome> {
    let support = build_support(data, spec.lower)?;
    let config = spec.pr_config.clone().with_seed(seed);
    let initial = initial_guess(support, &config)?;
    let kernel = uniform_kernel();
    let probes = match floor {
        Some(_) => quad::linspace(0.0, support.upper(), spec.floor_probes.max(2)),
        None => Vec::new(),
    };
    let floors: Vec<f64> = match floor {
        Some(_) => {
            let mut f = MixtureFloor::new(
                config.initial_atom_upper,
                support.upper(),
                config.weight_constant,
            )?;
            (0..=data.len())
                .map(|i| if i == 0 { f.value() } else { f.advance() })
                .collect()
        }
        None => Vec::new(),
    };
    let fit = fit_observed(data, &kernel, &initial, &config, |_, i, m| {
        if let Some(counter) = floor {
            let values = kernel.mixture_density_many(m, &probes)?;
            for v in values {
                counter.record(v / floors[i]);
            }
        }
        Ok(None)
    })?;
    if !fit.mixing.is_normalized() {
        return Err(Error::DegenerateMeasure(fit.mixing.total_mass()));
    }
    Ok(Outcome {
        l1: mixture_l1(&fit.mixing, truth, spec.resolution)?,
        origin_ratio: origin_estimate(&fit)? / truth.density(0.0),
    })
}

fn run_grenander(
    spec: &ExperimentSpec,
    truth: &dyn MonotoneTruth,
    data: &[f64],
) -> Result<Outcome> {
    let step = grenander(data)?;
    Ok(Outcome {
        l1: step_l1(&step, truth, spec.resolution)?,
        origin_ratio: step.at(0.0) / truth.density(0.0),
    })
}

/// Runs the study and writes `results.csv`, `timings.csv`, `summary.csv`
/// and one boxplot per metric and sample size into `spec.output_dir`.
///
/// Estimator failures are recorded in the `error` column. Everything except
/// `timings.csv` is a pure function of the spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let truth = truth_by_name(&spec.truth_name)?;
    let truth = truth.as_ref();
    let counter = (spec.floor_probes > 0).then(FloorCounter::new);
    let mut estimators = spec.estimators.clone();
    estimators.sort();
    estimators.dedup();

    let tasks: Vec<(usize, usize)> = spec
        .sample_sizes
        .iter()
        .flat_map(|&n| (0..spec.replications).map(move |r| (n, r)))
        .collect();
    let mut rows: Vec<ResultRow> = tasks
        .par_iter()
        .flat_map_iter(|&(n, rep)| {
            let seed = derive_seed(spec.seed, &[n as u64, rep as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = sample(truth, n, &mut rng);
            let counter = counter.as_ref();
            estimators
                .iter()
                .map(|&estimator| {
                    let start = Instant::now();
                    let outcome = match estimator {
                        Estimator::Pr => {
                            run_pr(spec, truth, &data, derive_seed(seed, &[1]), counter)
                        }
                        Estimator::Grenander => run_grenander(spec, truth, &data),
                    };
                    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
                    let (l1, origin_ratio, error) = match outcome {
                        Ok(o) => (Some(o.l1), Some(o.origin_ratio), None),
                        Err(e) => (None, None, Some(e.to_string())),
                    };
                    ResultRow {
                        truth: spec.truth_name.clone(),
                        estimator,
                        n,
                        replication: rep,
                        l1,
                        origin_ratio,
                        error,
                        wall_time_ms,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.truth, a.estimator, a.n, a.replication).cmp(&(
            &b.truth,
            b.estimator,
            b.n,
            b.replication,
        ))
    });

    let mut report = ExperimentReport {
        spec: spec.clone(),
        rows,
        floor: counter.map(|c| c.summary()),
        files: Vec::new(),
    };
    write_outputs(&mut report, &estimators)?;
    Ok(report)
}

fn csv_bytes<T: Serialize>(records: impl Iterator<Item = T>) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer
            .serialize(r)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn write_outputs(report: &mut ExperimentReport, estimators: &[Estimator]) -> Result<()> {
    let dir = report.spec.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut write = |name: String, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        files.push(path);
        Ok(())
    };

    let results = csv_bytes(report.rows.iter().map(|r| CsvRow {
        truth: &r.truth,
        estimator: r.estimator.name(),
        n: r.n,
        replication: r.replication,
        l1: r.l1,
        origin_ratio: r.origin_ratio,
        error: r.error.as_deref().unwrap_or(""),
    }))?;
    write("results.csv".into(), &results)?;
    let timings = csv_bytes(report.rows.iter().map(|r| TimingRow {
        truth: &r.truth,
        estimator: r.estimator.name(),
        n: r.n,
        replication: r.replication,
        wall_time_ms: r.wall_time_ms,
    }))?;
    write("timings.csv".into(), &timings)?;

    let mut sizes = report.spec.sample_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut summary = String::from("truth,estimator,n,metric,count,median,q1,q3\n");
    for &e in estimators {
        for &n in &sizes {
            for metric in [Metric::L1, Metric::OriginRatio] {
                let values = report.values(e, n, metric);
                let line = match box_stats(&values) {
                    Some(s) => format!(
                        "{},{},{},{},{},{},{},{}\n",
                        report.spec.truth_name,
                        e,
                        n,
                        metric.name(),
                        values.len(),
                        s.median,
                        s.q1,
                        s.q3
                    ),
                    None => format!(
                        "{},{},{},{},0,,,\n",
                        report.spec.truth_name,
                        e,
                        n,
                        metric.name()
                    ),
                };
                summary.push_str(&line);
            }
        }
    }
    write("summary.csv".into(), summary.as_bytes())?;

    if report.spec.plots {
        for metric in [Metric::L1, Metric::OriginRatio] {
            for &n in &sizes {
                let groups: Vec<(String, Vec<f64>)> = estimators
                    .iter()
                    .map(|&e| (e.name().to_string(), report.values(e, n, metric)))
                    .collect();
                let title = format!("{} truth, n = {n}", report.spec.truth_name);
                let svg = boxplot_svg(&title, metric.name(), &groups);
                write(
                    format!("boxplot_{}_n{n}.svg", metric.name()),
                    svg.as_bytes(),
                )?;
            }
        }
    }
    report.files = files;
    Ok(())
}
