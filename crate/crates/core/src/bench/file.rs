use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::svg::{density_svg, Curve};
use crate::baselines::{grenander, StepDensity};
use crate::engine::{fit, PrConfig, PrFit};
use crate::error::{Error, Result};
use crate::kernels::{uniform_kernel, Kernel, KernelDescriptor};
use crate::measure::MeasureJson;
use crate::monotone::{build_support, initial_guess, origin_estimate, DEFAULT_LOWER};
use crate::quad;

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub config: PrConfig,
    /// `ℓ`
    pub lower: f64,
    pub grenander: bool,
    pub output_dir: PathBuf,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            config: PrConfig::default(),
            lower: DEFAULT_LOWER,
            grenander: false,
            output_dir: PathBuf::from("fit"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub data: Vec<f64>,
    pub fit: PrFit,
    pub origin_density: f64,
    pub grenander: Option<Result<StepDensity, String>>,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct SupportJson {
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct EstimateJson<'a> {
    n_used: usize,
    n_dropped: usize,
    support: SupportJson,
    kernel: KernelDescriptor,
    config: &'a PrConfig,
    origin_density: f64,
    mixing: MeasureJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    grenander: Option<&'a StepDensity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grenander_error: Option<&'a str>,
}

/// Parses one numeric column. A non-numeric first line is taken as a
/// header; blank lines are skipped. Line numbers in errors start at 1.
pub fn parse_observations(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::input(line, e.to_string())
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(index + 1);
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        match fields.as_slice() {
            [] => continue,
            [field] => match field.parse::<f64>() {
                Ok(x) if !x.is_finite() => {
                    return Err(Error::input(
                        Some(line),
                        format!("value {field:?} is not finite"),
                    ))
                }
                Ok(x) if x < 0.0 => {
                    return Err(Error::input(Some(line), format!("negative value {x}")))
                }
                Ok(x) => data.push(x),
                Err(_) if index == 0 => continue,
                Err(_) => {
                    return Err(Error::input(
                        Some(line),
                        format!("{field:?} is not a number"),
                    ))
                }
            },
            _ => {
                return Err(Error::input(
                    Some(line),
                    format!("expected one column, found {}", fields.len()),
                ))
            }
        }
    }
    if data.is_empty() {
        return Err(Error::input(None, "no observations"));
    }
    Ok(data)
}

pub fn read_observations(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::input(None, format!("cannot read {}: {e}", path.display())))?;
    parse_observations(&text)
}

/// Fits PR (and optionally Grenander) to a one-column CSV file and writes
/// `estimate.json` and `density.svg` into `options.output_dir`.
pub fn fit_file(input: &Path, options: &FitOptions) -> Result<FitReport> {
    let data = read_observations(input)?;
    let support = build_support(&data, options.lower)?;
    let initial = initial_guess(support, &options.config)?;
    let kernel = uniform_kernel();
    let fitted = fit(&data, &kernel, &initial, &options.config)?;
    if !fitted.mixing.is_normalized() {
        return Err(Error::DegenerateMeasure(fitted.mixing.total_mass()));
    }
    let origin_density = origin_estimate(&fitted)?;
    let step = options
        .grenander
        .then(|| grenander(&data).map_err(|e| e.to_string()));

    fs::create_dir_all(&options.output_dir)?;
    let estimate = EstimateJson {
        n_used: fitted.n_used,
        n_dropped: fitted.n_dropped,
        support: SupportJson {
            lower: support.lower(),
            upper: support.upper(),
        },
        kernel: fitted.kernel,
        config: &options.config,
        origin_density,
        mixing: MeasureJson::from(&fitted.mixing),
        grenander: step.as_ref().and_then(|s| s.as_ref().ok()),
        grenander_error: step
            .as_ref()
            .and_then(|s| s.as_ref().err())
            .map(String::as_str),
    };
    let json_path = options.output_dir.join("estimate.json");
    fs::write(&json_path, serde_json::to_string_pretty(&estimate)?)?;

    let xs = quad::linspace(0.0, support.upper(), 600);
    let mut curves = vec![Curve {
        label: "predictive recursion".into(),
        points: xs
            .iter()
            .copied()
            .zip(kernel.mixture_density_many(&fitted.mixing, &xs)?)
            .collect(),
    }];
    if let Some(Ok(s)) = &step {
        let mut points = Vec::new();
        for (w, &h) in s.breakpoints().windows(2).zip(s.heights()) {
            points.push((w[0], h));
            points.push((w[1], h));
        }
        curves.push(Curve {
            label: "Grenander".into(),
            points,
        });
    }
    let svg_path = options.output_dir.join("density.svg");
    fs::write(
        &svg_path,
        density_svg(&format!("n = {}", data.len()), &data, &curves),
    )?;

    Ok(FitReport {
        data,
        fit: fitted,
        origin_density,
        grenander: step,
        files: vec![json_path, svg_path],
    })
}
