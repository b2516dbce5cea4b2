//! The predictive recursion algorithm.
//!
//! Each observation `x` moves the current estimate toward its single-point
//! posterior:
//!
//! ```text
//! P_i(du) = (1 - w_i) P_{i-1}(du) + w_i k(x_i|u) P_{i-1}(du) / ∫ k(x_i|v) P_{i-1}(dv)
//! ```
//!
//! with weights `w_i = a / (i + 1)`, `0 < a < 2/9`. A fit runs the recursion
//! over several seeded permutations of the data and averages the resulting
//! mixing measures component-wise.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelDescriptor};
use crate::measure::{self, MixingMeasure};

/// Exclusive upper bound on the weight constant `a`.
pub const MAX_WEIGHT_CONSTANT: f64 = 2.0 / 9.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrConfig {
    /// `a` in `w_i = a / (i + 1)`.
    pub weight_constant: f64,
    pub grid_size: usize,
    pub permutations: usize,
    pub initial_atom_lower: f64,
    pub initial_atom_upper: f64,
    pub seed: u64,
    /// Smallest admissible update denominator.
    pub density_floor: f64,
}

impl Default for PrConfig {
    fn default() -> Self {
        PrConfig {
            weight_constant: 0.1,
            grid_size: 1000,
            permutations: 25,
            initial_atom_lower: 0.05,
            initial_atom_upper: 0.05,
            seed: 0,
            density_floor: 1e-300,
        }
    }
}

impl PrConfig {
    pub fn validate(&self) -> Result<()> {
        check_weight_constant(self.weight_constant)?;
        if self.grid_size < 2 {
            return Err(Error::config(format!(
                "grid_size must be at least 2, got {}",
                self.grid_size
            )));
        }
        if self.permutations < 1 {
            return Err(Error::config("permutations must be at least 1"));
        }
        let (lo, hi) = (self.initial_atom_lower, self.initial_atom_upper);
        if !(lo > 0.0 && lo < 1.0) || !(hi > 0.0 && hi < 1.0) || lo + hi >= 1.0 {
            return Err(Error::config(format!(
                "initial atom masses ({lo}, {hi}) must be in (0, 1) with sum below 1"
            )));
        }
        if !(self.density_floor > 0.0) || !self.density_floor.is_finite() {
            return Err(Error::config("density_floor must be positive and finite"));
        }
        Ok(())
    }

    pub fn with_weight_constant(mut self, a: f64) -> Result<Self> {
        self.weight_constant = a;
        self.validate().map(|_| self)
    }

    pub fn with_grid_size(mut self, g: usize) -> Result<Self> {
        self.grid_size = g;
        self.validate().map(|_| self)
    }

    pub fn with_permutations(mut self, r: usize) -> Result<Self> {
        self.permutations = r;
        self.validate().map(|_| self)
    }

    pub fn with_initial_atoms(mut self, lower: f64, upper: f64) -> Result<Self> {
        self.initial_atom_lower = lower;
        self.initial_atom_upper = upper;
        self.validate().map(|_| self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn check_weight_constant(a: f64) -> Result<()> {
    if !(a > 0.0 && a < MAX_WEIGHT_CONSTANT) {
        return Err(Error::config(format!(
            "weight constant must lie in (0, 2/9), got {a}"
        )));
    }
    Ok(())
}

/// Step size `w_i = a / (i + 1)` for the `i`-th observation (`i >= 1`).
pub fn weight(i: usize, a: f64) -> Result<f64> {
    check_weight_constant(a)?;
    if i == 0 {
        return Err(Error::config("observation index starts at 1"));
    }
    Ok(a / (i as f64 + 1.0))
}

/// One row of the per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub weight: f64,
    /// `m_{i-1}(x_i)`, the update denominator.
    pub denominator: f64,
    pub kl: Option<f64>,
}

/// Renders a trace as CSV. The `kl` column appears only when some entry has a value.
pub fn trace_csv(trace: &[TraceEntry]) -> String {
    let with_kl = trace.iter().any(|t| t.kl.is_some());
    let mut out = String::from(if with_kl {
        "iteration,weight,denominator,kl\n"
    } else {
        "iteration,weight,denominator\n"
    });
    for t in trace {
        let _ = write!(out, "{},{},{}", t.iteration, t.weight, t.denominator);
        if with_kl {
            out.push(',');
            if let Some(kl) = t.kl {
                let _ = write!(out, "{kl}");
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct PrFit {
    /// Permutation average of the final estimates.
    pub mixing: MixingMeasure,
    pub per_permutation: Vec<MixingMeasure>,
    /// One trace per permutation, in permutation order.
    pub diagnostics: Vec<Vec<TraceEntry>>,
    pub n_used: usize,
    pub n_dropped: usize,
    pub kernel: KernelDescriptor,
}

impl PrFit {
    /// The fitted mixture density `m_n(x)`.
    pub fn density(&self, x: f64) -> Result<f64> {
        let kernel = self.kernel.build()?;
        crate::kernels::mixture_density(kernel.as_ref(), &self.mixing, x)
    }

    pub fn density_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        self.kernel.build()?.mixture_density_many(&self.mixing, xs)
    }

    pub fn trace_csv(&self, permutation: usize) -> Option<String> {
        self.diagnostics.get(permutation).map(|t| trace_csv(t))
    }
}

/// Reusable buffers for repeated updates against one kernel.
struct Updater<'k, K: ?Sized> {
    kernel: &'k K,
    weights: Vec<f64>,
}

impl<'k, K: Kernel + ?Sized> Updater<'k, K> {
    fn new(kernel: &'k K, grid_len: usize) -> Self {
        Updater {
            kernel,
            weights: vec![0.0; grid_len],
        }
    }

    /// Applies one update in place and returns the denominator used.
    fn step(&mut self, m: &mut MixingMeasure, x: f64, w: f64, floor: f64) -> Result<f64> {
        let support = m.support();
        let (lower, upper) = (support.lower(), support.upper());
        self.kernel.node_weights(x, m.grid(), &mut self.weights)?;
        let k_lower = self.kernel.evaluate(x, lower)?;
        let k_upper = self.kernel.evaluate(x, upper)?;
        let interior = measure::dot(&self.weights, m.density());
        let denominator = m.atom_lower() * k_lower + m.atom_upper() * k_upper + interior;
        if !(denominator > floor) || !denominator.is_finite() {
            return Err(Error::ZeroLikelihood {
                x,
                denominator,
                iteration: None,
            });
        }
        let keep = 1.0 - w;
        let gain = w / denominator;
        // Each node moves by its cell-averaged kernel c_j / t_j, so the
        // posterior part carries trapezoid mass exactly w.
        for (c, &t) in self.weights.iter_mut().zip(m.grid().weights()) {
            *c /= t;
        }
        let (atom_lower, atom_upper, density) = m.parts_mut();
        *atom_lower *= keep + gain * k_lower;
        *atom_upper *= keep + gain * k_upper;
        for (p, &k) in density.iter_mut().zip(&self.weights) {
            *p *= keep + gain * k;
        }
        m.renormalize_in_place()?;
        Ok(denominator)
    }
}

/// A single PR update of `prev` by observation `x` with weight `w`.
pub fn pr_update<K: Kernel + ?Sized>(
    prev: &MixingMeasure,
    x: f64,
    w: f64,
    kernel: &K,
    density_floor: f64,
) -> Result<MixingMeasure> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::config(format!(
            "update weight must lie in (0, 1), got {w}"
        )));
    }
    let mut next = prev.clone();
    Updater::new(kernel, prev.grid().len()).step(&mut next, x, w, density_floor)?;
    Ok(next)
}

/// Runs PR over `config.permutations` seeded shuffles of `data` and averages.
pub fn fit<K: Kernel + ?Sized>(
    data: &[f64],
    kernel: &K,
    initial: &MixingMeasure,
    config: &PrConfig,
) -> Result<PrFit> {
    fit_observed(data, kernel, initial, config, |_, _, _| Ok(None))
}

/// Like [`fit`], calling `observer(permutation, iteration, &P_i)` after every
/// update. A returned value is recorded as the `kl` field of that trace row.
pub fn fit_observed<K, F>(
    data: &[f64],
    kernel: &K,
    initial: &MixingMeasure,
    config: &PrConfig,
    observer: F,
) -> Result<PrFit>
where
    K: Kernel + ?Sized,
    F: Fn(usize, usize, &MixingMeasure) -> Result<Option<f64>> + Sync,
{
    config.validate()?;
    if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("observation {bad} is not finite")));
    }
    let permutations = config.permutations;
    if data.is_empty() {
        return Ok(PrFit {
            mixing: initial.clone(),
            per_permutation: vec![initial.clone(); permutations],
            diagnostics: vec![Vec::new(); permutations],
            n_used: 0,
            n_dropped: 0,
            kernel: kernel.descriptor(),
        });
    }
    let (_, top) = kernel.observation_range(&initial.support());
    let kept: Vec<f64> = data.iter().copied().filter(|&x| x <= top).collect();
    let n_dropped = data.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::EmptyData { dropped: n_dropped });
    }

    let runs: Vec<Result<(MixingMeasure, Vec<TraceEntry>)>> = (0..permutations)
        .into_par_iter()
        .map(|r| {
            let mut order = kept.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(r as u64));
            order.shuffle(&mut rng);
            run_sequence(&order, kernel, initial, config, |i, m| observer(r, i, m))
        })
        .collect();

    let mut per_permutation = Vec::with_capacity(permutations);
    let mut diagnostics = Vec::with_capacity(permutations);
    for run in runs {
        let (m, trace) = run?;
        per_permutation.push(m);
        diagnostics.push(trace);
    }
    let mixing = measure::average(&per_permutation)?;
    Ok(PrFit {
        mixing,
        per_permutation,
        diagnostics,
        n_used: kept.len(),
        n_dropped,
        kernel: kernel.descriptor(),
    })
}

/// Processes `data` in the given order, without shuffling or filtering.
pub fn run_sequence<K, F>(
    data: &[f64],
    kernel: &K,
    initial: &MixingMeasure,
    config: &PrConfig,
    observer: F,
) -> Result<(MixingMeasure, Vec<TraceEntry>)>
where
    K: Kernel + ?Sized,
    F: Fn(usize, &MixingMeasure) -> Result<Option<f64>>,
{
    let mut current = initial.clone();
    let mut updater = Updater::new(kernel, initial.grid().len());
    let mut trace = Vec::with_capacity(data.len());
    for (idx, &x) in data.iter().enumerate() {
        let i = idx + 1;
        let w = weight(i, config.weight_constant)?;
        let denominator = updater
            .step(&mut current, x, w, config.density_floor)
            .map_err(|e| match e {
                Error::ZeroLikelihood { x, denominator, .. } => Error::ZeroLikelihood {
                    x,
                    denominator,
                    iteration: Some(i),
                },
                other => other,
            })?;
        let kl = observer(i, &current)?;
        trace.push(TraceEntry {
            iteration: i,
            weight: w,
            denominator,
            kl,
        });
    }
    Ok((current, trace))
}

/// The `T` functional from the consistency argument:
///
/// ```text
/// T(P) = ∫_U { ∫ m*(x) / m_P(x) k(x|u) dx }² P(du) - 1
/// ```
///
/// The inner integral interpolates `m* / m_P` linearly on `x_grid`, which is
/// split at the ends of the endpoint atoms' observation supports so the
/// jumps of `m_P` there are resolved. The outer integral treats the interior
/// density as linear between grid nodes and uses three Gauss-Legendre points
/// per cell.
pub fn t_functional<K, F>(
    measure: &MixingMeasure,
    target: F,
    kernel: &K,
    x_grid: &[f64],
) -> Result<f64>
where
    K: Kernel + ?Sized,
    F: Fn(f64) -> f64,
{
    if x_grid.len() < 2 || x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config(
            "x grid must have at least two increasing nodes",
        ));
    }
    let support = measure.support();
    let (x0, xn) = (x_grid[0], x_grid[x_grid.len() - 1]);
    let mut xs = x_grid.to_vec();
    for u in [support.lower(), support.upper()] {
        let (a, b) = kernel.observation_support(u);
        for edge in [a, b] {
            if edge > x0 && edge < xn {
                xs.push(edge.next_down());
                xs.push(edge);
                xs.push(edge.next_up());
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mixture = kernel.mixture_density_many(measure, &xs)?;
    let mut ratio = Vec::with_capacity(xs.len());
    for (&x, &m) in xs.iter().zip(&mixture) {
        let t = target(x);
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Evaluation {
                at: x,
                message: format!("target density is {t}"),
            });
        }
        if t == 0.0 {
            ratio.push(0.0);
        } else if m < 1e-300 {
            return Err(Error::Evaluation {
                at: x,
                message: format!("mixture density underflows ({m:e}) where the target is {t:e}"),
            });
        } else {
            ratio.push(t / m);
        }
    }

    // Gauss-Legendre on [-1, 1]
    const POINTS: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let nodes = measure.nodes();
    let density = measure.density();
    let mut us = Vec::with_capacity(3 * nodes.len() + 2);
    let mut mass = Vec::with_capacity(3 * nodes.len());
    us.push(support.lower());
    us.push(support.upper());
    for j in 0..nodes.len() - 1 {
        let (lo, hi) = (nodes[j], nodes[j + 1]);
        let half = 0.5 * (hi - lo);
        for (z, w) in POINTS.iter().zip(WEIGHTS) {
            let s = 0.5 * (1.0 + z);
            us.push(lo + half * (1.0 + z));
            mass.push(w * half * ((1.0 - s) * density[j] + s * density[j + 1]));
        }
    }
    let g = kernel.integrate_against(&xs, &ratio, &us)?;
    let interior: f64 = g[2..].iter().zip(&mass).map(|(gi, m)| gi * gi * m).sum();
    Ok(measure.atom_lower() * g[0] * g[0] + measure.atom_upper() * g[1] * g[1] + interior - 1.0)
}
