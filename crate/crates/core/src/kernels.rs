//! Mixture kernels `k(x | u)` and the mixture density `m_P(x) = ∫ k(x|u) P(du)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Grid, MixingMeasure, SupportInterval};

/// A conditional density of an observation `x` given a mixing parameter `u`.
pub trait Kernel: Send + Sync + fmt::Debug {
    fn evaluate(&self, x: f64, u: f64) -> Result<f64>;

    /// Closed interval of observations with positive density under `u`.
    fn observation_support(&self, u: f64) -> (f64, f64);

    fn descriptor(&self) -> KernelDescriptor;

    /// Node weights `c_j` with `Σ c_j p_j ≈ ∫ k(x|u) p(u) du` for a density
    /// that is linear between grid nodes. The default is the trapezoid rule.
    fn node_weights(&self, x: f64, grid: &Grid, out: &mut [f64]) -> Result<()> {
        for ((c, &u), &w) in out.iter_mut().zip(grid.nodes()).zip(grid.weights()) {
            *c = w * self.evaluate(x, u)?;
        }
        Ok(())
    }

    /// Observations that some `u` in `support` can produce.
    fn observation_range(&self, support: &SupportInterval) -> (f64, f64) {
        let (a0, b0) = self.observation_support(support.lower());
        let (a1, b1) = self.observation_support(support.upper());
        (a0.min(a1), b0.max(b1))
    }

    /// `∫ f(x) k(x|u) dx` for each `u` in `us`, where `f` is the linear
    /// interpolant of `values` on the increasing nodes `xs` (zero outside).
    fn integrate_against(&self, xs: &[f64], values: &[f64], us: &[f64]) -> Result<Vec<f64>> {
        let (x0, xn) = (xs[0], xs[xs.len() - 1]);
        us.iter()
            .map(|&u| {
                let (a, b) = self.observation_support(u);
                let (a, b) = (a.max(x0), b.min(xn));
                if a >= b {
                    return Ok(0.0);
                }
                let first = xs.partition_point(|&x| x <= a);
                let last = xs.partition_point(|&x| x < b);
                let mut prev_x = a;
                let mut prev_y = interpolate(xs, values, a) * self.evaluate(a, u)?;
                let mut total = 0.0;
                for i in first..last {
                    let y = values[i] * self.evaluate(xs[i], u)?;
                    total += 0.5 * (xs[i] - prev_x) * (prev_y + y);
                    prev_x = xs[i];
                    prev_y = y;
                }
                let y = interpolate(xs, values, b) * self.evaluate(b, u)?;
                total += 0.5 * (b - prev_x) * (prev_y + y);
                Ok(total)
            })
            .collect()
    }

    /// `m_P` at many points. Implementations may share work across points.
    fn mixture_density_many(&self, measure: &MixingMeasure, xs: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = vec![0.0; measure.grid().len()];
        xs.iter()
            .map(|&x| mixture_density_with(self, measure, x, &mut scratch))
            .collect()
    }
}

/// Serializable kernel choice, selected by name in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum KernelDescriptor {
    Uniform,
    Gaussian { sigma: f64 },
}

impl KernelDescriptor {
    pub fn from_name(name: &str, sigma: Option<f64>) -> Result<Self> {
        match name {
            "uniform" => Ok(KernelDescriptor::Uniform),
            "gaussian" => Ok(KernelDescriptor::Gaussian {
                sigma: sigma.unwrap_or(1.0),
            }),
            other => Err(Error::config(format!(
                "unknown kernel {other:?}; expected \"uniform\" or \"gaussian\""
            ))),
        }
    }

    pub fn build(&self) -> Result<Box<dyn Kernel>> {
        Ok(match *self {
            KernelDescriptor::Uniform => Box::new(UniformKernel),
            KernelDescriptor::Gaussian { sigma } => Box::new(GaussianKernel::new(sigma)?),
        })
    }
}

/// `Unif(x | 0, u) = u⁻¹ 1[0,u](x)`, closed at both ends.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UniformKernel;

pub fn uniform_kernel() -> UniformKernel {
    UniformKernel
}

impl UniformKernel {
    #[inline]
    fn value(x: f64, u: f64) -> f64 {
        if (0.0..=u).contains(&x) {
            1.0 / u
        } else {
            0.0
        }
    }

    /// `∫_a^b φ(v)/v dv` for the two hat functions of the cell `[lo, hi]`,
    /// with `lo <= a < b <= hi`.
    #[inline]
    fn cell_pair(lo: f64, hi: f64, a: f64, b: f64) -> (f64, f64) {
        Self::cell_pair_with_log(lo, hi, a, b, ((b - a) / a).ln_1p())
    }

    #[inline]
    fn cell_pair_with_log(lo: f64, hi: f64, a: f64, b: f64, log_ratio: f64) -> (f64, f64) {
        let h = hi - lo;
        let span = b - a;
        ((hi * log_ratio - span) / h, (span - lo * log_ratio) / h)
    }
}

impl Kernel for UniformKernel {
    fn evaluate(&self, x: f64, u: f64) -> Result<f64> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "uniform kernel needs u > 0, got {u}"
            )));
        }
        Ok(Self::value(x, u))
    }

    fn observation_support(&self, u: f64) -> (f64, f64) {
        (0.0, u)
    }

    fn descriptor(&self) -> KernelDescriptor {
        KernelDescriptor::Uniform
    }

    /// Integrates `p(u)/u` exactly over each cell, clipped at `u = x`.
    fn node_weights(&self, x: f64, grid: &Grid, out: &mut [f64]) -> Result<()> {
        let nodes = grid.nodes();
        out.iter_mut().for_each(|c| *c = 0.0);
        if !(x >= 0.0) || x > nodes[nodes.len() - 1] {
            return Ok(());
        }
        let logs = grid.log_steps();
        let start = nodes.partition_point(|&u| u <= x).saturating_sub(1);
        for j in start..nodes.len() - 1 {
            let (lo, hi) = (nodes[j], nodes[j + 1]);
            let (left, right) = if x <= lo {
                Self::cell_pair_with_log(lo, hi, lo, hi, logs[j])
            } else if x < hi {
                Self::cell_pair(lo, hi, x, hi)
            } else {
                continue;
            };
            out[j] += left;
            out[j + 1] += right;
        }
        Ok(())
    }

    fn observation_range(&self, support: &SupportInterval) -> (f64, f64) {
        (0.0, support.upper())
    }

    /// `(1/u) ∫_0^u f(x) dx` from one cumulative pass over `xs`.
    fn integrate_against(&self, xs: &[f64], values: &[f64], us: &[f64]) -> Result<Vec<f64>> {
        let mut cumulative = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..xs.len() {
            acc += 0.5 * (xs[i] - xs[i - 1]) * (values[i - 1] + values[i]);
            cumulative.push(acc);
        }
        let primitive = |t: f64| -> f64 {
            if t <= xs[0] {
                return 0.0;
            }
            if t >= xs[xs.len() - 1] {
                return acc;
            }
            let i = xs.partition_point(|&x| x <= t) - 1;
            let yt = interpolate(xs, values, t);
            cumulative[i] + 0.5 * (t - xs[i]) * (values[i] + yt)
        };
        let base = primitive(0.0);
        us.iter()
            .map(|&u| {
                self.evaluate(0.0, u)?;
                Ok((primitive(u) - base) / u)
            })
            .collect()
    }

    /// Suffix sums over cells make every evaluation `O(log G)` after an `O(G)` pass.
    fn mixture_density_many(&self, measure: &MixingMeasure, xs: &[f64]) -> Result<Vec<f64>> {
        let nodes = measure.nodes();
        let p = measure.density();
        let g = nodes.len();
        let lower = measure.support().lower();
        let upper = measure.support().upper();
        // suffix[j] = ∫_{u_j}^{upper} p(v)/v dv
        let logs = measure.grid().log_steps();
        let mut suffix = vec![0.0; g];
        for j in (0..g - 1).rev() {
            let (l, r) =
                Self::cell_pair_with_log(nodes[j], nodes[j + 1], nodes[j], nodes[j + 1], logs[j]);
            suffix[j] = suffix[j + 1] + l * p[j] + r * p[j + 1];
        }
        let top = measure.atom_upper() / upper;
        let bottom = measure.atom_lower() / lower;
        Ok(xs
            .iter()
            .map(|&x| {
                if !(x >= 0.0) || x > upper {
                    return 0.0;
                }
                if x <= lower {
                    return bottom + suffix[0] + top;
                }
                let j = nodes.partition_point(|&u| u <= x) - 1;
                if j >= g - 1 {
                    return top;
                }
                let (lo, hi) = (nodes[j], nodes[j + 1]);
                let (l, r) = Self::cell_pair(lo, hi, x, hi);
                l * p[j] + r * p[j + 1] + suffix[j + 1] + top
            })
            .collect())
    }
}

/// Gaussian location kernel `N(x | u, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    norm: f64,
}

impl GaussianKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian kernel needs sigma > 0, got {sigma}"
            )));
        }
        Ok(GaussianKernel {
            sigma,
            norm: 1.0 / (sigma * (2.0 * PI).sqrt()),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

pub fn gaussian_kernel(sigma: f64) -> Result<GaussianKernel> {
    GaussianKernel::new(sigma)
}

impl Kernel for GaussianKernel {
    fn evaluate(&self, x: f64, u: f64) -> Result<f64> {
        let z = (x - u) / self.sigma;
        Ok(self.norm * (-0.5 * z * z).exp())
    }

    fn observation_support(&self, _u: f64) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn descriptor(&self) -> KernelDescriptor {
        KernelDescriptor::Gaussian { sigma: self.sigma }
    }
}

/// Linear interpolation of `values` on increasing `xs`; zero outside the nodes.
pub(crate) fn interpolate(xs: &[f64], values: &[f64], t: f64) -> f64 {
    let n = xs.len();
    if !(t >= xs[0] && t <= xs[n - 1]) {
        return 0.0;
    }
    let i = xs.partition_point(|&x| x <= t);
    if i == 0 {
        return values[0];
    }
    if i >= n {
        return values[n - 1];
    }
    let (a, b) = (xs[i - 1], xs[i]);
    let s = (t - a) / (b - a);
    values[i - 1] + s * (values[i] - values[i - 1])
}

fn mixture_density_with<K: Kernel + ?Sized>(
    kernel: &K,
    measure: &MixingMeasure,
    x: f64,
    scratch: &mut [f64],
) -> Result<f64> {
    let support = measure.support();
    kernel.node_weights(x, measure.grid(), scratch)?;
    let interior: f64 = scratch
        .iter()
        .zip(measure.density())
        .map(|(c, p)| c * p)
        .sum();
    let value = measure.atom_lower() * kernel.evaluate(x, support.lower())?
        + measure.atom_upper() * kernel.evaluate(x, support.upper())?
        + interior;
    if !value.is_finite() {
        return Err(Error::Evaluation {
            at: x,
            message: format!("mixture density is {value}"),
        });
    }
    Ok(value)
}

/// `m_P(x) = ∫ k(x | u) P(du)`.
pub fn mixture_density<K: Kernel + ?Sized>(
    kernel: &K,
    measure: &MixingMeasure,
    x: f64,
) -> Result<f64> {
    let mut scratch = vec![0.0; measure.grid().len()];
    mixture_density_with(kernel, measure, x, &mut scratch)
}
