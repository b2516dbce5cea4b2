//! Divergences between densities on an interval, by the trapezoid rule.
//!
//! Densities with jumps integrate exactly when the jump locations are passed
//! as breakpoints: the grid is split there and each side is evaluated from
//! its own side.

use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 10_000;

/// Below this a reference density counts as zero when checking support.
const DENSITY_NEGLIGIBLE: f64 = 1e-12;
const DENSITY_UNDERFLOW: f64 = 1e-300;

type Batch<'a> = Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a>;

/// Two densities `f` and `g` on a common integration range.
pub struct DensityPair<'a> {
    f: Batch<'a>,
    g: Batch<'a>,
    lower: f64,
    upper: f64,
    resolution: usize,
    breakpoints: Vec<f64>,
}

/// Evaluation nodes: nominal positions, where each density is actually
/// evaluated, and trapezoid weights.
#[derive(Debug, Clone, Default)]
pub struct Nodes {
    pub positions: Vec<f64>,
    pub probes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl<'a> DensityPair<'a> {
    pub fn new<F, G>(f: F, g: G, lower: f64, upper: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + 'a,
        G: Fn(f64) -> f64 + 'a,
    {
        Self::from_batch(
            move |xs: &[f64]| Ok(xs.iter().map(|&x| f(x)).collect()),
            move |xs: &[f64]| Ok(xs.iter().map(|&x| g(x)).collect()),
            lower,
            upper,
        )
    }

    /// Like [`DensityPair::new`] for densities that are cheaper to evaluate
    /// on a whole vector of points at once.
    pub fn from_batch<F, G>(f: F, g: G, lower: f64, upper: f64) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + 'a,
        G: Fn(&[f64]) -> Result<Vec<f64>> + 'a,
    {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::config(format!(
                "integration range [{lower}, {upper}] is empty or unbounded"
            )));
        }
        Ok(DensityPair {
            f: Box::new(f),
            g: Box::new(g),
            lower,
            upper,
            resolution: DEFAULT_RESOLUTION,
            breakpoints: Vec::new(),
        })
    }

    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::config("resolution must be at least 2"));
        }
        self.resolution = resolution;
        Ok(self)
    }

    /// Points where either density may jump. Points outside the open range are ignored.
    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn nodes(&self) -> Nodes {
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|&b| b > self.lower && b < self.upper)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut ends = vec![self.lower];
        ends.extend(cuts);
        ends.push(self.upper);
        let total = self.upper - self.lower;
        let mut out = Nodes::default();
        for (k, w) in ends.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let count = ((self.resolution as f64 * (b - a) / total).round() as usize).max(2);
            let h = (b - a) / (count - 1) as f64;
            for i in 0..count {
                let x = if i == count - 1 { b } else { a + i as f64 * h };
                let probe = if i == 0 && k > 0 {
                    a.next_up()
                } else if i == count - 1 && k < ends.len() - 2 {
                    b.next_down()
                } else {
                    x
                };
                let weight = if i == 0 || i == count - 1 { 0.5 * h } else { h };
                out.positions.push(x);
                out.probes.push(probe);
                out.weights.push(weight);
            }
        }
        out
    }

    /// Evaluates both densities at the nodes, checking they are valid.
    fn evaluate(&self) -> Result<(Nodes, Vec<f64>, Vec<f64>)> {
        let nodes = self.nodes();
        let fs = (self.f)(&nodes.probes)?;
        let gs = (self.g)(&nodes.probes)?;
        if fs.len() != nodes.probes.len() || gs.len() != nodes.probes.len() {
            return Err(Error::config("density returned the wrong number of values"));
        }
        for ((&x, &a), &b) in nodes.probes.iter().zip(&fs).zip(&gs) {
            for v in [a, b] {
                if v.is_nan() || v.is_infinite() {
                    return Err(Error::Evaluation {
                        at: x,
                        message: format!("density value {v}"),
                    });
                }
                if v < 0.0 {
                    return Err(Error::Domain(format!("negative density {v} at x = {x}")));
                }
            }
        }
        Ok((nodes, fs, gs))
    }

    fn integrate(&self, term: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let (nodes, fs, gs) = self.evaluate()?;
        Ok(nodes
            .weights
            .iter()
            .zip(fs.iter().zip(&gs))
            .map(|(w, (&a, &b))| w * term(a, b))
            .sum())
    }
}

/// `∫ f log(f / g)`, or `+∞` when `g` vanishes where `f` does not.
pub fn kl_divergence(pair: &DensityPair<'_>) -> Result<f64> {
    let (nodes, fs, gs) = pair.evaluate()?;
    let mut total = 0.0;
    for ((w, &f), &g) in nodes.weights.iter().zip(&fs).zip(&gs) {
        if f == 0.0 {
            continue;
        }
        if g < DENSITY_UNDERFLOW {
            if f > DENSITY_NEGLIGIBLE {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        total += w * f * (f / g).ln();
    }
    Ok(total)
}

/// `∫ |f - g|`
pub fn l1_distance(pair: &DensityPair<'_>) -> Result<f64> {
    pair.integrate(|f, g| (f - g).abs())
}

/// `{∫ (√f - √g)²}^{1/2}`, without a factor of one half.
pub fn hellinger_distance(pair: &DensityPair<'_>) -> Result<f64> {
    Ok(pair
        .integrate(|f, g| {
            let d = f.sqrt() - g.sqrt();
            d * d
        })?
        .sqrt())
}

/// The same distance through the affinity, `{∫ f + ∫ g - 2 ∫ √(f g)}^{1/2}`,
/// which is `{2 - 2 ∫ √(f g)}^{1/2}` for densities of unit mass.
pub fn hellinger_via_affinity(pair: &DensityPair<'_>) -> Result<f64> {
    let (nodes, fs, gs) = pair.evaluate()?;
    let mass_f: f64 = nodes.weights.iter().zip(&fs).map(|(w, f)| w * f).sum();
    let mass_g: f64 = nodes.weights.iter().zip(&gs).map(|(w, g)| w * g).sum();
    let affinity: f64 = nodes
        .weights
        .iter()
        .zip(fs.iter().zip(&gs))
        .map(|(w, (f, g))| w * (f * g).sqrt())
        .sum();
    Ok((mass_f + mass_g - 2.0 * affinity).max(0.0).sqrt())
}

/// The Hellinger contrast
/// `ρ(f, g) = {∫ (√f - √g)² m⋆ / m†}^{1/2}`, evaluated on the nodes of `pair`.
pub fn hellinger_contrast<S, D>(pair: &DensityPair<'_>, m_star: S, m_dagger: D) -> Result<f64>
where
    S: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (nodes, fs, gs) = pair.evaluate()?;
    let mut total = 0.0;
    for (i, &x) in nodes.probes.iter().enumerate() {
        let star = m_star(x);
        if star == 0.0 {
            continue;
        }
        let dagger = m_dagger(x);
        if !(star >= 0.0) || !(dagger >= 0.0) {
            return Err(Error::Domain(format!(
                "weight densities ({star}, {dagger}) at x = {x} must be non-negative"
            )));
        }
        if dagger < DENSITY_UNDERFLOW {
            if star > DENSITY_NEGLIGIBLE {
                return Err(Error::Evaluation {
                    at: x,
                    message: format!("m† underflows ({dagger:e}) where m⋆ = {star:e}"),
                });
            }
            continue;
        }
        let d = fs[i].sqrt() - gs[i].sqrt();
        total += nodes.weights[i] * d * d * star / dagger;
    }
    Ok(total.sqrt())
}
