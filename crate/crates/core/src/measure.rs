//! Hybrid mixing measures on a compact interval `[lower, upper]`.
//!
//! A [`MixingMeasure`] carries point masses at the two endpoints plus a
//! Lebesgue density sampled on a grid. Between nodes the density is linear,
//! so the trapezoid rule integrates it exactly. This is the dominating
//! measure `δ_lower + λ + δ_upper` used by the monotone model.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Tolerance on `|total mass - 1|` for a valid probability measure.
pub const MASS_TOLERANCE: f64 = 1e-10;

/// Compact support `[lower, upper]` with `0 < lower < upper < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportInterval {
    lower: f64,
    upper: f64,
}

impl SupportInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower <= 0.0 || lower >= upper {
            return Err(Error::config(format!(
                "support interval needs 0 < lower < upper < inf, got [{lower}, {upper}]"
            )));
        }
        Ok(SupportInterval { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, u: f64) -> bool {
        (self.lower..=self.upper).contains(&u)
    }

    /// `n` equally spaced nodes covering the interval, endpoints included.
    pub fn uniform_grid(&self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::config(format!(
                "grid needs at least 2 nodes, got {n}"
            )));
        }
        Ok(quad::linspace(self.lower, self.upper, n))
    }
}

/// Grid nodes together with their trapezoid weights, shared between measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Arc<[f64]>,
    weights: Arc<[f64]>,
    /// `ln(u_{j+1} / u_j)` per cell.
    log_steps: Arc<[f64]>,
}

impl Grid {
    fn new(support: &SupportInterval, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::config("grid needs at least 2 nodes"));
        }
        if nodes[0] != support.lower || nodes[nodes.len() - 1] != support.upper {
            return Err(Error::config(format!(
                "grid must start at {} and end at {}",
                support.lower, support.upper
            )));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::config("grid nodes must be strictly increasing"));
        }
        let weights = quad::trapezoid_weights(&nodes);
        let log_steps: Vec<f64> = nodes
            .windows(2)
            .map(|w| ((w[1] - w[0]) / w[0]).ln_1p())
            .collect();
        Ok(Grid {
            nodes: nodes.into(),
            weights: weights.into(),
            log_steps: log_steps.into(),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn log_steps(&self) -> &[f64] {
        &self.log_steps
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.nodes, &other.nodes) || self.nodes == other.nodes
    }
}

/// Probability measure: atom at `lower`, atom at `upper`, and a gridded
/// interior density.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMeasure {
    support: SupportInterval,
    atom_lower: f64,
    atom_upper: f64,
    grid: Grid,
    density: Vec<f64>,
}

impl MixingMeasure {
    /// Builds a measure and checks that it is a probability measure.
    pub fn new(
        support: SupportInterval,
        atom_lower: f64,
        atom_upper: f64,
        grid: Vec<f64>,
        density: Vec<f64>,
    ) -> Result<Self> {
        let m = Self::from_components(support, atom_lower, atom_upper, grid, density)?;
        m.check_mass()?;
        Ok(m)
    }

    /// Builds a non-negative finite measure without requiring unit mass.
    /// Pass the result through [`normalize`] to obtain a probability measure.
    pub fn from_components(
        support: SupportInterval,
        atom_lower: f64,
        atom_upper: f64,
        grid: Vec<f64>,
        density: Vec<f64>,
    ) -> Result<Self> {
        let grid = Grid::new(&support, grid)?;
        Self::with_grid(support, atom_lower, atom_upper, grid, density)
    }

    pub(crate) fn with_grid(
        support: SupportInterval,
        atom_lower: f64,
        atom_upper: f64,
        grid: Grid,
        density: Vec<f64>,
    ) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::config(format!(
                "density has {} values for {} grid nodes",
                density.len(),
                grid.len()
            )));
        }
        let bad = |v: f64| !v.is_finite() || v < 0.0;
        if bad(atom_lower) || bad(atom_upper) || density.iter().any(|&v| bad(v)) {
            return Err(Error::Domain(
                "measure components must be finite and non-negative".into(),
            ));
        }
        Ok(MixingMeasure {
            support,
            atom_lower,
            atom_upper,
            grid,
            density,
        })
    }

    /// Uniform interior density on `grid_size` nodes plus the given atoms.
    pub fn uniform_with_atoms(
        support: SupportInterval,
        grid_size: usize,
        atom_lower: f64,
        atom_upper: f64,
    ) -> Result<Self> {
        let rest = 1.0 - atom_lower - atom_upper;
        if !(0.0..=1.0).contains(&atom_lower) || !(0.0..=1.0).contains(&atom_upper) || rest < 0.0 {
            return Err(Error::config(format!(
                "atom masses ({atom_lower}, {atom_upper}) do not leave a valid interior mass"
            )));
        }
        let grid = support.uniform_grid(grid_size)?;
        let level = rest / support.width();
        let density = vec![level; grid.len()];
        Self::new(support, atom_lower, atom_upper, grid, density)
    }

    /// Point mass at the lower endpoint.
    pub fn atom_lower_only(support: SupportInterval, grid_size: usize) -> Result<Self> {
        Self::uniform_with_atoms(support, grid_size, 1.0, 0.0)
    }

    /// Point mass at the upper endpoint.
    pub fn atom_upper_only(support: SupportInterval, grid_size: usize) -> Result<Self> {
        Self::uniform_with_atoms(support, grid_size, 0.0, 1.0)
    }

    /// Samples the shape `density` at the grid nodes and scales it to carry
    /// the mass `1 - atom_lower - atom_upper`.
    pub fn from_density_fn<F: Fn(f64) -> f64>(
        support: SupportInterval,
        grid_size: usize,
        atom_lower: f64,
        atom_upper: f64,
        density: F,
    ) -> Result<Self> {
        let rest = 1.0 - atom_lower - atom_upper;
        if atom_lower < 0.0 || atom_upper < 0.0 || rest < 0.0 {
            return Err(Error::config(format!(
                "atom masses ({atom_lower}, {atom_upper}) do not leave a valid interior mass"
            )));
        }
        let grid = support.uniform_grid(grid_size)?;
        let values: Vec<f64> = grid.iter().map(|&u| density(u)).collect();
        let mut m = Self::from_components(support, atom_lower, atom_upper, grid, values)?;
        let shape_mass = m.interior_mass();
        if shape_mass > 0.0 {
            let scale = rest / shape_mass;
            m.density.iter_mut().for_each(|p| *p *= scale);
        } else if rest > 0.0 {
            return Err(Error::DegenerateMeasure(shape_mass));
        }
        m.renormalize_in_place()?;
        Ok(m)
    }

    pub fn support(&self) -> SupportInterval {
        self.support
    }

    pub fn atom_lower(&self) -> f64 {
        self.atom_lower
    }

    pub fn atom_upper(&self) -> f64 {
        self.atom_upper
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Trapezoid mass of the interior density.
    pub fn interior_mass(&self) -> f64 {
        dot(self.grid.weights(), &self.density)
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_lower + self.atom_upper + self.interior_mass()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= MASS_TOLERANCE
    }

    fn check_mass(&self) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::DegenerateMeasure(mass));
        }
        Ok(())
    }

    /// `∫ f dP`: endpoint atoms plus the trapezoid rule on the interior.
    pub fn quadrature<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let eval = |u: f64| {
            let v = f(u);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation {
                    at: u,
                    message: format!("integrand is {v}"),
                })
            }
        };
        let mut total = self.atom_lower * eval(self.support.lower)?
            + self.atom_upper * eval(self.support.upper)?;
        for ((&u, &w), &p) in self
            .grid
            .nodes()
            .iter()
            .zip(self.grid.weights())
            .zip(&self.density)
        {
            total += w * p * eval(u)?;
        }
        Ok(total)
    }

    /// Distribution function `P([lower, u])`, exact for the piecewise-linear density.
    pub fn cdf(&self, u: f64) -> f64 {
        if u < self.support.lower {
            return 0.0;
        }
        if u >= self.support.upper {
            return self.total_mass();
        }
        let nodes = self.grid.nodes();
        let mut acc = self.atom_lower;
        for j in 0..nodes.len() - 1 {
            let (a, b) = (nodes[j], nodes[j + 1]);
            if u >= b {
                acc += 0.5 * (b - a) * (self.density[j] + self.density[j + 1]);
            } else {
                let t = (u - a) / (b - a);
                let pu = self.density[j] + t * (self.density[j + 1] - self.density[j]);
                acc += 0.5 * (u - a) * (self.density[j] + pu);
                break;
            }
        }
        acc
    }

    /// Distribution function at every grid node.
    pub fn cdf_at_nodes(&self) -> Vec<f64> {
        let nodes = self.grid.nodes();
        let mut out = Vec::with_capacity(nodes.len());
        let mut acc = self.atom_lower;
        out.push(acc);
        for j in 1..nodes.len() {
            acc += 0.5 * (nodes[j] - nodes[j - 1]) * (self.density[j - 1] + self.density[j]);
            out.push(acc);
        }
        if let Some(last) = out.last_mut() {
            *last += self.atom_upper;
        }
        out
    }

    /// Convex combination `alpha * self + (1 - alpha) * other` on a shared grid.
    pub fn mix(&self, alpha: f64, other: &MixingMeasure) -> Result<MixingMeasure> {
        self.check_compatible(other)?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::config(format!(
                "mixing weight {alpha} outside [0, 1]"
            )));
        }
        let beta = 1.0 - alpha;
        let density = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        MixingMeasure::with_grid(
            self.support,
            alpha * self.atom_lower + beta * other.atom_lower,
            alpha * self.atom_upper + beta * other.atom_upper,
            self.grid.clone(),
            density,
        )
    }

    fn check_compatible(&self, other: &MixingMeasure) -> Result<()> {
        if self.support != other.support {
            return Err(Error::IncompatibleMeasures(format!(
                "supports [{}, {}] and [{}, {}] differ",
                self.support.lower, self.support.upper, other.support.lower, other.support.upper
            )));
        }
        if !self.grid.same_as(&other.grid) {
            return Err(Error::IncompatibleMeasures("grids differ".into()));
        }
        Ok(())
    }

    /// Mutable access for the update loop; callers renormalize afterwards.
    pub(crate) fn parts_mut(&mut self) -> (&mut f64, &mut f64, &mut [f64]) {
        (
            &mut self.atom_lower,
            &mut self.atom_upper,
            &mut self.density,
        )
    }

    /// Divides every component by the current total mass in place.
    pub(crate) fn renormalize_in_place(&mut self) -> Result<()> {
        let mass = self.total_mass();
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::DegenerateMeasure(mass));
        }
        let inv = 1.0 / mass;
        self.atom_lower *= inv;
        self.atom_upper *= inv;
        for p in &mut self.density {
            *p *= inv;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MeasureJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasureJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

/// Wire form of a [`MixingMeasure`]; field order is part of the format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub lower: f64,
    pub upper: f64,
    pub atom_lower: f64,
    pub atom_upper: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

impl From<&MixingMeasure> for MeasureJson {
    fn from(m: &MixingMeasure) -> Self {
        MeasureJson {
            lower: m.support.lower,
            upper: m.support.upper,
            atom_lower: m.atom_lower,
            atom_upper: m.atom_upper,
            grid: m.grid.nodes().to_vec(),
            density: m.density.clone(),
        }
    }
}

impl TryFrom<MeasureJson> for MixingMeasure {
    type Error = Error;

    fn try_from(raw: MeasureJson) -> Result<Self> {
        let support = SupportInterval::new(raw.lower, raw.upper)?;
        MixingMeasure::new(
            support,
            raw.atom_lower,
            raw.atom_upper,
            raw.grid,
            raw.density,
        )
    }
}

impl Serialize for MixingMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureJson::from(self).serialize(s)
    }
}

/// Free-function form of [`MixingMeasure::quadrature`].
pub fn quadrature<F: Fn(f64) -> f64>(measure: &MixingMeasure, integrand: F) -> Result<f64> {
    measure.quadrature(integrand)
}

/// Rescales all components so the total mass is one.
pub fn normalize(measure: &MixingMeasure) -> Result<MixingMeasure> {
    let mut out = measure.clone();
    out.renormalize_in_place()?;
    Ok(out)
}

/// Kolmogorov distance `sup |F_a - F_b|` over the union of both grids.
pub fn weak_distance(a: &MixingMeasure, b: &MixingMeasure) -> Result<f64> {
    if a.support != b.support {
        return Err(Error::IncompatibleMeasures(format!(
            "supports [{}, {}] and [{}, {}] differ",
            a.support.lower, a.support.upper, b.support.lower, b.support.upper
        )));
    }
    if a.grid.same_as(&b.grid) {
        let (fa, fb) = (a.cdf_at_nodes(), b.cdf_at_nodes());
        return Ok(fa
            .iter()
            .zip(&fb)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max));
    }
    let mut points: Vec<f64> = a.nodes().iter().chain(b.nodes()).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(points
        .iter()
        .map(|&u| (a.cdf(u) - b.cdf(u)).abs())
        .fold(0.0, f64::max))
}

/// Component-wise average of measures sharing one grid, summed in slice order.
pub fn average(measures: &[MixingMeasure]) -> Result<MixingMeasure> {
    let first = measures
        .first()
        .ok_or_else(|| Error::config("cannot average an empty list of measures"))?;
    if measures.len() == 1 {
        return Ok(first.clone());
    }
    let mut atom_lower = 0.0;
    let mut atom_upper = 0.0;
    let mut density = vec![0.0; first.density.len()];
    for m in measures {
        first.check_compatible(m)?;
        atom_lower += m.atom_lower;
        atom_upper += m.atom_upper;
        for (acc, p) in density.iter_mut().zip(&m.density) {
            *acc += p;
        }
    }
    let r = measures.len() as f64;
    density.iter_mut().for_each(|p| *p /= r);
    let raw = MixingMeasure::with_grid(
        first.support,
        atom_lower / r,
        atom_upper / r,
        first.grid.clone(),
        density,
    )?;
    normalize(&raw)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
