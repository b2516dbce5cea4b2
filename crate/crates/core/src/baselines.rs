//! The Grenander estimator: the left derivative of the least concave
//! majorant of the empirical distribution function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-increasing step density on `[0, breakpoints.last()]`.
///
/// `heights[k]` applies on `(breakpoints[k], breakpoints[k + 1]]`, and
/// `breakpoints[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepJson")]
pub struct StepDensity {
    breakpoints: Vec<f64>,
    heights: Vec<f64>,
}

#[derive(Deserialize)]
struct StepJson {
    breakpoints: Vec<f64>,
    heights: Vec<f64>,
}

impl TryFrom<StepJson> for StepDensity {
    type Error = Error;

    fn try_from(raw: StepJson) -> Result<Self> {
        StepDensity::new(raw.breakpoints, raw.heights)
    }
}

impl StepDensity {
    pub fn new(breakpoints: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if heights.is_empty() || breakpoints.len() != heights.len() + 1 {
            return Err(Error::config(format!(
                "{} breakpoints cannot bound {} steps",
                breakpoints.len(),
                heights.len()
            )));
        }
        if breakpoints[0] != 0.0 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "breakpoints must start at 0 and increase strictly".into(),
            ));
        }
        if heights.iter().any(|h| !(*h >= 0.0) || !h.is_finite())
            || heights.windows(2).any(|w| w[1] > w[0])
        {
            return Err(Error::Domain(
                "heights must be finite, non-negative and non-increasing".into(),
            ));
        }
        let d = StepDensity {
            breakpoints,
            heights,
        };
        let mass = d.cdf(f64::INFINITY);
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::DegenerateMeasure(mass));
        }
        Ok(d)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Right end of the support.
    pub fn upper(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    /// The value at `x`; see [`step_density_at`].
    pub fn at(&self, x: f64) -> f64 {
        if !(x >= 0.0) || x > self.upper() {
            return 0.0;
        }
        if x == 0.0 {
            return self.heights[0];
        }
        let k = self.breakpoints.partition_point(|&b| b < x);
        self.heights[k - 1]
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let mut total = 0.0;
        for (w, h) in self.breakpoints.windows(2).zip(&self.heights) {
            if x <= w[0] {
                break;
            }
            total += h * (x.min(w[1]) - w[0]);
        }
        total
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Height of the step containing `x`: left-continuous, the first height at
/// `x = 0` and zero outside `[0, max(data)]`.
pub fn step_density_at(d: &StepDensity, x: f64) -> f64 {
    d.at(x)
}

/// Distinct sorted values with cumulative counts.
fn ecdf_vertices(data: &[f64]) -> Result<(Vec<f64>, Vec<u64>)> {
    if data.is_empty() {
        return Err(Error::config("the Grenander estimator needs data"));
    }
    if let Some(bad) = data.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!(
            "observations must be positive and finite, got {bad}"
        )));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut xs = vec![0.0];
    let mut counts = vec![0u64];
    for (i, &x) in sorted.iter().enumerate() {
        if x == xs[xs.len() - 1] {
            *counts.last_mut().unwrap() = i as u64 + 1;
        } else {
            xs.push(x);
            counts.push(i as u64 + 1);
        }
    }
    Ok((xs, counts))
}

/// The Grenander estimator of a non-increasing density on `[0, ∞)`.
///
/// Builds the upper convex hull of the ECDF vertices `(0, 0), (x_(j), F_n(x_(j)))`
/// with ties merged. Collinear vertices are dropped, so consecutive heights
/// differ. An observation at exactly zero makes the estimate unbounded and is
/// rejected.
pub fn grenander(data: &[f64]) -> Result<StepDensity> {
    let (xs, counts) = ecdf_vertices(data)?;
    let n = data.len() as f64;
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for j in 0..xs.len() {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            // keep `a` only if it lies strictly above the chord o -> j
            let lhs = (counts[a] - counts[o]) as f64 * (xs[j] - xs[o]);
            let rhs = (counts[j] - counts[o]) as f64 * (xs[a] - xs[o]);
            if lhs > rhs {
                break;
            }
            hull.pop();
        }
        hull.push(j);
    }
    let breakpoints: Vec<f64> = hull.iter().map(|&j| xs[j]).collect();
    let heights: Vec<f64> = hull
        .windows(2)
        .map(|w| (counts[w[1]] - counts[w[0]]) as f64 / (n * (xs[w[1]] - xs[w[0]])))
        .collect();
    StepDensity::new(breakpoints, heights)
}
