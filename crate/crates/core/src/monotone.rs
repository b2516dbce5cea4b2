//! Monotone density estimation as a scale mixture of uniforms.
//!
//! A non-increasing density on `[0, ∞)` can be written as
//! `m(x) = ∫ Unif(x | 0, u) P(du)` with `p(u) = -u m'(u)`. On a compact
//! support `[ℓ, L]` the model cannot reproduce the tail beyond `L` nor the
//! mass of `P` below `ℓ`, so the best achievable mixture is the KL
//! minimizer
//!
//! ```text
//! P† = a_ℓ δ_ℓ + P⋆(du) / M⋆(L) on [ℓ, L] + a_L δ_L
//! a_ℓ = P⋆([0, ℓ]) / M⋆(L),   a_L = L m⋆(L) / M⋆(L)
//! ```
//!
//! which agrees with the restricted target `m⋆(x) 1[0,L](x) / M⋆(L)` on `(ℓ, L]`
//! and is constant on `[0, ℓ]`.

use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};
use std::fmt;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use statrs::function::erf::{erf, erfc};

use crate::engine::{weight, PrConfig, PrFit};
use crate::error::{Error, Result};
use crate::kernels::{mixture_density, uniform_kernel, KernelDescriptor};
use crate::measure::{MixingMeasure, SupportInterval};
use crate::quad;

/// Default lower end of the support.
pub const DEFAULT_LOWER: f64 = 1e-5;

const INTEGRAL_TOLERANCE: f64 = 1e-12;

/// `√(2/π)`
const HALF_NORMAL_PEAK: f64 = FRAC_2_SQRT_PI / SQRT_2;

/// A non-increasing density on `[0, ∞)` together with its mixing density.
pub trait MonotoneTruth: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// `m⋆(x)`, zero for negative `x`.
    fn density(&self, x: f64) -> f64;

    fn density_derivative(&self, x: f64) -> f64;

    /// `M⋆(x)`.
    fn cdf(&self, x: f64) -> f64;

    /// `1 - M⋆(x)`, without cancellation in the tail.
    fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// `p⋆(u)`, the density of `P⋆`.
    fn mixing_density(&self, u: f64) -> f64;

    /// `P⋆([0, u])`.
    fn mixing_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        quad::adaptive(|v| self.mixing_density(v), 0.0, u, 1e-10)
    }

    /// One draw from `m⋆`.
    fn sample(&self, rng: &mut dyn RngCore) -> f64;
}

/// The standard exponential, `P⋆ = Gamma(2, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exponential;

/// The half standard normal.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfNormal;

/// `Σ_k c_k` until the terms stop mattering.
fn series(mut term: impl FnMut(u32) -> f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..200 {
        let t = term(k);
        sum += t;
        if t.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

impl MonotoneTruth for Exponential {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            (-x).exp()
        }
    }

    fn density_derivative(&self, x: f64) -> f64 {
        -self.density(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x).exp_m1()
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-x).exp()
        }
    }

    fn mixing_density(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            u * (-u).exp()
        }
    }

    fn mixing_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u < 1.0 {
            // ∫_0^u v e^{-v} dv = Σ_k (-1)^k u^{k+2} / (k! (k+2))
            let mut power = u * u;
            series(|k| {
                let t = power / (k as f64 + 2.0);
                power *= -u / (k as f64 + 1.0);
                t
            })
        } else {
            1.0 - (1.0 + u) * (-u).exp()
        }
    }

    /// Inverse CDF, `-ln(1 - U)`.
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        -(-u).ln_1p()
    }
}

impl MonotoneTruth for HalfNormal {
    fn name(&self) -> &'static str {
        "halfnormal"
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            HALF_NORMAL_PEAK * (-0.5 * x * x).exp()
        }
    }

    fn density_derivative(&self, x: f64) -> f64 {
        -x * self.density(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            erf(x / SQRT_2)
        }
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            erfc(x / SQRT_2)
        }
    }

    fn mixing_density(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            u * u * self.density(u)
        }
    }

    fn mixing_cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u < 1.0 {
            // √(2/π) Σ_k (-1/2)^k u^{2k+3} / (k! (2k+3))
            let mut power = u * u * u;
            HALF_NORMAL_PEAK
                * series(|k| {
                    let t = power / (2.0 * k as f64 + 3.0);
                    power *= -0.5 * u * u / (k as f64 + 1.0);
                    t
                })
        } else {
            erf(u / SQRT_2) - u * self.density(u)
        }
    }

    /// `|Z|` for a standard normal `Z`.
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        z.abs()
    }
}

/// Names accepted by [`truth_by_name`].
pub const TRUTH_NAMES: [&str; 2] = ["exponential", "halfnormal"];

pub fn truth_by_name(name: &str) -> Result<Box<dyn MonotoneTruth>> {
    match name {
        "exponential" => Ok(Box::new(Exponential)),
        "halfnormal" => Ok(Box::new(HalfNormal)),
        other => Err(Error::config(format!(
            "unknown truth {other:?}; expected one of {TRUTH_NAMES:?}"
        ))),
    }
}

/// Checks that `truth` is non-increasing on a 1000-point grid over `[0, upper]`
/// and that `p(u) = -u m'(u)` holds there, using central differences.
pub fn validate_truth(truth: &dyn MonotoneTruth, upper: f64) -> Result<()> {
    let xs = quad::linspace(0.0, upper, 1000);
    for w in xs.windows(2) {
        let (a, b) = (truth.density(w[0]), truth.density(w[1]));
        if b > a {
            return Err(Error::NonMonotone {
                at: w[1],
                derivative: (b - a) / (w[1] - w[0]),
            });
        }
    }
    for &u in &xs[1..] {
        let h = 1e-5 * u.max(1e-3);
        let slope = (truth.density(u + h) - truth.density(u - h)) / (2.0 * h);
        let p = truth.mixing_density(u);
        if p < 0.0 || (p + u * slope).abs() > 1e-6 * (1.0 + p) {
            return Err(Error::DegenerateTruth(format!(
                "{}: mixing density {p} disagrees with -u m'(u) = {} at u = {u}",
                truth.name(),
                -u * slope
            )));
        }
    }
    Ok(())
}

/// `m⋆` conditioned on `X <= L`.
#[derive(Debug, Clone, Copy)]
pub struct RestrictedTarget<'a> {
    truth: &'a dyn MonotoneTruth,
    upper: f64,
    mass: f64,
}

pub fn restrict_target(truth: &dyn MonotoneTruth, upper: f64) -> Result<RestrictedTarget<'_>> {
    let mass = truth.cdf(upper);
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::DegenerateTruth(format!(
            "{} puts mass {mass} on [0, {upper}]",
            truth.name()
        )));
    }
    Ok(RestrictedTarget { truth, upper, mass })
}

impl<'a> RestrictedTarget<'a> {
    pub fn truth(&self) -> &'a dyn MonotoneTruth {
        self.truth
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `M⋆(L)`
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn density(&self, x: f64) -> f64 {
        if (0.0..=self.upper).contains(&x) {
            self.truth.density(x) / self.mass
        } else {
            0.0
        }
    }
}

/// `[lower, max(data)]`.
pub fn build_support(data: &[f64], lower: f64) -> Result<SupportInterval> {
    let top = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if data.is_empty() {
        return Err(Error::config("cannot build a support from no data"));
    }
    if !top.is_finite() || !(lower < top) {
        return Err(Error::config(format!(
            "lower end {lower} must lie below the largest observation {top}"
        )));
    }
    SupportInterval::new(lower, top)
}

/// Two endpoint atoms with the configured masses and a flat interior.
pub fn initial_guess(support: SupportInterval, config: &PrConfig) -> Result<MixingMeasure> {
    config.validate()?;
    MixingMeasure::uniform_with_atoms(
        support,
        config.grid_size,
        config.initial_atom_lower,
        config.initial_atom_upper,
    )
}

/// The KL minimizer `P†` over mixing measures on `[ℓ, L]`.
#[derive(Debug, Clone, Copy)]
pub struct KlMinimizer<'a> {
    truth: &'a dyn MonotoneTruth,
    support: SupportInterval,
    mass: f64,
    atom_lower: f64,
    atom_upper: f64,
    interior: f64,
}

impl<'a> KlMinimizer<'a> {
    pub fn new(truth: &'a dyn MonotoneTruth, support: SupportInterval) -> Result<Self> {
        let (l, u) = (support.lower(), support.upper());
        let target = restrict_target(truth, u)?;
        let mass = target.mass();
        let below = truth.mixing_cdf(l);
        let within = truth.mixing_cdf(u);
        if !below.is_finite() || !within.is_finite() {
            return Err(Error::Evaluation {
                at: u,
                message: format!("mixing distribution of {} is not finite", truth.name()),
            });
        }
        Ok(KlMinimizer {
            truth,
            support,
            mass,
            atom_lower: below / mass,
            atom_upper: u * truth.density(u) / mass,
            interior: (within - below) / mass,
        })
    }

    pub fn support(&self) -> SupportInterval {
        self.support
    }

    /// `a_ℓ`
    pub fn atom_lower(&self) -> f64 {
        self.atom_lower
    }

    /// `a_L`
    pub fn atom_upper(&self) -> f64 {
        self.atom_upper
    }

    /// `P⋆((ℓ, L)) / M⋆(L)`, the mass of the continuous part.
    pub fn interior_mass(&self) -> f64 {
        self.interior
    }

    /// `P⋆([0, L]) / M⋆(L)`, the factor in front of the restricted `P⋆`.
    pub fn coefficient_interior(&self) -> f64 {
        self.truth.mixing_cdf(self.support.upper()) / self.mass
    }

    pub fn target(&self) -> RestrictedTarget<'a> {
        RestrictedTarget {
            truth: self.truth,
            upper: self.support.upper(),
            mass: self.mass,
        }
    }

    /// Density of the continuous part on `[ℓ, L]`.
    pub fn interior_density(&self, u: f64) -> f64 {
        if self.support.contains(u) {
            self.truth.mixing_density(u) / self.mass
        } else {
            0.0
        }
    }

    /// `m†(x)`, with the interior integral done by adaptive quadrature.
    pub fn density(&self, x: f64) -> f64 {
        let (l, u) = (self.support.lower(), self.support.upper());
        if !(0.0..=u).contains(&x) {
            return 0.0;
        }
        let from = x.max(l);
        let interior = quad::adaptive(
            |v| self.truth.mixing_density(v) / v,
            from,
            u,
            INTEGRAL_TOLERANCE,
        ) / self.mass;
        let bottom = if x <= l { self.atom_lower / l } else { 0.0 };
        bottom + interior + self.atom_upper / u
    }

    /// `m†(0)`, which equals `m†` anywhere on `[0, ℓ]`.
    pub fn origin_density(&self) -> f64 {
        self.density(0.0)
    }

    /// Discretizes `P†` on `grid_size` nodes. The atoms are exact and the
    /// interior is scaled so its trapezoid mass is exactly `1 - a_ℓ - a_L`.
    pub fn to_measure(&self, grid_size: usize) -> Result<MixingMeasure> {
        MixingMeasure::from_density_fn(
            self.support,
            grid_size,
            self.atom_lower,
            self.atom_upper,
            |u| self.truth.mixing_density(u),
        )
    }
}

/// `P†` on a `grid_size`-node grid.
pub fn kl_minimizer(
    truth: &dyn MonotoneTruth,
    support: SupportInterval,
    grid_size: usize,
) -> Result<MixingMeasure> {
    KlMinimizer::new(truth, support)?.to_measure(grid_size)
}

/// `x ↦ m†(x)`.
pub fn kl_minimizer_density(
    truth: &dyn MonotoneTruth,
    support: SupportInterval,
) -> Result<impl Fn(f64) -> f64 + '_> {
    let minimizer = KlMinimizer::new(truth, support)?;
    Ok(move |x| minimizer.density(x))
}

/// Upper bound on `∫ |m† - m⋆|`: `2 {1 - M⋆(L) + P⋆([0, ℓ]) / M⋆(L)}`.
pub fn bias_bound(truth: &dyn MonotoneTruth, support: SupportInterval) -> Result<f64> {
    let target = restrict_target(truth, support.upper())?;
    Ok(2.0 * (truth.survival(support.upper()) + truth.mixing_cdf(support.lower()) / target.mass()))
}

/// The fitted density at the origin, `m_n(0)`.
pub fn origin_estimate(fit: &PrFit) -> Result<f64> {
    if fit.kernel != KernelDescriptor::Uniform {
        return Err(Error::config(
            "origin estimate needs a fit under the uniform kernel",
        ));
    }
    mixture_density(&uniform_kernel(), &fit.mixing, 0.0)
}

/// Lower bound on the PR mixture density along a fit: the atom at `L` only
/// ever shrinks by the factors `1 - w_j`, so
/// `m_i(x) >= p_{0,L} L⁻¹ ∏_{j<=i} (1 - w_j)` on `[0, L]`.
#[derive(Debug, Clone, Copy)]
pub struct MixtureFloor {
    value: f64,
    weight_constant: f64,
    step: usize,
}

impl MixtureFloor {
    pub fn new(initial_atom_upper: f64, upper: f64, weight_constant: f64) -> Result<Self> {
        weight(1, weight_constant)?;
        if !(initial_atom_upper > 0.0) || !(upper > 0.0) {
            return Err(Error::config(
                "the floor needs a positive atom at a positive L",
            ));
        }
        Ok(MixtureFloor {
            value: initial_atom_upper / upper,
            weight_constant,
            step: 0,
        })
    }

    /// Bound after `step` updates.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn advance(&mut self) -> f64 {
        self.step += 1;
        self.value *= 1.0 - self.weight_constant / (self.step as f64 + 1.0);
        self.value
    }

    /// Bound after `i` updates, computed directly.
    pub fn at(initial_atom_upper: f64, upper: f64, weight_constant: f64, i: usize) -> Result<f64> {
        let mut floor = Self::new(initial_atom_upper, upper, weight_constant)?;
        for _ in 0..i {
            floor.advance();
        }
        Ok(floor.value())
    }
}

/// The mixing distribution of the restricted target, written as
/// `π P̃ + (1 - π) δ_L` where `P̃` is `P⋆` restricted to `[0, L]` and
/// renormalized.
#[derive(Debug, Clone, Copy)]
pub struct RestrictedMixing<'a> {
    truth: &'a dyn MonotoneTruth,
    upper: f64,
    within: f64,
    pi: f64,
}

impl<'a> RestrictedMixing<'a> {
    pub fn new(truth: &'a dyn MonotoneTruth, upper: f64) -> Result<Self> {
        let target = restrict_target(truth, upper)?;
        let within = truth.mixing_cdf(upper);
        Ok(RestrictedMixing {
            truth,
            upper,
            within,
            pi: within / target.mass(),
        })
    }

    /// Weight `π = P⋆([0, L]) / M⋆(L)` of the continuous part.
    pub fn pi(&self) -> f64 {
        self.pi
    }

    /// Density of `P̃` on `[0, L]`.
    pub fn continuous_density(&self, u: f64) -> f64 {
        if u > 0.0 && u <= self.upper {
            self.truth.mixing_density(u) / self.within
        } else {
            0.0
        }
    }

    /// `∫ Unif(x | 0, u) P^{⋆L}(du)`.
    pub fn mixture_density(&self, x: f64) -> f64 {
        if !(0.0..=self.upper).contains(&x) {
            return 0.0;
        }
        let continuous = if x < self.upper {
            quad::adaptive(
                |v| self.continuous_density(v) / v,
                x,
                self.upper,
                INTEGRAL_TOLERANCE,
            )
        } else {
            0.0
        };
        self.pi * continuous + (1.0 - self.pi) / self.upper
    }
}

/// A point mass found by [`williamson_inverse`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// The mixing distribution recovered from a monotone density.
pub struct WilliamsonInverse<D> {
    derivative: D,
    atoms: Vec<Atom>,
}

impl<D: Fn(f64) -> f64> WilliamsonInverse<D> {
    /// `-u m'(u)`, clipped at zero.
    pub fn density(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        (-u * (self.derivative)(u)).max(0.0)
    }

    /// Jumps of `m`, each carrying mass `u · (m(u-) - m(u+))`.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
}

impl<D> fmt::Debug for WilliamsonInverse<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WilliamsonInverse")
            .field("atoms", &self.atoms)
            .finish_non_exhaustive()
    }
}

/// Inverts `m(x) = ∫ Unif(x | 0, u) P(du)`: `P(du) = -u dm(u)`.
///
/// `grid` is scanned for positive derivatives, which are rejected beyond
/// `1e-8`, and for drops in `m` that the derivative does not account for.
/// Each such drop is located by bisection and reported as an atom.
pub fn williamson_inverse<M, D>(
    density: M,
    derivative: D,
    grid: &[f64],
) -> Result<WilliamsonInverse<D>>
where
    M: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return Err(Error::config(
            "inversion grid must be increasing and non-negative",
        ));
    }
    for &x in grid {
        let d = derivative(x);
        if d > 1e-8 {
            return Err(Error::NonMonotone {
                at: x,
                derivative: d,
            });
        }
    }
    let mut atoms = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let observed = density(a) - density(b);
        let smooth = -quad::adaptive(&derivative, a, b, 1e-12);
        let scale = density(a).abs().max(1.0);
        if (observed - smooth).abs() <= 1e-6 * scale {
            continue;
        }
        if observed < smooth - 1e-6 * scale {
            return Err(Error::NonMonotone {
                at: b,
                derivative: (smooth - observed) / (b - a),
            });
        }
        // bisect on the unexplained drop
        let jump_in = |lo: f64, hi: f64| {
            (density(lo) - density(hi)) + quad::adaptive(&derivative, lo, hi, 1e-13)
        };
        let (mut lo, mut hi) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if jump_in(lo, mid) > 0.5 * (observed - smooth) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let location = 0.5 * (lo + hi);
        let drop = density(lo) - density(hi);
        atoms.push(Atom {
            location,
            mass: location * drop,
        });
    }
    Ok(WilliamsonInverse { derivative, atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use crate::measure::weak_distance;
    use proptest::prelude::*;

    fn support(a: f64, b: f64) -> SupportInterval {
        SupportInterval::new(a, b).unwrap()
    }

    #[test]
    fn built_in_truths_are_valid() {
        for name in TRUTH_NAMES {
            let t = truth_by_name(name).unwrap();
            assert_eq!(t.name(), name);
            validate_truth(t.as_ref(), 10.0).unwrap();
            let total = quad::adaptive(|u| t.mixing_density(u), 0.0, 40.0, 1e-12);
            assert!((total - 1.0).abs() < 1e-10);
        }
        assert!(truth_by_name("cauchy").is_err());
    }

    #[test]
    fn mixing_cdf_closed_forms_match_quadrature() {
        for name in TRUTH_NAMES {
            let t = truth_by_name(name).unwrap();
            for u in [1e-5, 0.01, 0.3, 0.99, 1.0, 2.0, 5.0] {
                let q = quad::adaptive(|v| t.mixing_density(v), 0.0, u, 1e-15);
                let c = t.mixing_cdf(u);
                assert!((q - c).abs() <= 1e-12 + 1e-9 * q, "{name} {u}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn survival_and_cdf_agree() {
        for name in TRUTH_NAMES {
            let t = truth_by_name(name).unwrap();
            for x in [0.0, 0.5, 3.0] {
                assert!((t.cdf(x) + t.survival(x) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn williamson_round_trip() {
        for name in TRUTH_NAMES {
            let t = truth_by_name(name).unwrap();
            for i in 0..100 {
                let x = 0.05 + 0.05 * i as f64;
                let m = quad::adaptive(
                    |u| if u >= x { t.mixing_density(u) / u } else { 0.0 },
                    x,
                    60.0,
                    1e-13,
                );
                assert!((m - t.density(x)).abs() < 1e-9, "{name} at {x}");
            }
        }
    }

    #[test]
    fn williamson_inverse_recovers_known_mixing_densities() {
        let grid = quad::linspace(0.0, 8.0, 81);
        let inv = williamson_inverse(|x: f64| (-x).exp(), |x: f64| -(-x).exp(), &grid).unwrap();
        assert!(inv.atoms().is_empty());
        for u in [0.1, 1.0, 2.5] {
            assert!((inv.density(u) - u * (-u).exp()).abs() < 1e-15);
        }
        let hn = HalfNormal;
        let inv =
            williamson_inverse(|x| hn.density(x), |x| hn.density_derivative(x), &grid).unwrap();
        assert!(inv.atoms().is_empty());
        let total = quad::adaptive(|u| inv.density(u), 0.0, 40.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-10);
        for u in [0.3, 1.7] {
            let expected = HALF_NORMAL_PEAK * u * u * (-0.5 * u * u).exp();
            assert!((inv.density(u) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn williamson_inverse_reports_uniform_atom() {
        let c = 1.3;
        let m = move |x: f64| if (0.0..=c).contains(&x) { 1.0 / c } else { 0.0 };
        let grid = quad::linspace(0.0, 3.0, 31);
        let inv = williamson_inverse(m, |_| 0.0, &grid).unwrap();
        assert_eq!(inv.atoms().len(), 1);
        let atom = inv.atoms()[0];
        assert!((atom.location - c).abs() < 1e-12);
        assert!((atom.mass - 1.0).abs() < 1e-12);
        assert_eq!(inv.density(0.7), 0.0);
    }

    #[test]
    fn williamson_inverse_rejects_increasing_input() {
        let grid = quad::linspace(0.0, 2.0, 11);
        match williamson_inverse(|x: f64| x, |_| 1.0, &grid) {
            Err(Error::NonMonotone { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        // tiny positive noise is clipped rather than rejected
        let inv = williamson_inverse(
            |x: f64| (-x).exp(),
            |x: f64| if x > 1.0 { 1e-10 } else { -(-x).exp() },
            &grid,
        );
        assert!(inv.is_err() || inv.unwrap().density(1.5) == 0.0);
    }

    #[test]
    fn support_construction() {
        let s = build_support(&[1.0, 3.0, 2.0], 1e-5).unwrap();
        assert_eq!((s.lower(), s.upper()), (1e-5, 3.0));
        let s = build_support(&[5.0], 1e-5).unwrap();
        assert_eq!(s.upper(), 5.0);
        assert!(build_support(&[0.5], 1.0).is_err());
        assert!(build_support(&[], 1e-5).is_err());
    }

    #[test]
    fn initial_guess_layout() {
        let s = support(0.1, 2.1);
        let p = initial_guess(s, &PrConfig::default()).unwrap();
        assert!(p.density().iter().all(|&d| (d - 0.45).abs() < 1e-12));
        assert!((p.total_mass() - 1.0).abs() < 1e-10);
        let k = uniform_kernel();
        let xs = quad::linspace(0.0, 2.1, 500);
        let m = k.mixture_density_many(&p, &xs).unwrap();
        assert!(m.iter().all(|&v| v >= 0.05 / 2.1 - 1e-15));
    }

    #[test]
    fn restricted_target_examples() {
        let e = Exponential;
        let t = restrict_target(&e, 2f64.ln()).unwrap();
        assert!((t.density(0.0) - 2.0).abs() < 1e-12);
        let t = restrict_target(&e, 10.0).unwrap();
        assert!((t.density(1.0) - 0.367_896).abs() < 1e-6);
        assert_eq!(t.density(10.5), 0.0);
        let far = restrict_target(&e, 60.0).unwrap();
        assert!((far.density(0.7) - e.density(0.7)).abs() < 1e-15);
        for name in TRUTH_NAMES {
            let truth = truth_by_name(name).unwrap();
            let t = restrict_target(truth.as_ref(), 1.5).unwrap();
            let total = quad::adaptive(|x| t.density(x), 0.0, 1.5, 1e-12);
            assert!((total - 1.0).abs() < 1e-8);
            assert!(t.density(0.4) >= truth.density(0.4));
        }
        assert!(restrict_target(&e, 0.0).is_err());
    }

    #[test]
    fn kl_minimizer_coefficients() {
        let e = Exponential;
        let k = KlMinimizer::new(&e, support(0.1, 2.0)).unwrap();
        let m_l = 1.0 - (-2f64).exp();
        assert!((k.atom_upper() - 0.313_035).abs() < 1e-5);
        assert!((k.atom_upper() - 2.0 * (-2f64).exp() / m_l).abs() < 1e-14);
        assert!((k.atom_lower() - 0.005_411).abs() < 1e-5);
        assert!((k.atom_lower() - (1.0 - 1.1 * (-0.1f64).exp()) / m_l).abs() < 1e-14);
        assert!((k.atom_lower() + k.interior_mass() + k.atom_upper() - 1.0).abs() < 1e-12);
        assert!((k.coefficient_interior() - (1.0 - 3.0 * (-2f64).exp()) / m_l).abs() < 1e-14);
        let p = k.to_measure(1000).unwrap();
        assert!((p.total_mass() - 1.0).abs() < 1e-8);
        assert!((p.atom_upper() - k.atom_upper()).abs() < 1e-15);
    }

    #[test]
    fn kl_minimizer_approaches_truth_on_wide_supports() {
        let e = Exponential;
        let narrow = KlMinimizer::new(&e, support(1e-6, 40.0)).unwrap();
        assert!(narrow.atom_lower() < 1e-12);
        assert!(narrow.atom_upper() < 1e-15);
        // compare with P⋆ discretized on the same grid
        let p = narrow.to_measure(4000).unwrap();
        let star = MixingMeasure::from_density_fn(support(1e-6, 40.0), 4000, 0.0, 0.0, |u| {
            e.mixing_density(u)
        })
        .unwrap();
        assert!(weak_distance(&p, &star).unwrap() < 1e-10);
    }

    #[test]
    fn minimizer_density_examples() {
        let e = Exponential;
        let s = support(0.1, 2.0);
        let m = kl_minimizer_density(&e, s).unwrap();
        let expected = (-1f64).exp() / (1.0 - (-2f64).exp());
        assert!((m(1.0) - expected).abs() < 1e-10);
        assert_eq!(m(0.0), m(0.05));
        assert_eq!(m(0.0), m(0.1));
        let total = quad::adaptive(&m, 0.0, 0.1, 1e-13) + quad::adaptive(&m, 0.1, 2.0, 1e-13);
        assert!((total - 1.0).abs() < 1e-10);
        assert_eq!(m(2.5), 0.0);
    }

    #[test]
    fn minimizer_density_matches_gridded_measure() {
        let e = Exponential;
        let s = support(0.1, 2.0);
        let k = KlMinimizer::new(&e, s).unwrap();
        let p = k.to_measure(2000).unwrap();
        let uk = uniform_kernel();
        for x in [0.0, 0.05, 0.3, 1.0, 1.99, 2.0] {
            let grid = mixture_density(&uk, &p, x).unwrap();
            assert!((grid - k.density(x)).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn interval_agreement_and_mass_matching() {
        for name in TRUTH_NAMES {
            let truth = truth_by_name(name).unwrap();
            let s = support(0.05, 3.0);
            let k = KlMinimizer::new(truth.as_ref(), s).unwrap();
            let target = k.target();
            for x in quad::linspace(0.05, 3.0, 200).into_iter().skip(1) {
                assert!(
                    (k.density(x) - target.density(x)).abs() < 1e-8,
                    "{name} at {x}"
                );
            }
            let below = 0.05 * k.density(0.0);
            let target_below = quad::adaptive(|x| target.density(x), 0.0, 0.05, 1e-14);
            assert!((below - target_below).abs() < 1e-8);
        }
    }

    #[test]
    fn bias_bound_examples() {
        let e = Exponential;
        let b = bias_bound(&e, support(1e-5, 10.0)).unwrap();
        let l: f64 = 1e-5;
        let closed =
            2.0 * ((-10f64).exp() + (1.0 - (1.0 + l) * (-l).exp()) / (1.0 - (-10f64).exp()));
        assert!((b - 9.08e-5).abs() < 1e-6);
        assert!((b - closed).abs() < 1e-12);
        assert!(bias_bound(&e, support(1e-9, 50.0)).unwrap() < 1e-15);
    }

    #[test]
    fn minimizer_origin_bias_decays_like_the_tail() {
        let e = Exponential;
        let ratios: Vec<f64> = [2.0, 4.0, 6.0, 8.0, 10.0]
            .iter()
            .map(|&l| {
                let k = KlMinimizer::new(&e, support(1e-5, l)).unwrap();
                (k.origin_density() - e.density(0.0)) / e.survival(l)
            })
            .collect();
        let c = ratios.iter().copied().fold(0.0, f64::max);
        assert!(c < 2.0, "{ratios:?}");
        assert!(ratios.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn restricted_mixing_reproduces_target() {
        for name in TRUTH_NAMES {
            let truth = truth_by_name(name).unwrap();
            let mix = RestrictedMixing::new(truth.as_ref(), 2.5).unwrap();
            let target = restrict_target(truth.as_ref(), 2.5).unwrap();
            assert!(mix.pi() < 1.0 && mix.pi() > 0.0);
            for x in quad::linspace(0.01, 2.5, 50) {
                assert!((mix.mixture_density(x) - target.density(x)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn origin_estimate_of_initial_guess() {
        let s = support(0.1, 2.1);
        let cfg = PrConfig::default().with_permutations(1).unwrap();
        let p = initial_guess(s, &cfg).unwrap();
        let fit = crate::engine::fit(&[], &uniform_kernel(), &p, &cfg).unwrap();
        let expected = 0.05 / 0.1 + 0.45 * (2.1f64 / 0.1).ln() + 0.05 / 2.1;
        let got = origin_estimate(&fit).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert_eq!(
            got,
            mixture_density(&uniform_kernel(), &fit.mixing, 0.1).unwrap()
        );
    }

    #[test]
    fn mixture_floor_product() {
        let f = MixtureFloor::at(0.05, 2.0, 0.1, 3).unwrap();
        let expected = 0.025 * (1.0 - 0.1 / 2.0) * (1.0 - 0.1 / 3.0) * (1.0 - 0.1 / 4.0);
        assert!((f - expected).abs() < 1e-17);
    }

    proptest! {
        #[test]
        fn minimizer_is_a_probability_measure(l in 0.001f64..0.5, span in 0.5f64..15.0, which in 0usize..2) {
            let truth = truth_by_name(TRUTH_NAMES[which]).unwrap();
            let k = KlMinimizer::new(truth.as_ref(), support(l, l + span)).unwrap();
            prop_assert!(k.atom_lower() >= 0.0 && k.atom_upper() >= 0.0 && k.interior_mass() >= 0.0);
            prop_assert!((k.atom_lower() + k.interior_mass() + k.atom_upper() - 1.0).abs() < 1e-10);
            let b = bias_bound(truth.as_ref(), k.support()).unwrap();
            prop_assert!(b > 0.0);
        }
    }
}
