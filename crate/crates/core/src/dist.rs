//! One-dimensional distribution arithmetic.
//!
//! The decision-signal laws handled by the engine are either purely atomic,
//! Gaussian, Gaussian mixtures (atoms smeared by Gaussian noise), or gridded
//! densities for numeric fallback. This module implements their mid-point
//! CDFs, convolution with an independent noise term, and essential support
//! bounds. All values are immutable after construction and safe to share
//! across threads.

use std::cmp::Ordering;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// Tolerance for probability masses / mixture weights summing to one.
pub const MASS_TOL: f64 = 1e-12;
/// Relative tolerance under which two atom values are merged into one.
pub const MERGE_RTOL: f64 = 1e-12;
/// Tolerance for the trapezoid integral of a gridded density.
pub const GRID_MASS_TOL: f64 = 1e-6;
/// Relative tolerance under which a point is treated as sitting exactly on
/// an atom or a support endpoint. The threshold recursion reproduces atom
/// values only up to floating rounding, so tie detection must absorb that
/// noise; the decision rule and the cascade predicate use the same window so
/// that they stay consistent with the mid-point CDF.
pub const TIE_RTOL: f64 = 1e-9;

/// Compare `z` against a reference point `v`, snapping to `Equal` inside the
/// tie window. Infinite endpoints compare exactly.
pub(crate) fn tie_cmp(z: f64, v: f64) -> Ordering {
    if !z.is_finite() || !v.is_finite() {
        return z.partial_cmp(&v).unwrap_or(Ordering::Equal);
    }
    let scale = 1.0_f64.max(z.abs()).max(v.abs());
    if (z - v).abs() <= TIE_RTOL * scale {
        Ordering::Equal
    } else if z < v {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Standard normal CDF.
///
/// `std_normal_cdf(z) + std_normal_cdf(-z) == 1.0` holds exactly: the lower
/// half is computed directly from `erfc` (full relative precision in the far
/// tail) and the upper half is `1 -` the same quantity. Saturates to exactly
/// 0 and 1 beyond ±39.
pub fn std_normal_cdf(z: f64) -> f64 {
    const SATURATION: f64 = 39.0;
    if z < 0.0 {
        if z < -SATURATION {
            return 0.0;
        }
        0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
    } else {
        if z > SATURATION {
            return 1.0;
        }
        1.0 - 0.5 * libm::erfc(z * FRAC_1_SQRT_2)
    }
}

fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    (-0.5 * d * d / variance).exp() / (variance * std::f64::consts::TAU).sqrt()
}

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(value: f64, mass: f64) -> Self {
        Atom { value, mass }
    }
}

/// One Gaussian component of a mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub center: f64,
    pub variance: f64,
    pub weight: f64,
}

/// Essential support endpoints; infinite for any law with a Gaussian part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    /// Componentwise sum with the usual extended-real arithmetic.
    pub fn add(&self, other: &Bounds) -> Bounds {
        Bounds {
            lower: self.lower + other.lower,
            upper: self.upper + other.upper,
        }
    }
}

/// A one-dimensional law of a log-likelihood ratio or noise term.
///
/// Use the validating constructors ([`ScalarDistribution::atoms`] and
/// friends); operations assume their invariants hold.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarDistribution {
    /// Finite support; values strictly increasing, masses strictly positive
    /// and summing to one.
    Atoms(Vec<Atom>),
    Gaussian { mean: f64, variance: f64 },
    /// Weights strictly positive and summing to one, variances positive.
    GaussianMixture(Vec<MixtureComponent>),
    /// Density samples on a uniform grid, linearly interpolated between
    /// nodes; trapezoid integral equals one.
    Grid {
        origin: f64,
        step: f64,
        densities: Vec<f64>,
    },
}

/// Sort atoms, merge values closer than [`MERGE_RTOL`] (relative), and check
/// the mass budget.
fn normalize_atoms(mut atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    if atoms.is_empty() {
        return Err(Error::InvalidConfig("atom list must be non-empty".into()));
    }
    for a in &atoms {
        if !a.value.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "atom value {} is not finite",
                a.value
            )));
        }
        if !(a.mass > 0.0) || !a.mass.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "atom mass {} must be strictly positive",
                a.mass
            )));
        }
    }
    atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match merged.last_mut() {
            Some(last)
                if (a.value - last.value).abs()
                    <= MERGE_RTOL * 1.0_f64.max(last.value.abs()).max(a.value.abs()) =>
            {
                last.mass += a.mass;
            }
            _ => merged.push(a),
        }
    }
    let total: f64 = merged.iter().map(|a| a.mass).sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidConfig(format!(
            "atom masses sum to {total}, not 1"
        )));
    }
    Ok(merged)
}

impl ScalarDistribution {
    /// Finite-support law. Input atoms are sorted and near-equal values
    /// merged; masses must be strictly positive and sum to one.
    pub fn atoms(atoms: Vec<Atom>) -> Result<Self> {
        Ok(ScalarDistribution::Atoms(normalize_atoms(atoms)?))
    }

    /// The unit point mass at zero (identity element of convolution).
    pub fn point_mass_at_zero() -> Self {
        ScalarDistribution::Atoms(vec![Atom::new(0.0, 1.0)])
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "Gaussian mean {mean} is not finite"
            )));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "Gaussian variance {variance} must be strictly positive"
            )));
        }
        Ok(ScalarDistribution::Gaussian { mean, variance })
    }

    pub fn gaussian_mixture(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidConfig(
                "mixture must have at least one component".into(),
            ));
        }
        let mut total = 0.0;
        for c in &components {
            if !c.center.is_finite() || !(c.variance > 0.0) || !c.variance.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "mixture component (center {}, variance {}) is invalid",
                    c.center, c.variance
                )));
            }
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "mixture weight {} must be strictly positive",
                    c.weight
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidConfig(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        Ok(ScalarDistribution::GaussianMixture(components))
    }

    pub fn grid(origin: f64, step: f64, densities: Vec<f64>) -> Result<Self> {
        if densities.len() < 2 {
            return Err(Error::InvalidConfig(
                "grid needs at least two density samples".into(),
            ));
        }
        if !origin.is_finite() || !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid origin {origin} / step {step} invalid"
            )));
        }
        if densities.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidConfig(
                "grid densities must be finite and nonnegative".into(),
            ));
        }
        let mass = trapezoid_mass(step, &densities);
        if (mass - 1.0).abs() > GRID_MASS_TOL {
            return Err(Error::InvalidConfig(format!(
                "grid trapezoid integral is {mass}, not 1"
            )));
        }
        Ok(ScalarDistribution::Grid {
            origin,
            step,
            densities,
        })
    }

    /// Mid-point CDF: `P(V < z) + P(V = z) / 2`.
    ///
    /// Non-decreasing in `z` with range [0, 1]; returns exactly 0 / 1
    /// strictly outside a finite support. Points within the tie window of an
    /// atom count that atom at half mass.
    pub fn mid_cdf(&self, z: f64) -> f64 {
        match self {
            ScalarDistribution::Atoms(atoms) => {
                if tie_cmp(z, atoms[0].value) == Ordering::Less {
                    return 0.0;
                }
                if tie_cmp(z, atoms[atoms.len() - 1].value) == Ordering::Greater {
                    return 1.0;
                }
                let mut acc = 0.0;
                for a in atoms {
                    match tie_cmp(z, a.value) {
                        Ordering::Greater => acc += a.mass,
                        Ordering::Equal => {
                            acc += 0.5 * a.mass;
                            break;
                        }
                        Ordering::Less => break,
                    }
                }
                acc
            }
            ScalarDistribution::Gaussian { mean, variance } => {
                std_normal_cdf((z - mean) / variance.sqrt())
            }
            ScalarDistribution::GaussianMixture(components) => components
                .iter()
                .map(|c| c.weight * std_normal_cdf((z - c.center) / c.variance.sqrt()))
                .sum(),
            ScalarDistribution::Grid {
                origin,
                step,
                densities,
            } => {
                let n = densities.len();
                let end = origin + step * (n - 1) as f64;
                if z <= *origin {
                    return 0.0;
                }
                if z >= end {
                    return 1.0;
                }
                let total = trapezoid_mass(*step, densities);
                let pos = (z - origin) / step;
                let cell = (pos.floor() as usize).min(n - 2);
                let frac = pos - cell as f64;
                let mut acc = 0.0;
                for k in 0..cell {
                    acc += 0.5 * (densities[k] + densities[k + 1]) * step;
                }
                let d_at_z = densities[cell] + (densities[cell + 1] - densities[cell]) * frac;
                acc += 0.5 * (densities[cell] + d_at_z) * (frac * step);
                (acc / total).clamp(0.0, 1.0)
            }
        }
    }

    /// Law of `V + N` for independent `V ~ self`, `N ~ noise`.
    ///
    /// Closed forms: atoms ⊕ atoms, atoms ⊕ Gaussian (either order),
    /// Gaussian ⊕ Gaussian, and the point mass at zero as identity. A grid
    /// noise term triggers numeric convolution onto a fresh grid. Other
    /// pairings are rejected.
    pub fn convolve_with_noise(&self, noise: &ScalarDistribution) -> Result<ScalarDistribution> {
        use ScalarDistribution::*;
        if let Atoms(n) = noise {
            if n.len() == 1 && n[0].value == 0.0 {
                return Ok(self.clone());
            }
        }
        if let Atoms(d) = self {
            if d.len() == 1 && d[0].value == 0.0 {
                return Ok(noise.clone());
            }
        }
        match (self, noise) {
            (Atoms(a), Atoms(b)) => {
                let mut sums = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        sums.push(Atom::new(x.value + y.value, x.mass * y.mass));
                    }
                }
                ScalarDistribution::atoms(sums)
            }
            (Atoms(a), Gaussian { mean, variance }) | (Gaussian { mean, variance }, Atoms(a)) => {
                let components = a
                    .iter()
                    .map(|at| MixtureComponent {
                        center: at.value + mean,
                        variance: *variance,
                        weight: at.mass,
                    })
                    .collect();
                ScalarDistribution::gaussian_mixture(components)
            }
            (
                Gaussian { mean: m1, variance: v1 },
                Gaussian { mean: m2, variance: v2 },
            ) => ScalarDistribution::gaussian(m1 + m2, v1 + v2),
            (_, Grid { origin, step, densities }) => {
                convolve_numeric(self, *origin, *step, densities)
            }
            (d, n) => Err(Error::InvalidConfig(format!(
                "unsupported convolution pair: {} + {}",
                d.variant_name(),
                n.variant_name()
            ))),
        }
    }

    /// Essential infimum and supremum of the support.
    pub fn essential_bounds(&self) -> Bounds {
        match self {
            ScalarDistribution::Atoms(atoms) => Bounds {
                lower: atoms[0].value,
                upper: atoms[atoms.len() - 1].value,
            },
            ScalarDistribution::Gaussian { .. } | ScalarDistribution::GaussianMixture(_) => {
                Bounds {
                    lower: f64::NEG_INFINITY,
                    upper: f64::INFINITY,
                }
            }
            ScalarDistribution::Grid {
                origin,
                step,
                densities,
            } => {
                // Density is piecewise linear, so mass reaches one node past
                // the outermost strictly positive sample.
                let first = densities.iter().position(|&d| d > 0.0).unwrap_or(0);
                let last = densities
                    .iter()
                    .rposition(|&d| d > 0.0)
                    .unwrap_or(densities.len() - 1);
                Bounds {
                    lower: origin + step * first.saturating_sub(1) as f64,
                    upper: origin + step * ((last + 1).min(densities.len() - 1)) as f64,
                }
            }
        }
    }

    fn variant_name(&self) -> &'static str {
        match self {
            ScalarDistribution::Atoms(_) => "atoms",
            ScalarDistribution::Gaussian { .. } => "gaussian",
            ScalarDistribution::GaussianMixture(_) => "gaussian-mixture",
            ScalarDistribution::Grid { .. } => "grid",
        }
    }

    /// Range outside which the density is negligible; used to size numeric
    /// convolution grids. Gaussian parts are cut at ±8 standard deviations.
    fn effective_support(&self) -> (f64, f64) {
        match self {
            ScalarDistribution::Atoms(atoms) => {
                (atoms[0].value, atoms[atoms.len() - 1].value)
            }
            ScalarDistribution::Gaussian { mean, variance } => {
                let sd = variance.sqrt();
                (mean - 8.0 * sd, mean + 8.0 * sd)
            }
            ScalarDistribution::GaussianMixture(components) => {
                let lo = components
                    .iter()
                    .map(|c| c.center - 8.0 * c.variance.sqrt())
                    .fold(f64::INFINITY, f64::min);
                let hi = components
                    .iter()
                    .map(|c| c.center + 8.0 * c.variance.sqrt())
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            ScalarDistribution::Grid { .. } => {
                let b = self.essential_bounds();
                (b.lower, b.upper)
            }
        }
    }
}

fn trapezoid_mass(step: f64, densities: &[f64]) -> f64 {
    let sum: f64 = densities.iter().sum();
    step * (sum - 0.5 * (densities[0] + densities[densities.len() - 1]))
}

fn grid_mean_and_variance(origin: f64, step: f64, densities: &[f64]) -> (f64, f64) {
    let node = |i: usize| origin + step * i as f64;
    let mut mass = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for i in 0..densities.len() - 1 {
        let (x0, x1) = (node(i), node(i + 1));
        let (d0, d1) = (densities[i], densities[i + 1]);
        mass += 0.5 * (d0 + d1) * step;
        m1 += 0.5 * (d0 * x0 + d1 * x1) * step;
        m2 += 0.5 * (d0 * x0 * x0 + d1 * x1 * x1) * step;
    }
    let mean = m1 / mass;
    (mean, (m2 / mass - mean * mean).max(0.0))
}

fn grid_density_at(x: f64, origin: f64, step: f64, densities: &[f64]) -> f64 {
    let pos = (x - origin) / step;
    if pos < 0.0 || pos > (densities.len() - 1) as f64 {
        return 0.0;
    }
    let cell = (pos.floor() as usize).min(densities.len() - 2);
    let frac = pos - cell as f64;
    densities[cell] + (densities[cell + 1] - densities[cell]) * frac
}

/// Numeric convolution of `d` with a gridded noise density. The output grid
/// spans the sum of the effective supports padded by eight noise standard
/// deviations, sampled at 2^14 uniform points, and is renormalized to unit
/// trapezoid mass.
fn convolve_numeric(
    d: &ScalarDistribution,
    noise_origin: f64,
    noise_step: f64,
    noise_densities: &[f64],
) -> Result<ScalarDistribution> {
    const POINTS: usize = 1 << 14;
    let (dlo, dhi) = d.effective_support();
    let noise_end = noise_origin + noise_step * (noise_densities.len() - 1) as f64;
    let (_, noise_var) = grid_mean_and_variance(noise_origin, noise_step, noise_densities);
    let pad = 8.0 * noise_var.sqrt();
    let lo = dlo + noise_origin - pad;
    let hi = dhi + noise_end + pad;
    let step = (hi - lo) / (POINTS - 1) as f64;

    let mut out = vec![0.0; POINTS];
    match d {
        ScalarDistribution::Atoms(atoms) => {
            // Exact: a mixture of shifted copies of the noise density.
            for (k, slot) in out.iter_mut().enumerate() {
                let z = lo + step * k as f64;
                *slot = atoms
                    .iter()
                    .map(|a| {
                        a.mass * grid_density_at(z - a.value, noise_origin, noise_step, noise_densities)
                    })
                    .sum();
            }
        }
        _ => {
            let pdf = |x: f64| -> f64 {
                match d {
                    ScalarDistribution::Gaussian { mean, variance } => {
                        normal_pdf(x, *mean, *variance)
                    }
                    ScalarDistribution::GaussianMixture(components) => components
                        .iter()
                        .map(|c| c.weight * normal_pdf(x, c.center, c.variance))
                        .sum(),
                    ScalarDistribution::Grid {
                        origin,
                        step,
                        densities,
                    } => grid_density_at(x, *origin, *step, densities),
                    ScalarDistribution::Atoms(_) => unreachable!(),
                }
            };
            for (k, slot) in out.iter_mut().enumerate() {
                let z = lo + step * k as f64;
                let mut acc = 0.0;
                for (j, g) in noise_densities.iter().enumerate() {
                    if *g == 0.0 {
                        continue;
                    }
                    let u = noise_origin + noise_step * j as f64;
                    let w = if j == 0 || j == noise_densities.len() - 1 {
                        0.5
                    } else {
                        1.0
                    };
                    acc += w * g * pdf(z - u);
                }
                *slot = acc * noise_step;
            }
        }
    }

    let mass = trapezoid_mass(step, &out);
    if !(mass > 0.0) {
        return Err(Error::InvalidConfig(
            "numeric convolution produced zero mass".into(),
        ));
    }
    for v in &mut out {
        *v /= mass;
    }
    ScalarDistribution::grid(lo, step, out)
}
