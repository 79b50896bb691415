//! Private-signal families and their log-likelihood-ratio laws.
//!
//! Decisions depend on a private signal only through its log-likelihood
//! ratio, so models sample directly in LLR space and raw signal values are
//! never materialized.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dist::{Atom, ScalarDistribution};
use crate::error::{Error, Result};

/// The hidden binary world state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum World {
    Zero,
    One,
}

impl World {
    pub fn index(self) -> usize {
        match self {
            World::Zero => 0,
            World::One => 1,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            World::One
        } else {
            World::Zero
        }
    }

    pub fn as_bit(self) -> bool {
        self == World::One
    }

    pub fn other(self) -> Self {
        match self {
            World::Zero => World::One,
            World::One => World::Zero,
        }
    }

    /// Whether a decision bit names this world.
    pub fn matches_decision(self, decision: bool) -> bool {
        decision == self.as_bit()
    }
}

/// One letter of a finite signal alphabet, carried as its LLR value together
/// with its conditional probabilities under each world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphabetAtom {
    pub llr: f64,
    pub p0: f64,
    pub p1: f64,
}

/// A private-signal family, identified by the law of its LLR under each
/// world.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalModel {
    /// Binary signal flipped with probability `crossover` in either world.
    BinarySymmetric { crossover: f64 },
    /// `S ~ N(±mean, variance)` with the sign tied to the world; the LLR is
    /// then Gaussian with variance `d² = 4·mean²/variance` and mean `±d²/2`.
    SymmetricGaussian { mean: f64, variance: f64 },
    /// Arbitrary finite alphabet given by per-letter LLR and world-conditional
    /// probabilities.
    FiniteAlphabet(Vec<AlphabetAtom>),
}

/// Tolerance for a declared alphabet LLR against `ln(p1/p0)`.
pub const LLR_CONSISTENCY_TOL: f64 = 1e-9;

impl SignalModel {
    pub fn binary_symmetric(crossover: f64) -> Result<Self> {
        if !(crossover > 0.0 && crossover < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "crossover probability {crossover} must lie strictly inside (0, 0.5)"
            )));
        }
        Ok(SignalModel::BinarySymmetric { crossover })
    }

    pub fn symmetric_gaussian(mean: f64, variance: f64) -> Result<Self> {
        if mean == 0.0 || !mean.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "signal mean {mean} must be finite and nonzero"
            )));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "signal variance {variance} must be strictly positive"
            )));
        }
        Ok(SignalModel::SymmetricGaussian { mean, variance })
    }

    pub fn finite_alphabet(mut letters: Vec<AlphabetAtom>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidConfig("alphabet must be non-empty".into()));
        }
        let (mut s0, mut s1) = (0.0, 0.0);
        for l in &letters {
            if !(l.p0 > 0.0) || !(l.p1 > 0.0) || !l.p0.is_finite() || !l.p1.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "letter probabilities ({}, {}) must be strictly positive",
                    l.p0, l.p1
                )));
            }
            if (l.llr - (l.p1 / l.p0).ln()).abs() > LLR_CONSISTENCY_TOL {
                return Err(Error::InvalidConfig(format!(
                    "declared LLR {} is inconsistent with ln(p1/p0) = {}",
                    l.llr,
                    (l.p1 / l.p0).ln()
                )));
            }
            s0 += l.p0;
            s1 += l.p1;
        }
        if (s0 - 1.0).abs() > crate::dist::MASS_TOL || (s1 - 1.0).abs() > crate::dist::MASS_TOL {
            return Err(Error::InvalidConfig(format!(
                "letter probabilities sum to ({s0}, {s1}), not 1"
            )));
        }
        letters.sort_by(|a, b| a.llr.total_cmp(&b.llr));
        // letters sharing an LLR value are indistinguishable to the decision
        // rule; merge them
        let mut merged: Vec<AlphabetAtom> = Vec::with_capacity(letters.len());
        for l in letters {
            match merged.last_mut() {
                Some(last)
                    if (l.llr - last.llr).abs()
                        <= crate::dist::MERGE_RTOL * 1.0_f64.max(last.llr.abs()).max(l.llr.abs()) =>
                {
                    last.p0 += l.p0;
                    last.p1 += l.p1;
                }
                _ => merged.push(l),
            }
        }
        Ok(SignalModel::FiniteAlphabet(merged))
    }

    /// Exact law of the LLR given the world.
    pub fn llr_distribution(&self, world: World) -> ScalarDistribution {
        match self {
            SignalModel::BinarySymmetric { crossover } => {
                let a = ((1.0 - crossover) / crossover).ln();
                let minus_mass = match world {
                    World::One => *crossover,
                    World::Zero => 1.0 - crossover,
                };
                ScalarDistribution::atoms(vec![
                    Atom::new(-a, minus_mass),
                    Atom::new(a, 1.0 - minus_mass),
                ])
                .expect("valid by construction")
            }
            SignalModel::SymmetricGaussian { mean, variance } => {
                let d2 = 4.0 * mean * mean / variance;
                let sign = if world == World::One { 1.0 } else { -1.0 };
                ScalarDistribution::gaussian(sign * d2 / 2.0, d2).expect("valid by construction")
            }
            SignalModel::FiniteAlphabet(letters) => ScalarDistribution::atoms(
                letters
                    .iter()
                    .map(|l| {
                        Atom::new(
                            l.llr,
                            match world {
                                World::Zero => l.p0,
                                World::One => l.p1,
                            },
                        )
                    })
                    .collect(),
            )
            .expect("valid by construction"),
        }
    }

    /// One draw of the LLR under the given world.
    pub fn sample_llr<R: Rng + ?Sized>(&self, world: World, rng: &mut R) -> f64 {
        match self {
            SignalModel::BinarySymmetric { crossover } => {
                let a = ((1.0 - crossover) / crossover).ln();
                let p_plus = match world {
                    World::One => 1.0 - crossover,
                    World::Zero => *crossover,
                };
                if rng.random::<f64>() < p_plus {
                    a
                } else {
                    -a
                }
            }
            SignalModel::SymmetricGaussian { mean, variance } => {
                let d2 = 4.0 * mean * mean / variance;
                let sign = if world == World::One { 1.0 } else { -1.0 };
                let z: f64 = rng.sample(StandardNormal);
                sign * d2 / 2.0 + d2.sqrt() * z
            }
            SignalModel::FiniteAlphabet(letters) => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for l in letters {
                    acc += match world {
                        World::Zero => l.p0,
                        World::One => l.p1,
                    };
                    if u < acc {
                        return l.llr;
                    }
                }
                letters[letters.len() - 1].llr
            }
        }
    }
}
