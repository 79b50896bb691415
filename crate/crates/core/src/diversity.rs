//! The per-agent diversity term.
//!
//! Each agent carries an i.i.d. additive offset `xi = ln((1-theta)/theta) - nu`
//! combining its private prior belief `theta` about the world and the
//! asymmetry `nu` of its utility function. The law of `xi` can be given
//! directly (Gaussian or atomic) or composed from atomic laws of `theta` and
//! `nu`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dist::{Atom, ScalarDistribution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum DiversityModel {
    /// Homogeneous agents: `xi = 0`.
    Degenerate,
    /// `xi ~ N(0, variance)`, the model used in the simulation sweeps.
    GaussianNoise { variance: f64 },
    /// Finite-support diversity.
    AtomNoise(Vec<Atom>),
    /// Composed from atomic prior-belief and utility laws.
    Composed { theta: Vec<Atom>, nu: Vec<Atom> },
}

fn validate_mass_vector(atoms: &[Atom], what: &str) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::InvalidConfig(format!("{what} must be non-empty")));
    }
    let mut total = 0.0;
    for a in atoms {
        if !a.value.is_finite() || !(a.mass > 0.0) || !a.mass.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "{what} atom ({}, {}) is invalid",
                a.value, a.mass
            )));
        }
        total += a.mass;
    }
    if (total - 1.0).abs() > crate::dist::MASS_TOL {
        return Err(Error::InvalidConfig(format!(
            "{what} masses sum to {total}, not 1"
        )));
    }
    Ok(())
}

impl DiversityModel {
    pub fn degenerate() -> Self {
        DiversityModel::Degenerate
    }

    /// Gaussian diversity; a zero variance collapses to [`Degenerate`].
    ///
    /// [`Degenerate`]: DiversityModel::Degenerate
    pub fn gaussian_noise(variance: f64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "diversity variance {variance} must be finite and nonnegative"
            )));
        }
        if variance == 0.0 {
            Ok(DiversityModel::Degenerate)
        } else {
            Ok(DiversityModel::GaussianNoise { variance })
        }
    }

    pub fn atom_noise(atoms: Vec<Atom>) -> Result<Self> {
        match ScalarDistribution::atoms(atoms)? {
            ScalarDistribution::Atoms(normalized) => Ok(DiversityModel::AtomNoise(normalized)),
            _ => unreachable!(),
        }
    }

    /// Compose from a prior-belief law over (0, 1) and a utility-offset law.
    pub fn composed(theta: Vec<Atom>, nu: Vec<Atom>) -> Result<Self> {
        validate_mass_vector(&theta, "prior-belief")?;
        validate_mass_vector(&nu, "utility-offset")?;
        if theta.iter().any(|a| a.value <= 0.0 || a.value >= 1.0) {
            return Err(Error::InvalidConfig(
                "prior-belief atoms must lie strictly inside (0, 1)".into(),
            ));
        }
        Ok(DiversityModel::Composed { theta, nu })
    }

    /// Exact law of `xi`.
    pub fn xi_distribution(&self) -> ScalarDistribution {
        match self {
            DiversityModel::Degenerate => ScalarDistribution::point_mass_at_zero(),
            DiversityModel::GaussianNoise { variance } => {
                ScalarDistribution::gaussian(0.0, *variance).expect("valid by construction")
            }
            DiversityModel::AtomNoise(atoms) => ScalarDistribution::Atoms(atoms.clone()),
            DiversityModel::Composed { theta, nu } => {
                let mut out = Vec::with_capacity(theta.len() * nu.len());
                for t in theta {
                    for v in nu {
                        out.push(Atom::new(
                            ((1.0 - t.value) / t.value).ln() - v.value,
                            t.mass * v.mass,
                        ));
                    }
                }
                ScalarDistribution::atoms(out).expect("valid by construction")
            }
        }
    }

    /// One i.i.d. draw of `xi`.
    pub fn sample_xi<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DiversityModel::Degenerate => 0.0,
            DiversityModel::GaussianNoise { variance } => {
                let z: f64 = rng.sample(StandardNormal);
                variance.sqrt() * z
            }
            DiversityModel::AtomNoise(atoms) => sample_atoms(atoms, rng),
            DiversityModel::Composed { theta, nu } => {
                let t = sample_atoms(theta, rng);
                let v = sample_atoms(nu, rng);
                ((1.0 - t) / t).ln() - v
            }
        }
    }
}

fn sample_atoms<R: Rng + ?Sized>(atoms: &[Atom], rng: &mut R) -> f64 {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for a in atoms {
        acc += a.mass;
        if u < acc {
            return a.value;
        }
    }
    atoms[atoms.len() - 1].value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_noise_law() {
        let d = DiversityModel::gaussian_noise(0.5).unwrap();
        assert_eq!(
            d.xi_distribution(),
            ScalarDistribution::Gaussian {
                mean: 0.0,
                variance: 0.5
            }
        );
    }

    #[test]
    fn zero_variance_collapses_to_degenerate() {
        let d = DiversityModel::gaussian_noise(0.0).unwrap();
        assert_eq!(d, DiversityModel::Degenerate);
        assert_eq!(d.xi_distribution(), ScalarDistribution::point_mass_at_zero());
    }

    #[test]
    fn degenerate_law_and_samples() {
        let d = DiversityModel::degenerate();
        assert_eq!(d.xi_distribution(), ScalarDistribution::point_mass_at_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(d.sample_xi(&mut rng), 0.0);
        }
    }

    #[test]
    fn composed_neutral_agents_have_zero_offset() {
        let d = DiversityModel::composed(
            vec![Atom::new(0.5, 1.0)],
            vec![Atom::new(0.0, 1.0)],
        )
        .unwrap();
        assert_eq!(d.xi_distribution(), ScalarDistribution::point_mass_at_zero());
    }

    #[test]
    fn composed_rejects_boundary_priors() {
        assert!(DiversityModel::composed(
            vec![Atom::new(0.0, 1.0)],
            vec![Atom::new(0.0, 1.0)]
        )
        .is_err());
        assert!(DiversityModel::composed(
            vec![Atom::new(1.0, 1.0)],
            vec![Atom::new(0.0, 1.0)]
        )
        .is_err());
    }

    #[test]
    fn boundedness_classification() {
        let bounded = [
            DiversityModel::degenerate(),
            DiversityModel::atom_noise(vec![Atom::new(-0.3, 0.5), Atom::new(0.3, 0.5)]).unwrap(),
            DiversityModel::composed(
                vec![Atom::new(0.25, 0.5), Atom::new(0.75, 0.5)],
                vec![Atom::new(0.0, 1.0)],
            )
            .unwrap(),
        ];
        for d in &bounded {
            assert!(d.xi_distribution().essential_bounds().is_bounded());
        }
        let unbounded = DiversityModel::gaussian_noise(0.7).unwrap();
        assert!(!unbounded.xi_distribution().essential_bounds().is_bounded());
    }

    #[test]
    fn gaussian_sample_variance() {
        let d = DiversityModel::gaussian_noise(0.7).unwrap();
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<f64> = (0..n).map(|_| d.sample_xi(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        // chi-square 4-sigma band at 1e6 draws
        assert_abs_diff_eq!(var, 0.7, epsilon = 0.01);
        assert_abs_diff_eq!(mean, 0.0, epsilon = 0.005);
    }

    #[test]
    fn composed_sample_law() {
        let d = DiversityModel::composed(
            vec![Atom::new(0.25, 0.5), Atom::new(0.75, 0.5)],
            vec![Atom::new(0.0, 1.0)],
        )
        .unwrap();
        let a = 3.0_f64.ln();
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut hits = 0usize;
        for _ in 0..n {
            let x = d.sample_xi(&mut rng);
            assert!(x == a || x == -a, "unexpected draw {x}");
            if x == a {
                hits += 1;
            }
        }
        assert_abs_diff_eq!(hits as f64 / n as f64, 0.5, epsilon = 0.002);
    }

    #[test]
    fn sample_moments_match_law() {
        let models = [
            DiversityModel::atom_noise(vec![Atom::new(-1.0, 0.25), Atom::new(0.5, 0.75)]).unwrap(),
            DiversityModel::composed(
                vec![Atom::new(0.2, 0.3), Atom::new(0.6, 0.7)],
                vec![Atom::new(-0.1, 0.5), Atom::new(0.4, 0.5)],
            )
            .unwrap(),
        ];
        let n = 1_000_000;
        for d in &models {
            let law = d.xi_distribution();
            let (law_mean, law_var) = match &law {
                ScalarDistribution::Atoms(atoms) => {
                    let m: f64 = atoms.iter().map(|a| a.mass * a.value).sum();
                    let v: f64 = atoms.iter().map(|a| a.mass * (a.value - m).powi(2)).sum();
                    (m, v)
                }
                _ => unreachable!(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let draws: Vec<f64> = (0..n).map(|_| d.sample_xi(&mut rng)).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var =
                draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
            let mean_band = 4.0 * (law_var / n as f64).sqrt();
            assert_abs_diff_eq!(mean, law_mean, epsilon = mean_band);
            assert_abs_diff_eq!(var, law_var, epsilon = 0.01);
        }
    }
}
