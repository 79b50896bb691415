//! Public-belief threshold recursion, response probabilities, and the
//! cascade predicate.
//!
//! An agent facing threshold `tau` decides 1 iff its private LLR plus its
//! diversity offset exceeds `tau` (fair coin on an exact tie). Conditioned
//! on the world, the probability of deciding 0 is therefore the mid-point
//! CDF of `LLR + xi` at `tau`; observers who know the model families can
//! update `tau` from each published decision by the log-ratio of those
//! response probabilities. The threshold is a sufficient statistic of the
//! whole decision history: nothing else is carried between agents.

use std::cmp::Ordering;

use rand::Rng;

use crate::dist::{tie_cmp, Bounds, ScalarDistribution};
use crate::diversity::DiversityModel;
use crate::error::Result;
use crate::signal::{SignalModel, World};

/// Precomputed response laws `F_w` (the law of `LLR + xi` under each world)
/// together with their shared essential support.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefEngine {
    response: [ScalarDistribution; 2],
    bounds: Bounds,
}

/// The social state carried between agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublicBelief {
    /// Decision threshold faced by agent `step`; minus the log-likelihood
    /// ratio of the observed history.
    pub tau: f64,
    /// Index of the next agent to decide, starting at 1.
    pub step: u32,
    /// Whether the decision law at `tau` is degenerate under both worlds.
    /// Once set it never reverts.
    pub in_cascade: bool,
}

impl BeliefEngine {
    /// Build the engine for a signal/diversity pair by convolving the LLR
    /// law with the diversity law under each world.
    pub fn new(signal: &SignalModel, diversity: &DiversityModel) -> Result<Self> {
        let xi = diversity.xi_distribution();
        let f0 = signal
            .llr_distribution(World::Zero)
            .convolve_with_noise(&xi)?;
        let f1 = signal
            .llr_distribution(World::One)
            .convolve_with_noise(&xi)?;
        let bounds = f0.essential_bounds();
        debug_assert_eq!(
            bounds,
            f1.essential_bounds(),
            "response laws must share their support"
        );
        Ok(BeliefEngine {
            response: [f0, f1],
            bounds,
        })
    }

    /// The response law under the given world.
    pub fn response_distribution(&self, world: World) -> &ScalarDistribution {
        &self.response[world.index()]
    }

    /// Shared essential support of the response laws.
    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Belief faced by the first agent: empty history, `tau = 0`.
    pub fn initial_belief(&self) -> PublicBelief {
        PublicBelief {
            tau: 0.0,
            step: 1,
            in_cascade: self.is_cascade(0.0),
        }
    }

    /// Probability that an agent facing `tau` decides 0 under world `w`,
    /// marginalizing over its signal, its diversity draw, and the tie coin.
    pub fn response_prob(&self, world: World, tau: f64) -> f64 {
        self.response[world.index()].mid_cdf(tau)
    }

    /// Whether a threshold makes the decision law degenerate under both
    /// worlds, i.e. the next agent's decision carries no signal information.
    ///
    /// Equivalent to both response probabilities lying in {0, 1}: that
    /// happens exactly when `tau` falls strictly outside the shared support.
    /// Testing the support keeps the predicate identically false for
    /// unbounded (Gaussian-part) laws even where their CDF saturates in
    /// floating point, and the tie window keeps it consistent with
    /// [`response_prob`](Self::response_prob).
    pub fn is_cascade(&self, tau: f64) -> bool {
        tie_cmp(tau, self.bounds.lower) == Ordering::Less
            || tie_cmp(tau, self.bounds.upper) == Ordering::Greater
    }

    /// The constant decision taken inside a cascade at `tau`, if any.
    pub fn cascade_decision(&self, tau: f64) -> Option<bool> {
        if tie_cmp(tau, self.bounds.lower) == Ordering::Less {
            // all signal mass above the threshold: everyone decides 1
            Some(true)
        } else if tie_cmp(tau, self.bounds.upper) == Ordering::Greater {
            Some(false)
        } else {
            None
        }
    }

    /// One agent's decision given its private LLR, diversity draw, and the
    /// current threshold; fair coin on a tie.
    pub fn decide<R: Rng + ?Sized>(&self, llr: f64, xi: f64, tau: f64, rng: &mut R) -> bool {
        match tie_cmp(llr + xi, tau) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => rng.random::<bool>(),
        }
    }

    /// Advance the public belief after observing one decision.
    ///
    /// Inside a cascade the observed decision is fully predictable, so the
    /// log-likelihood increment is identically zero and `tau` is frozen
    /// (evaluating the ratio there would divide rounding noise by rounding
    /// noise and could spuriously reopen the cascade).
    pub fn update(&self, belief: &PublicBelief, decision: bool) -> PublicBelief {
        if belief.in_cascade {
            return PublicBelief {
                tau: belief.tau,
                step: belief.step + 1,
                in_cascade: true,
            };
        }
        let f1 = self.response_prob(World::One, belief.tau);
        let f0 = self.response_prob(World::Zero, belief.tau);
        let (num, den) = if decision {
            (1.0 - f1, 1.0 - f0)
        } else {
            (f1, f0)
        };
        assert!(
            num > 0.0 && den > 0.0,
            "degenerate response probabilities ({num}, {den}) at tau = {} outside a cascade: \
             response law construction bug",
            belief.tau
        );
        let tau = belief.tau - (num / den).ln();
        PublicBelief {
            tau,
            step: belief.step + 1,
            in_cascade: self.is_cascade(tau),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Atom;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binary_engine() -> BeliefEngine {
        BeliefEngine::new(
            &SignalModel::binary_symmetric(0.25).unwrap(),
            &DiversityModel::degenerate(),
        )
        .unwrap()
    }

    fn gaussian_engine() -> BeliefEngine {
        BeliefEngine::new(
            &SignalModel::symmetric_gaussian(1.0, 4.0).unwrap(),
            &DiversityModel::degenerate(),
        )
        .unwrap()
    }

    #[test]
    fn engine_construction_variants() {
        let a = 3.0_f64.ln();
        let e = binary_engine();
        match e.response_distribution(World::One) {
            ScalarDistribution::Atoms(atoms) => {
                assert_abs_diff_eq!(atoms[0].value, -a, epsilon = 1e-15);
                assert_eq!(atoms[0].mass, 0.25);
                assert_eq!(atoms[1].mass, 0.75);
            }
            other => panic!("expected atoms, got {other:?}"),
        }
        assert_abs_diff_eq!(e.bounds().lower, -a, epsilon = 1e-15);
        assert_abs_diff_eq!(e.bounds().upper, a, epsilon = 1e-15);

        let noisy = BeliefEngine::new(
            &SignalModel::binary_symmetric(0.25).unwrap(),
            &DiversityModel::gaussian_noise(0.5).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            noisy.response_distribution(World::One),
            ScalarDistribution::GaussianMixture(_)
        ));
        assert!(!noisy.bounds().is_bounded());

        let g = BeliefEngine::new(
            &SignalModel::symmetric_gaussian(1.0, 4.0).unwrap(),
            &DiversityModel::gaussian_noise(0.1).unwrap(),
        )
        .unwrap();
        assert_eq!(
            *g.response_distribution(World::One),
            ScalarDistribution::Gaussian {
                mean: 0.5,
                variance: 1.1
            }
        );
    }

    #[test]
    fn initial_belief_state() {
        for e in [binary_engine(), gaussian_engine()] {
            let b = e.initial_belief();
            assert_eq!(b.tau, 0.0);
            assert_eq!(b.step, 1);
            assert!(!b.in_cascade);
        }
    }

    #[test]
    fn response_prob_examples() {
        let e = binary_engine();
        let a = 3.0_f64.ln();
        assert_eq!(e.response_prob(World::One, 0.0), 0.25);
        assert_eq!(e.response_prob(World::One, a), 0.625);
        assert_eq!(e.response_prob(World::Zero, a), 0.875);
        let g = gaussian_engine();
        assert_abs_diff_eq!(
            g.response_prob(World::One, 0.0),
            crate::dist::std_normal_cdf(-0.5),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(g.response_prob(World::One, 0.0), 0.3085, epsilon = 1e-4);
    }

    #[test]
    fn update_hand_recursion() {
        let e = binary_engine();
        let a = 3.0_f64.ln();
        let b0 = e.initial_belief();

        // observing 0 at tau = 0 moves the threshold to +ln 3
        let b1 = e.update(&b0, false);
        assert_abs_diff_eq!(b1.tau, a, epsilon = 1e-12);
        assert_eq!(b1.step, 2);
        assert!(!b1.in_cascade);

        // observing 1 back at +ln 3 returns to 0 (mid-rule masses 3/8, 1/8)
        let b2 = e.update(&b1, true);
        assert_abs_diff_eq!(b2.tau, 0.0, epsilon = 1e-12);
        assert!(!b2.in_cascade);

        // observing 0 at +ln 3 overshoots the support: cascade
        let b2c = e.update(&b1, false);
        assert_abs_diff_eq!(b2c.tau, (21.0_f64 / 5.0).ln(), epsilon = 1e-12);
        assert!(b2c.in_cascade);
        assert_eq!(e.cascade_decision(b2c.tau), Some(false));
    }

    #[test]
    fn update_is_frozen_inside_cascade() {
        let e = binary_engine();
        let mut b = e.initial_belief();
        b = e.update(&b, false);
        b = e.update(&b, false);
        assert!(b.in_cascade);
        let tau = b.tau;
        for decision in [true, false, true, true, false] {
            b = e.update(&b, decision);
            assert_eq!(b.tau, tau);
            assert!(b.in_cascade);
        }
    }

    #[test]
    fn cascade_predicate_examples() {
        let e = binary_engine();
        let a = 3.0_f64.ln();
        assert!(e.is_cascade(2.0 * a));
        assert!(!e.is_cascade(a));
        assert!(!e.is_cascade(-a));
        assert!(!e.is_cascade(0.0));
        assert!(e.is_cascade(-2.0 * a));
        assert_eq!(e.cascade_decision(-2.0 * a), Some(true));
        assert_eq!(e.cascade_decision(0.0), None);
    }

    #[test]
    fn no_cascade_under_gaussian_diversity() {
        let e = BeliefEngine::new(
            &SignalModel::binary_symmetric(0.25).unwrap(),
            &DiversityModel::gaussian_noise(0.5).unwrap(),
        )
        .unwrap();
        let mut tau = -1e6;
        while tau <= 1e6 {
            assert!(!e.is_cascade(tau));
            tau += 9.7e4;
        }
        assert!(!e.is_cascade(1e6));
    }

    #[test]
    fn decide_examples() {
        let e = binary_engine();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = 3.0_f64.ln();
        assert!(!e.decide(0.2, 0.0, 0.5, &mut rng));
        assert!(e.decide(a, 0.0, -a, &mut rng));
        // exact tie: fair coin
        let n = 100_000;
        let ones = (0..n).filter(|_| e.decide(a, 0.0, a, &mut rng)).count();
        assert_abs_diff_eq!(ones as f64 / n as f64, 0.5, epsilon = 0.006);
    }

    #[test]
    fn decide_ties_snap_like_the_mid_cdf() {
        let e = binary_engine();
        let a = 3.0_f64.ln();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        // threshold a few ulps off the atom must still be treated as a tie
        let ones = (0..n)
            .filter(|_| e.decide(a, 0.0, a + 3e-16, &mut rng))
            .count();
        assert_abs_diff_eq!(ones as f64 / n as f64, 0.5, epsilon = 0.006);
    }

    #[test]
    fn stochastic_dominance_of_response_laws() {
        for e in [
            binary_engine(),
            gaussian_engine(),
            BeliefEngine::new(
                &SignalModel::binary_symmetric(0.25).unwrap(),
                &DiversityModel::gaussian_noise(0.7).unwrap(),
            )
            .unwrap(),
        ] {
            let mut z = -6.0;
            while z <= 6.0 {
                assert!(
                    e.response_prob(World::One, z) <= e.response_prob(World::Zero, z) + 1e-14
                );
                z += 0.13;
            }
        }
    }

    /// Likelihood-ratio identity behind the belief martingale: for any tau,
    /// sum over decisions of P_0(x|tau) * (P_1(x|tau) / P_0(x|tau)) is 1.
    #[test]
    fn update_increments_form_a_martingale() {
        let engines = [
            binary_engine(),
            gaussian_engine(),
            BeliefEngine::new(
                &SignalModel::binary_symmetric(0.25).unwrap(),
                &DiversityModel::gaussian_noise(0.5).unwrap(),
            )
            .unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for e in &engines {
            for _ in 0..64 {
                // stay inside every engine's support so no ratio is 0/0
                let tau = -1.0 + 2.0 * rng.random::<f64>();
                let f0 = e.response_prob(World::Zero, tau);
                let f1 = e.response_prob(World::One, tau);
                let total = f0 * (f1 / f0) + (1.0 - f0) * ((1.0 - f1) / (1.0 - f0));
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn engine_with_composed_diversity() {
        // prior-belief atoms at 0.25/0.75 shift the binary LLR by ±ln 3
        let e = BeliefEngine::new(
            &SignalModel::binary_symmetric(0.25).unwrap(),
            &DiversityModel::composed(
                vec![Atom::new(0.25, 0.5), Atom::new(0.75, 0.5)],
                vec![Atom::new(0.0, 1.0)],
            )
            .unwrap(),
        )
        .unwrap();
        let a = 3.0_f64.ln();
        match e.response_distribution(World::One) {
            ScalarDistribution::Atoms(atoms) => {
                assert_eq!(atoms.len(), 3);
                assert_abs_diff_eq!(atoms[0].value, -2.0 * a, epsilon = 1e-12);
                assert_abs_diff_eq!(atoms[1].value, 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(atoms[2].value, 2.0 * a, epsilon = 1e-12);
            }
            other => panic!("expected atoms, got {other:?}"),
        }
        assert_abs_diff_eq!(e.bounds().upper, 2.0 * a, epsilon = 1e-12);
    }
}
