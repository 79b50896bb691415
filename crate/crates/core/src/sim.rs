//! Monte Carlo over realizations of the full sequential process.
//!
//! Realizations are embarrassingly parallel. Every run owns a random stream
//! derived from `(master_seed, run_index)`, and aggregation adds integer
//! per-agent counters, so the output is bit-identical for any worker count
//! or scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::belief::BeliefEngine;
use crate::diversity::DiversityModel;
use crate::error::{Error, Result};
use crate::signal::{SignalModel, World};

/// Full configuration of a Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub signal: SignalModel,
    pub diversity: DiversityModel,
    pub n_agents: usize,
    pub n_runs: u64,
    /// True prior `P(W = 1)`; the world is resampled per run.
    pub prior_p1: f64,
    pub master_seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 1 {
            return Err(Error::InvalidConfig("n_agents must be at least 1".into()));
        }
        if self.n_runs < 1 {
            return Err(Error::InvalidConfig("n_runs must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.prior_p1) {
            return Err(Error::InvalidConfig(format!(
                "prior_p1 {} must lie in [0, 1]",
                self.prior_p1
            )));
        }
        Ok(())
    }
}

/// One recorded realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub world: World,
    /// Decision bits, agent 1 first.
    pub decisions: Vec<bool>,
    /// 1-based index of the first agent whose belief state was already in a
    /// cascade, if any.
    pub cascade_onset: Option<usize>,
    /// Threshold after the last decision; frozen from the onset onwards.
    pub final_tau: f64,
}

/// Per-agent accuracy counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentStat {
    /// 1-based agent index.
    pub agent: usize,
    pub correct: u64,
    pub runs: u64,
}

impl AgentStat {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.runs as f64
    }

    pub fn error_rate(&self) -> f64 {
        1.0 - self.accuracy()
    }

    /// Binomial standard error of the error rate (equivalently, of the
    /// accuracy).
    pub fn std_error(&self) -> f64 {
        let p = self.error_rate();
        (p * (1.0 - p) / self.runs as f64).sqrt()
    }
}

/// Aggregated learning curve plus cascade diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub agents: Vec<AgentStat>,
    /// Number of runs in which a cascade onset was recorded.
    pub cascade_runs: u64,
}

/// The random stream owned by one run.
pub fn run_rng(master_seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run_index);
    rng
}

/// Simulate one realization under a fixed world.
///
/// Each agent in turn draws its LLR and diversity offset, decides against
/// the current threshold, and the threshold is updated from the published
/// decision. From a cascade onset onwards the decision is constant and the
/// threshold frozen, so the remaining decisions are filled without sampling.
pub fn run_realization<R: Rng + ?Sized>(
    engine: &BeliefEngine,
    signal: &SignalModel,
    diversity: &DiversityModel,
    n_agents: usize,
    world: World,
    rng: &mut R,
) -> TrajectoryRecord {
    let mut belief = engine.initial_belief();
    let mut decisions = Vec::with_capacity(n_agents);
    let mut cascade_onset = None;
    for agent in 1..=n_agents {
        if belief.in_cascade {
            cascade_onset = Some(agent);
            let fixed = engine
                .cascade_decision(belief.tau)
                .expect("in_cascade implies a constant decision");
            decisions.resize(n_agents, fixed);
            break;
        }
        let llr = signal.sample_llr(world, rng);
        let xi = diversity.sample_xi(rng);
        let x = engine.decide(llr, xi, belief.tau, rng);
        decisions.push(x);
        belief = engine.update(&belief, x);
    }
    TrajectoryRecord {
        world,
        decisions,
        cascade_onset,
        final_tau: belief.tau,
    }
}

/// Replay a recorded run from `from_step` (1-based) with freshly sampled
/// signals, diversity draws, and tie coins, holding the earlier decision
/// history fixed. Returns the regenerated decisions for steps
/// `from_step..=n`.
///
/// Unlike [`run_realization`] this samples through cascade states instead of
/// short-circuiting them: its purpose is to test whether the recorded
/// decisions actually depended on the private draws.
pub fn replay_from<R: Rng + ?Sized>(
    engine: &BeliefEngine,
    signal: &SignalModel,
    diversity: &DiversityModel,
    traj: &TrajectoryRecord,
    from_step: usize,
    rng: &mut R,
) -> Vec<bool> {
    assert!(from_step >= 1 && from_step <= traj.decisions.len());
    let mut belief = engine.initial_belief();
    for &x in &traj.decisions[..from_step - 1] {
        belief = engine.update(&belief, x);
    }
    let mut out = Vec::with_capacity(traj.decisions.len() - (from_step - 1));
    for _ in from_step..=traj.decisions.len() {
        let llr = signal.sample_llr(traj.world, rng);
        let xi = diversity.sample_xi(rng);
        let x = engine.decide(llr, xi, belief.tau, rng);
        out.push(x);
        belief = engine.update(&belief, x);
    }
    out
}

/// Verify that a recorded cascade is insensitive to the private draws:
/// resample everything from the onset (holding the pre-onset history fixed)
/// and check that every post-onset decision reproduces the record.
pub fn counterfactual_cascade_check<R: Rng + ?Sized>(
    engine: &BeliefEngine,
    signal: &SignalModel,
    diversity: &DiversityModel,
    traj: &TrajectoryRecord,
    rng: &mut R,
) -> Result<bool> {
    let onset = traj.cascade_onset.ok_or_else(|| {
        Error::Precondition("counterfactual check needs a trajectory with a cascade onset".into())
    })?;
    let replayed = replay_from(engine, signal, diversity, traj, onset, rng);
    Ok(replayed == traj.decisions[onset - 1..])
}

/// Run the full Monte Carlo experiment and aggregate per-agent accuracy.
///
/// The world is drawn per run from `Bernoulli(prior_p1)` out of that run's
/// own stream. Identical configurations produce identical curves at any
/// parallelism degree.
pub fn estimate_learning_curve(cfg: &RunConfig) -> Result<LearningCurve> {
    cfg.validate()?;
    let engine = BeliefEngine::new(&cfg.signal, &cfg.diversity)?;
    let n = cfg.n_agents;
    let (correct, cascade_runs) = (0..cfg.n_runs)
        .into_par_iter()
        .fold(
            || (vec![0u64; n], 0u64),
            |(mut correct, mut cascades), run_index| {
                let mut rng = run_rng(cfg.master_seed, run_index);
                let world = World::from_bit(rng.random::<f64>() < cfg.prior_p1);
                let traj =
                    run_realization(&engine, &cfg.signal, &cfg.diversity, n, world, &mut rng);
                for (slot, &x) in correct.iter_mut().zip(&traj.decisions) {
                    *slot += u64::from(world.matches_decision(x));
                }
                cascades += u64::from(traj.cascade_onset.is_some());
                (correct, cascades)
            },
        )
        .reduce(
            || (vec![0u64; n], 0u64),
            |(mut a, ca), (b, cb)| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                (a, ca + cb)
            },
        );
    let agents = correct
        .into_iter()
        .enumerate()
        .map(|(i, c)| AgentStat {
            agent: i + 1,
            correct: c,
            runs: cfg.n_runs,
        })
        .collect();
    Ok(LearningCurve {
        agents,
        cascade_runs,
    })
}
