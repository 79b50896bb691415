//! Sequential Bayesian social learning with heterogeneous agents.
//!
//! A hidden binary world state drives conditionally i.i.d. private signals.
//! Agents act in sequence; each one observes its own signal plus the
//! decisions of everyone before it and picks the action that maximizes its
//! expected utility. Heterogeneity in preferences and prior beliefs enters
//! the decision rule as an additive noise term on the private
//! log-likelihood ratio, so the whole process reduces to a threshold test
//! against a public-belief threshold that is a sufficient statistic of the
//! decision history.
//!
//! The crate provides:
//!
//! - exact one-dimensional distribution arithmetic for the decision-signal
//!   laws ([`dist`]): mid-point CDFs, convolution, essential support bounds;
//! - the signal and diversity model families ([`signal`], [`diversity`]);
//! - the public-belief threshold recursion, response probabilities, and the
//!   cascade predicate ([`belief`]);
//! - deterministic parallel Monte Carlo over full realizations ([`sim`]);
//! - two independent exact solvers used as ground truth: full path
//!   enumeration and an absorbing Markov chain over reachable thresholds
//!   ([`oracle`]).

pub mod belief;
pub mod dist;
pub mod diversity;
pub mod error;
pub mod oracle;
pub mod signal;
pub mod sim;

pub use belief::{BeliefEngine, PublicBelief};
pub use dist::{std_normal_cdf, Atom, Bounds, MixtureComponent, ScalarDistribution};
pub use diversity::DiversityModel;
pub use error::{Error, Result};
pub use oracle::{
    absorption_probabilities, build_tau_graph, exact_learning_curve, markov_absorption_accuracy,
    markov_transient_curve, TauStateGraph, TauTransition,
};
pub use signal::{SignalModel, World};
pub use sim::{
    counterfactual_cascade_check, estimate_learning_curve, replay_from, run_realization, run_rng,
    AgentStat, LearningCurve, RunConfig, TrajectoryRecord,
};
