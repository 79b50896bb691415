//! Cross-module property suite behind the `validate` subcommand.
//!
//! Each check reruns one of the invariants the engine is built on, at a
//! scale configurable from the command line, and reports pass/fail with a
//! short diagnostic.

use herdsim_core::{
    build_tau_graph, counterfactual_cascade_check, estimate_learning_curve, exact_learning_curve,
    markov_transient_curve, run_realization, run_rng, BeliefEngine, DiversityModel, RunConfig,
    SignalModel, TrajectoryRecord, World,
};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct ValidateOpts {
    pub runs: u64,
    pub seed: u64,
}

impl Default for ValidateOpts {
    fn default() -> Self {
        ValidateOpts {
            runs: 20_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Structural invariant of a recorded trajectory: once a cascade onset is
/// recorded, every later decision equals the onset decision.
pub fn check_trajectory_permanence(traj: &TrajectoryRecord) -> Result<(), String> {
    if let Some(k) = traj.cascade_onset {
        let tail = &traj.decisions[k - 1..];
        if let Some(first) = tail.first() {
            if !tail.iter().all(|x| x == first) {
                return Err(format!(
                    "decisions change after onset at agent {k}: {:?}",
                    &traj.decisions[k.saturating_sub(2)..]
                ));
            }
        }
    }
    Ok(())
}

/// Replay the recorded decisions through the belief recursion and confirm
/// the threshold freezes at the onset.
pub fn check_tau_frozen_after_onset(
    engine: &BeliefEngine,
    traj: &TrajectoryRecord,
) -> Result<(), String> {
    let Some(k) = traj.cascade_onset else {
        return Ok(());
    };
    let mut belief = engine.initial_belief();
    let mut frozen_tau = None;
    for (i, &x) in traj.decisions.iter().enumerate() {
        if i + 1 == k {
            frozen_tau = Some(belief.tau);
            if !belief.in_cascade {
                return Err(format!("recorded onset {k} is not a cascade state"));
            }
        }
        belief = engine.update(&belief, x);
        if let Some(tau) = frozen_tau {
            if belief.tau != tau || !belief.in_cascade {
                return Err(format!(
                    "threshold moved after onset: {tau} -> {} at agent {}",
                    belief.tau,
                    i + 1
                ));
            }
        }
    }
    Ok(())
}

fn scenario_matrix() -> Vec<(&'static str, SignalModel, f64)> {
    let mut out = Vec::new();
    for sigma2 in [0.0, 0.01, 0.1, 0.5, 0.7] {
        out.push((
            "binary",
            SignalModel::binary_symmetric(0.25).unwrap(),
            sigma2,
        ));
        out.push((
            "gaussian",
            SignalModel::symmetric_gaussian(1.0, 4.0).unwrap(),
            sigma2,
        ));
    }
    out
}

fn oracle_vs_monte_carlo(opts: &ValidateOpts) -> PropertyReport {
    let n_agents = 12;
    let mut worst: f64 = 0.0;
    let mut inside_2se = 0usize;
    let mut total = 0usize;
    let mut failed = None;
    for (name, signal, sigma2) in scenario_matrix() {
        let diversity = DiversityModel::gaussian_noise(sigma2).unwrap();
        let engine = BeliefEngine::new(&signal, &diversity).unwrap();
        let exact = exact_learning_curve(&engine, n_agents, 0.5).unwrap();
        let cfg = RunConfig {
            signal,
            diversity,
            n_agents,
            n_runs: opts.runs,
            prior_p1: 0.5,
            master_seed: opts.seed,
        };
        let mc = estimate_learning_curve(&cfg).unwrap();
        for (stat, acc) in mc.agents.iter().zip(&exact) {
            let exact_err = 1.0 - acc;
            let se = (exact_err * (1.0 - exact_err) / opts.runs as f64)
                .sqrt()
                .max(f64::MIN_POSITIVE);
            let dev = (stat.error_rate() - exact_err).abs() / se;
            worst = worst.max(dev);
            total += 1;
            if dev <= 2.0 {
                inside_2se += 1;
            }
            if dev > 4.0 && failed.is_none() {
                failed = Some(format!(
                    "{name} sigma2={sigma2} agent {}: |{:.5} - {exact_err:.5}| = {dev:.1} se",
                    stat.agent,
                    stat.error_rate()
                ));
            }
        }
    }
    let frac_2se = inside_2se as f64 / total as f64;
    let passed = failed.is_none() && frac_2se >= 0.95;
    PropertyReport {
        name: "oracle-vs-monte-carlo",
        passed,
        detail: failed.unwrap_or(format!(
            "worst deviation {worst:.2} se, {:.1}% of agents inside 2 se",
            100.0 * frac_2se
        )),
    }
}

fn markov_vs_enumeration() -> PropertyReport {
    let engine = BeliefEngine::new(
        &SignalModel::binary_symmetric(0.25).unwrap(),
        &DiversityModel::degenerate(),
    )
    .unwrap();
    let graph = build_tau_graph(&engine, 1024).unwrap();
    let markov = markov_transient_curve(&graph, 14, 0.5);
    let exact = exact_learning_curve(&engine, 14, 0.5).unwrap();
    let worst = markov
        .iter()
        .zip(&exact)
        .map(|(m, x)| (m - x).abs())
        .fold(0.0_f64, f64::max);
    PropertyReport {
        name: "markov-vs-enumeration",
        passed: worst <= 1e-10,
        detail: format!("max |transient - enumeration| = {worst:.2e} over 14 agents"),
    }
}

fn cascade_permanence(opts: &ValidateOpts) -> PropertyReport {
    let signal = SignalModel::binary_symmetric(0.25).unwrap();
    let diversity = DiversityModel::degenerate();
    let engine = BeliefEngine::new(&signal, &diversity).unwrap();
    let runs = opts.runs.min(5_000);
    let mut onsets = 0u64;
    for run in 0..runs {
        let mut rng = run_rng(opts.seed, run);
        let world = World::from_bit(rng.random::<f64>() < 0.5);
        let traj = run_realization(&engine, &signal, &diversity, 100, world, &mut rng);
        if traj.cascade_onset.is_some() {
            onsets += 1;
        }
        if let Err(msg) = check_trajectory_permanence(&traj)
            .and_then(|_| check_tau_frozen_after_onset(&engine, &traj))
        {
            return PropertyReport {
                name: "cascade-permanence",
                passed: false,
                detail: format!("run {run}: {msg}"),
            };
        }
    }
    PropertyReport {
        name: "cascade-permanence",
        passed: true,
        detail: format!("{onsets}/{runs} runs cascaded, all tails constant and thresholds frozen"),
    }
}

fn counterfactual_cascades(opts: &ValidateOpts) -> PropertyReport {
    let signal = SignalModel::binary_symmetric(0.25).unwrap();
    let diversity = DiversityModel::degenerate();
    let engine = BeliefEngine::new(&signal, &diversity).unwrap();
    let wanted = 300u64;
    let replays = 5u64;
    let mut checked = 0u64;
    let mut run = 0u64;
    while checked < wanted && run < wanted * 10 {
        let mut rng = run_rng(opts.seed ^ 0x5eed, run);
        let world = World::from_bit(rng.random::<f64>() < 0.5);
        let traj = run_realization(&engine, &signal, &diversity, 80, world, &mut rng);
        run += 1;
        if traj.cascade_onset.is_none() {
            continue;
        }
        checked += 1;
        for replay in 0..replays {
            let mut replay_rng = run_rng(opts.seed ^ 0xc0ffee, run * replays + replay);
            match counterfactual_cascade_check(&engine, &signal, &diversity, &traj, &mut replay_rng)
            {
                Ok(true) => {}
                Ok(false) => {
                    return PropertyReport {
                        name: "counterfactual-cascade",
                        passed: false,
                        detail: format!(
                            "run {run}: replay {replay} changed a post-onset decision"
                        ),
                    }
                }
                Err(err) => {
                    return PropertyReport {
                        name: "counterfactual-cascade",
                        passed: false,
                        detail: format!("run {run}: {err}"),
                    }
                }
            }
        }
    }
    PropertyReport {
        name: "counterfactual-cascade",
        passed: checked >= wanted,
        detail: format!("{checked} cascaded runs x {replays} replays all reproduced"),
    }
}

fn no_cascade_under_unbounded_diversity(opts: &ValidateOpts) -> PropertyReport {
    let mut detail = String::new();
    for (name, signal) in [
        ("binary", SignalModel::binary_symmetric(0.25).unwrap()),
        (
            "gaussian",
            SignalModel::symmetric_gaussian(1.0, 4.0).unwrap(),
        ),
    ] {
        let cfg = RunConfig {
            signal,
            diversity: DiversityModel::gaussian_noise(0.5).unwrap(),
            n_agents: 200,
            n_runs: opts.runs,
            prior_p1: 0.5,
            master_seed: opts.seed,
        };
        let curve = estimate_learning_curve(&cfg).unwrap();
        if curve.cascade_runs > 0 {
            return PropertyReport {
                name: "no-cascade-under-unbounded-diversity",
                passed: false,
                detail: format!(
                    "{name}: {} of {} runs recorded a cascade onset",
                    curve.cascade_runs, opts.runs
                ),
            };
        }
        detail.push_str(&format!("{name}: 0/{} onsets  ", opts.runs));
    }
    PropertyReport {
        name: "no-cascade-under-unbounded-diversity",
        passed: true,
        detail: detail.trim_end().to_string(),
    }
}

/// Run every property check and collect the reports.
pub fn run_validation_suite(opts: &ValidateOpts) -> Vec<PropertyReport> {
    vec![
        oracle_vs_monte_carlo(opts),
        markov_vs_enumeration(),
        cascade_permanence(opts),
        counterfactual_cascades(opts),
        no_cascade_under_unbounded_diversity(opts),
    ]
}
