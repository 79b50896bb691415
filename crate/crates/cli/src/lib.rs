//! Command-line front end: experiment configuration, diversity sweeps, CSV
//! emission, and the validation suite.

pub mod csv_out;
pub mod validate;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use herdsim_core::{
    build_tau_graph, estimate_learning_curve, exact_learning_curve, markov_absorption_accuracy,
    markov_transient_curve, BeliefEngine, DiversityModel, RunConfig, SignalModel,
};

use validate::ValidateOpts;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameter ranges; exits with code 2.
    Config(String),
    /// Failures while executing a well-formed request; exits with code 1.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<herdsim_core::Error> for CliError {
    fn from(err: herdsim_core::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "herdsim",
    version,
    about = "Sequential social learning simulator: learning curves, diversity sweeps, and exact oracles"
)]
struct Cli {
    /// Worker threads for the Monte Carlo engine (affects speed only, never
    /// results)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo learning curves, one CSV column per diversity level
    Curve(CurveArgs),
    /// Accuracy of selected agents across a diversity grid
    Sweep(SweepArgs),
    /// Exact per-agent error rates by path enumeration
    Oracle(OracleArgs),
    /// Exact transient curve and absorption accuracy via the threshold chain
    Markov(MarkovArgs),
    /// Cross-module property suite
    Validate(ValidateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModelKind {
    /// Binary symmetric signal
    Binary,
    /// Gaussian signal with world-dependent sign
    Gaussian,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Signal model family
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Crossover probability of the binary signal
    #[arg(long, default_value_t = 0.25)]
    crossover: f64,
    /// Mean of the gaussian signal (world flips its sign)
    #[arg(long, default_value_t = 1.0)]
    mean: f64,
    /// Variance of the gaussian signal
    #[arg(long, default_value_t = 4.0)]
    variance: f64,
}

impl ModelArgs {
    fn build(&self) -> Result<SignalModel, CliError> {
        match self.model {
            ModelKind::Binary => Ok(SignalModel::binary_symmetric(self.crossover)?),
            ModelKind::Gaussian => Ok(SignalModel::symmetric_gaussian(self.mean, self.variance)?),
        }
    }
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of agents in the decision sequence
    #[arg(long)]
    agents: usize,
    /// Monte Carlo realizations per diversity level
    #[arg(long, default_value_t = 100_000)]
    runs: u64,
    /// Comma-separated diversity variances, one CSV column each
    #[arg(long)]
    diversity: String,
    /// Master seed; every run derives its own stream from (seed, run index)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// True prior P(W = 1)
    #[arg(long, default_value_t = 0.5)]
    prior: f64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated agent indices reported as CSV columns
    #[arg(long)]
    agents: String,
    /// Diversity grid start:stop:step, endpoints inclusive
    #[arg(long = "diversity-grid")]
    diversity_grid: String,
    /// Monte Carlo realizations per grid value
    #[arg(long, default_value_t = 100_000)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    prior: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of agents (path enumeration caps at 24)
    #[arg(long)]
    agents: usize,
    /// Comma-separated diversity variances, one CSV column each
    #[arg(long, default_value = "0")]
    diversity: String,
    #[arg(long, default_value_t = 0.5)]
    prior: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MarkovArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Transient curve length
    #[arg(long)]
    agents: usize,
    /// Comma-separated diversity variances (finite-atom laws only, so 0 or
    /// composed/atomic cases)
    #[arg(long, default_value = "0")]
    diversity: String,
    #[arg(long, default_value_t = 0.5)]
    prior: f64,
    /// State cap for the threshold closure
    #[arg(long, default_value_t = 4096)]
    max_states: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Monte Carlo realizations per property check
    #[arg(long, default_value_t = 20_000)]
    runs: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Parse flags, execute, and return the process exit code: 0 on success, 2
/// on configuration errors, 1 on runtime failures.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    0
                }
                _ => {
                    eprint!("{err}");
                    2
                }
            };
        }
    };
    let run = || match cli.command {
        Command::Curve(args) => cmd_curve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Markov(args) => cmd_markov(args),
        Command::Validate(args) => cmd_validate(args),
    };
    let outcome = match cli.threads {
        Some(threads) => {
            let pool = match rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
            {
                Ok(pool) => pool,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 1;
                }
            };
            pool.install(run)
        }
        None => run(),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

/// Diversity levels given as a comma list; labels reproduce the command line
/// exactly.
fn parse_diversity_list(spec: &str) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let label = part.trim();
        if label.is_empty() {
            return Err(CliError::Config(format!(
                "empty entry in diversity list {spec:?}"
            )));
        }
        let value: f64 = label
            .parse()
            .map_err(|_| CliError::Config(format!("diversity value {label:?} is not a number")))?;
        if !(value >= 0.0) || !value.is_finite() {
            return Err(CliError::Config(format!(
                "diversity variance {label} must be finite and nonnegative"
            )));
        }
        out.push((label.to_string(), value));
    }
    Ok(out)
}

fn parse_agent_list(spec: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let label = part.trim();
        let value: usize = label
            .parse()
            .map_err(|_| CliError::Config(format!("agent index {label:?} is not an integer")))?;
        if value < 1 {
            return Err(CliError::Config("agent indices start at 1".into()));
        }
        out.push(value);
    }
    if out.is_empty() {
        return Err(CliError::Config("agent list is empty".into()));
    }
    Ok(out)
}

/// Inclusive grid `start:stop:step`; the stop value is included whenever the
/// step divides the range (to within rounding).
fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "diversity grid {spec:?} must look like start:stop:step"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("grid component {p:?} is not a number")))
        })
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) {
        return Err(CliError::Config(format!("grid step {step} must be positive")));
    }
    if start > stop {
        return Err(CliError::Config(format!(
            "grid start {start} exceeds stop {stop}"
        )));
    }
    if start < 0.0 {
        return Err(CliError::Config("diversity grid must be nonnegative".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| start + step * k as f64).collect())
}

/// Compact label for computed grid values: fixed six decimals with trailing
/// zeros trimmed.
fn format_label(value: f64) -> String {
    let mut s = format!("{value:.6}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

fn validate_common(runs: u64, prior: f64) -> Result<(), CliError> {
    if runs < 1 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&prior) {
        return Err(CliError::Config(format!(
            "prior {prior} must lie in [0, 1]"
        )));
    }
    Ok(())
}

fn cmd_curve(args: CurveArgs) -> Result<i32, CliError> {
    validate_common(args.runs, args.prior)?;
    if args.agents < 1 {
        return Err(CliError::Config("agents must be at least 1".into()));
    }
    let signal = args.model.build()?;
    let levels = parse_diversity_list(&args.diversity)?;
    let mut labels = Vec::with_capacity(levels.len());
    let mut columns = Vec::with_capacity(levels.len());
    for (label, variance) in &levels {
        let cfg = RunConfig {
            signal: signal.clone(),
            diversity: DiversityModel::gaussian_noise(*variance)?,
            n_agents: args.agents,
            n_runs: args.runs,
            prior_p1: args.prior,
            master_seed: args.seed,
        };
        let curve = estimate_learning_curve(&cfg)?;
        labels.push(label.clone());
        columns.push(curve.agents.iter().map(|a| a.error_rate()).collect());
    }
    csv_out::write_curve_csv_file(&args.out, &labels, &columns)?;
    println!(
        "curve: model={:?} agents={} runs={} diversity=[{}] seed={} -> {} ({} rows)",
        args.model.model,
        args.agents,
        args.runs,
        args.diversity,
        args.seed,
        args.out.display(),
        args.agents
    );
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> Result<i32, CliError> {
    validate_common(args.runs, args.prior)?;
    let signal = args.model.build()?;
    let agents = parse_agent_list(&args.agents)?;
    let grid = parse_grid(&args.diversity_grid)?;
    let horizon = *agents.iter().max().expect("non-empty agent list");
    let mut rows = Vec::with_capacity(grid.len());
    for variance in &grid {
        let cfg = RunConfig {
            signal: signal.clone(),
            diversity: DiversityModel::gaussian_noise(*variance)?,
            n_agents: horizon,
            n_runs: args.runs,
            prior_p1: args.prior,
            master_seed: args.seed,
        };
        let curve = estimate_learning_curve(&cfg)?;
        let errors = agents
            .iter()
            .map(|&a| curve.agents[a - 1].error_rate())
            .collect();
        rows.push((format_label(*variance), errors));
    }
    csv_out::write_sweep_csv_file(&args.out, &agents, &rows)?;
    println!(
        "sweep: model={:?} agents=[{}] grid={} runs={} seed={} -> {} ({} rows)",
        args.model.model,
        args.agents,
        args.diversity_grid,
        args.runs,
        args.seed,
        args.out.display(),
        grid.len()
    );
    Ok(0)
}

fn cmd_oracle(args: OracleArgs) -> Result<i32, CliError> {
    validate_common(1, args.prior)?;
    let signal = args.model.build()?;
    let levels = parse_diversity_list(&args.diversity)?;
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    for (label, variance) in &levels {
        let engine = BeliefEngine::new(&signal, &DiversityModel::gaussian_noise(*variance)?)?;
        let accuracy = exact_learning_curve(&engine, args.agents, args.prior)?;
        labels.push(label.clone());
        columns.push(accuracy.iter().map(|a| 1.0 - a).collect());
    }
    csv_out::write_curve_csv_file(&args.out, &labels, &columns)?;
    println!(
        "oracle: model={:?} agents={} diversity=[{}] -> {} ({} rows)",
        args.model.model,
        args.agents,
        args.diversity,
        args.out.display(),
        args.agents
    );
    Ok(0)
}

fn cmd_markov(args: MarkovArgs) -> Result<i32, CliError> {
    validate_common(1, args.prior)?;
    let signal = args.model.build()?;
    let levels = parse_diversity_list(&args.diversity)?;
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    let mut summaries = Vec::new();
    for (label, variance) in &levels {
        let engine = BeliefEngine::new(&signal, &DiversityModel::gaussian_noise(*variance)?)?;
        let graph = build_tau_graph(&engine, args.max_states)?;
        let accuracy = markov_transient_curve(&graph, args.agents, args.prior);
        labels.push(label.clone());
        columns.push(accuracy.iter().map(|a| 1.0 - a).collect::<Vec<_>>());
        match markov_absorption_accuracy(&graph, args.prior) {
            Ok(limit) => summaries.push(format!(
                "sigma2={label}: {} states, absorption accuracy {limit:.6}",
                graph.states.len()
            )),
            Err(err) => summaries.push(format!(
                "sigma2={label}: {} states, absorption n/a ({err})",
                graph.states.len()
            )),
        }
    }
    csv_out::write_curve_csv_file(&args.out, &labels, &columns)?;
    println!(
        "markov: model={:?} agents={} [{}] -> {}",
        args.model.model,
        args.agents,
        summaries.join("; "),
        args.out.display()
    );
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<i32, CliError> {
    if args.runs < 1 {
        return Err(CliError::Config("runs must be at least 1".into()));
    }
    let opts = ValidateOpts {
        runs: args.runs,
        seed: args.seed,
    };
    let reports = validate::run_validation_suite(&opts);
    let mut all_passed = true;
    for report in &reports {
        let tag = if report.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", report.name, report.detail);
        all_passed &= report.passed;
    }
    Ok(if all_passed { 0 } else { 1 })
}
