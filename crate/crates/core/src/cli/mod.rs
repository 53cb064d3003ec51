//! Command-line front end. Every command produces one JSON document.

pub mod io;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::{fair_decomposition, min_satisfaction_bound, MetricsReport};
use crate::baseline::deterministic_baseline;
use crate::error::Error;
use crate::model::{ConstraintSet, Instance, Ranking, ValueModel};
use crate::solver::{sample_indices, solve_maxmin, Engine, SolverConfig};
use crate::synthetic::skewed_two_group;

use io::{
    build_constraints, distribution_from_json, distribution_to_json, ids, parse_constraints,
    parse_instance, per_individual, ConstraintSpec, DistributionJson,
};

#[derive(Debug, Parser)]
#[command(name = "maxmin-rank", version, about = "Maxmin-fair ranking distributions under group constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a maxmin-fair distribution over valid rankings.
    Solve(SolveArgs),
    /// Best single ranking for the worst-off individual.
    Baseline(InstanceArgs),
    /// Draw one ranking from a stored distribution.
    Sample(SampleArgs),
    /// Metrics of a stored distribution or of one ranking.
    Metrics(MetricsArgs),
    /// Exact block decomposition of the fair satisfaction levels (n <= 12).
    Decompose(InstanceArgs),
    /// Fair distribution against the deterministic baseline over an alpha grid.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    CeilAlpha,
    FloorBalanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ValueFnArg {
    PositionDiff,
    LogRatio,
    TopK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    MinNorm,
    Mwu,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// CSV file with header `id,group,score`.
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate a skewed two-group instance with this many members per group.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Seed for synthetic instances and sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Constraint JSON file.
    #[arg(long, conflicts_with_all = ["alpha", "rule"])]
    pub constraints: Option<PathBuf>,
    /// Fairness parameter for the ceil-alpha rule.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    /// Protected group label (default: lowest mean score).
    #[arg(long)]
    pub protected: Option<String>,
    /// First prefix length the rule applies to.
    #[arg(long)]
    pub start_k: Option<usize>,
    #[arg(long, value_enum, default_value = "position-diff")]
    pub value_fn: ValueFnArg,
    /// Cutoff for `top-k`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Write the result here instead of stdout. A `.csv` path writes the
    /// rows of a table result as CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Additive error per expected satisfaction, in units of the value function.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Drop atoms whose probability is below this.
    #[arg(long, default_value_t = 1e-9)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "min-norm")]
    pub engine: EngineArg,
    /// MWU engine: grow the per-phase error budget by doubling.
    #[arg(long)]
    pub doubling: bool,
    /// MWU engine: end games once the guess is settled.
    #[arg(long)]
    pub early_stop: bool,
    #[arg(long)]
    pub max_iterations: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Distribution JSON written by `solve`.
    #[arg(long)]
    pub distribution: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Distribution JSON written by `solve`.
    #[arg(long, conflicts_with = "ranking")]
    pub distribution: Option<PathBuf>,
    /// Comma-separated ids, top first.
    #[arg(long, value_delimiter = ',')]
    pub ranking: Option<Vec<String>>,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3")]
    pub alphas: Vec<f64>,
}

/// Failure of a CLI command.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2: bad input, 3: infeasible constraints, 4: size or iteration guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::InfeasibleConstraints(_)) => 3,
            CliError::Core(Error::InstanceTooLarge { .. } | Error::IterationCapExceeded { .. }) => 4,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                Error::InvalidInstance(_) => "invalid_instance",
                Error::DuplicateId(_) => "duplicate_id",
                Error::Parse { .. } => "parse_error",
                Error::InvalidConstraints(_) => "invalid_constraints",
                Error::InfeasibleConstraints(_) => "infeasible",
                Error::InvalidAlpha(_) => "invalid_alpha",
                Error::UnsupportedLowerBounds(_) => "unsupported_lower_bounds",
                Error::InvalidWeights(_) => "invalid_weights",
                Error::InvalidValueModel(_) => "invalid_value_model",
                Error::InvalidConfig(_) => "invalid_config",
                Error::InstanceTooLarge { .. } => "instance_too_large",
                Error::IterationCapExceeded { .. } => "iteration_cap_exceeded",
            },
            CliError::Io(_) => "io_error",
            CliError::Usage(_) => "usage_error",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": self.kind(), "message": self.to_string() })
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_instance(args: &InstanceArgs) -> CliResult<Instance> {
    match (&args.input, args.synthetic) {
        (Some(path), _) => Ok(parse_instance(&read(path)?)?),
        (None, Some(per_group)) if per_group > 0 => Ok(skewed_two_group(per_group, args.seed)),
        _ => Err(CliError::Usage("give --input or a positive --synthetic".into())),
    }
}

fn load_constraints(args: &InstanceArgs, instance: &Instance, alpha: Option<f64>) -> CliResult<ConstraintSet> {
    if let Some(path) = &args.constraints {
        return Ok(parse_constraints(&read(path)?, instance)?);
    }
    let rule = match (args.rule, alpha) {
        (Some(RuleArg::FloorBalanced), _) => "floor-balanced",
        (Some(RuleArg::CeilAlpha), _) | (None, Some(_)) => "ceil-alpha",
        (None, None) => return Ok(ConstraintSet::vacuous_for(instance)),
    };
    let spec = ConstraintSpec {
        rule: Some(rule.into()),
        alpha,
        protected: args.protected.clone(),
        start_k: args.start_k,
        ..Default::default()
    };
    Ok(build_constraints(&spec, instance)?)
}

fn load_model(args: &InstanceArgs, instance: &Instance) -> CliResult<ValueModel> {
    Ok(match args.value_fn {
        ValueFnArg::PositionDiff => ValueModel::position_diff(instance),
        ValueFnArg::LogRatio => ValueModel::log_ratio(instance),
        ValueFnArg::TopK => {
            let k = args
                .k
                .ok_or_else(|| CliError::Usage("--value-fn top-k needs --k".into()))?;
            ValueModel::top_k(instance, k)
        }
    })
}

fn solver_config(args: &SolverArgs) -> SolverConfig {
    let defaults = SolverConfig::default();
    SolverConfig {
        epsilon: args.epsilon,
        prune_threshold: args.threshold,
        engine: match args.engine {
            EngineArg::MinNorm => Engine::MinNorm,
            EngineArg::Mwu => Engine::Mwu,
        },
        doubling_trick: args.doubling,
        early_stop: args.early_stop,
        max_iterations_cap: args.max_iterations.unwrap_or(defaults.max_iterations_cap),
        ..defaults
    }
}

fn load_distribution(path: &Path) -> CliResult<DistributionJson> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Core(Error::InvalidConfig(format!("{}: {e}", path.display()))))
}

/// Runs one command and returns its JSON result.
pub fn run(cli: &Cli) -> CliResult<Value> {
    match &cli.command {
        Command::Solve(args) => {
            let instance = load_instance(&args.instance)?;
            let constraints = load_constraints(&args.instance, &instance, args.instance.alpha)?;
            let model = load_model(&args.instance, &instance)?;
            let dist = solve_maxmin(&instance, &constraints, &model, &solver_config(&args.solver))?;
            let metrics = MetricsReport::for_distribution(&instance, &model, &dist);
            Ok(serde_json::to_value(distribution_to_json(&instance, &dist, Some(metrics))).expect("serializable"))
        }
        Command::Baseline(args) => {
            let instance = load_instance(args)?;
            let constraints = load_constraints(args, &instance, args.alpha)?;
            let model = load_model(args, &instance)?;
            let ranking = deterministic_baseline(&instance, &constraints)?;
            let values = model.values(&ranking);
            let metrics = MetricsReport::for_ranking(&instance, &model, &ranking);
            Ok(json!({
                "ranking": ids(&instance, &ranking),
                "min_value": metrics.min_value,
                "values": per_individual(&instance, &values),
                "metrics": metrics,
            }))
        }
        Command::Sample(args) => {
            let stored = load_distribution(&args.distribution)?;
            if stored.support.is_empty() {
                return Err(Error::InvalidConfig("distribution has no atoms".into()).into());
            }
            let probabilities: Vec<f64> = stored.support.iter().map(|a| a.probability).collect();
            if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || probabilities.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidConfig("probabilities must be nonnegative with a positive sum".into()).into());
            }
            let pick = sample_indices(&probabilities, args.seed, 1)[0];
            Ok(json!({ "ranking": stored.support[pick].ranking, "seed": args.seed }))
        }
        Command::Metrics(args) => {
            let instance = load_instance(&args.instance)?;
            let model = load_model(&args.instance, &instance)?;
            let report = if let Some(path) = &args.distribution {
                let dist = distribution_from_json(&instance, &model, &load_distribution(path)?)?;
                MetricsReport::for_distribution(&instance, &model, &dist)
            } else if let Some(order) = &args.ranking {
                MetricsReport::for_ranking(&instance, &model, &Ranking::from_ids(&instance, order)?)
            } else {
                return Err(CliError::Usage("give --distribution or --ranking".into()));
            };
            Ok(serde_json::to_value(report).expect("serializable"))
        }
        Command::Decompose(args) => {
            let instance = load_instance(args)?;
            let constraints = load_constraints(args, &instance, args.alpha)?;
            let model = load_model(args, &instance)?;
            let decomposition = fair_decomposition(&instance, &constraints, &model)?;
            let bound = min_satisfaction_bound(&instance, &constraints, &model)?;
            let blocks: Vec<Value> = decomposition
                .blocks
                .iter()
                .map(|(members, lambda)| {
                    let names: Vec<&str> = members.iter().map(|&u| instance.individual(u).id.as_str()).collect();
                    json!({ "members": names, "lambda": lambda })
                })
                .collect();
            Ok(json!({
                "blocks": blocks,
                "target": per_individual(&instance, &decomposition.target()),
                "min_satisfaction_bound": bound,
            }))
        }
        Command::Experiment(args) => experiment(args),
    }
}

fn experiment(args: &ExperimentArgs) -> CliResult<Value> {
    let instance = load_instance(&args.instance)?;
    let model = load_model(&args.instance, &instance)?;
    let config = solver_config(&args.solver);
    let results: Vec<CliResult<Vec<Value>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .alphas
            .iter()
            .map(|&alpha| {
                let (instance, model, config) = (&instance, &model, &config);
                scope.spawn(move || -> CliResult<Vec<Value>> {
                    let constraints = load_constraints(&args.instance, instance, Some(alpha))?;
                    let dist = solve_maxmin(instance, &constraints, model, config)?;
                    let fair = MetricsReport::for_distribution(instance, model, &dist);
                    let det = MetricsReport::for_ranking(instance, model, &deterministic_baseline(instance, &constraints)?);
                    Ok([("MF", fair), ("det", det)]
                        .into_iter()
                        .map(|(method, m)| {
                            json!({
                                "alpha": alpha,
                                "method": method,
                                "min_value": m.min_value,
                                "spread": m.spread,
                                "gini": m.gini,
                                "dcg_mean": m.dcg_mean,
                                "dcg_std": m.dcg_std,
                                "oracle_calls": if method == "MF" { dist.oracle_calls } else { 0 },
                            })
                        })
                        .collect())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("grid worker panicked")).collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(json!({ "rows": rows }))
}

fn output_path(cli: &Cli) -> Option<&Path> {
    match &cli.command {
        Command::Solve(a) => a.instance.output.as_deref(),
        Command::Baseline(a) | Command::Decompose(a) => a.output.as_deref(),
        Command::Sample(a) => a.output.as_deref(),
        Command::Metrics(a) => a.instance.output.as_deref(),
        Command::Experiment(a) => a.instance.output.as_deref(),
    }
}

/// Writes `value` to `path`, or to stdout when `path` is `None`. Table
/// results (`{"rows": [...]}`) go out as CSV when `path` ends in `.csv`.
pub fn write_output(value: &Value, path: Option<&Path>) -> CliResult<()> {
    let io_err = |e: std::io::Error| CliError::Io(e.to_string());
    let Some(path) = path else {
        let text = serde_json::to_string_pretty(value).expect("serializable");
        return match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other.map_err(io_err),
        };
    };
    let rows = value.get("rows").and_then(Value::as_array);
    if let (Some(rows), Some("csv")) = (rows, path.extension().and_then(|e| e.to_str())) {
        let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::Io(e.to_string()))?;
        if let Some(Value::Object(first)) = rows.first() {
            writer.write_record(first.keys()).map_err(|e| CliError::Io(e.to_string()))?;
        }
        for row in rows.iter().filter_map(Value::as_object) {
            let cells = row.values().map(|v| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            });
            writer.write_record(cells).map_err(|e| CliError::Io(e.to_string()))?;
        }
        return writer.flush().map_err(io_err);
    }
    fs::write(path, serde_json::to_string_pretty(value).expect("serializable") + "\n").map_err(io_err)
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli).and_then(|v| write_output(&v, output_path(&cli))) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
