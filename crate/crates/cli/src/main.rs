//! `polarnet` — analyze and design two-party opinion networks from the
//! command line.
//!
//! Every command reads plain-text inputs (edge lists, node attributes),
//! writes a JSON report (to stdout or `--output`), and exits with
//! 0 on success, 1 on usage/input errors, and 2 on numerical or solver
//! failures. Output files are written atomically: content goes to a
//! temporary file first and is renamed into place only on success, so a
//! failing run never leaves a partial file behind.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use polarnet::{
    design_robust_graph, detect_twins, fd_index_report, fj_index_report, flip_preferences_budget,
    flip_preferences_l1, io, optimize_weights, run_flip_experiment, select_leader, simulate_fd,
    simulate_fj, DedupePolicy, Error, ExperimentConfig, FdModel, FjModel, LaplacianKit, Result,
    SolverOptions, WeightedGraph,
};

/// Edge weights below this threshold are dropped when exporting a designed
/// graph: the optimizers may park a weight at (numerical) zero, and a zero
/// weight is the same as an absent edge.
const EXPORT_WEIGHT_FLOOR: f64 = 1e-12;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "polarnet",
    version,
    about = "Steady-state opinions, disagreement, and polarization on weighted graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute disagreement, polarization, and their blend for one model.
    Analyze(AnalyzeArgs),
    /// Resistance and biharmonic distances between vertices.
    Distances(DistancesArgs),
    /// Rank opposing-leader candidates against a fixed leader.
    SelectLeader(SelectLeaderArgs),
    /// Build a sparse bounded-weight graph with certified low worst-case
    /// polarization.
    DesignSparse(DesignSparseArgs),
    /// Optimize edge weights under box and budget constraints.
    DesignWeights(DesignWeightsArgs),
    /// Choose preference flips by l1 relaxation or under a flip budget.
    FlipPrefs(FlipPrefsArgs),
    /// Sweep the l1 penalty and compare against top-k and random baselines.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Fd,
    Fj,
}

#[derive(Clone, Copy, ValueEnum)]
enum DedupeArg {
    /// Reject the input on the first duplicate edge.
    Error,
    /// Keep the first occurrence of a duplicate edge.
    KeepFirst,
    /// Sum the weights of duplicate edges.
    Sum,
}

impl From<DedupeArg> for DedupePolicy {
    fn from(d: DedupeArg) -> Self {
        match d {
            DedupeArg::Error => DedupePolicy::Error,
            DedupeArg::KeepFirst => DedupePolicy::KeepFirst,
            DedupeArg::Sum => DedupePolicy::Sum,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Edge-list file: `u v [w]` per line, `#` comments.
    #[arg(long)]
    edges: PathBuf,
    /// Which dynamics to analyze.
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Leader pinned at opinion 0 (fd only).
    #[arg(long)]
    s0: Option<usize>,
    /// Leader pinned at opinion 1 (fd only).
    #[arg(long)]
    s1: Option<usize>,
    /// Node-attribute file: `v kappa beta` per line (fj only).
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// Mixing weight between disagreement and polarization.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also integrate the dynamics up to this time horizon.
    #[arg(long, requires = "trajectory_out")]
    simulate_horizon: Option<f64>,
    /// CSV file for the simulated trajectory (with --simulate-horizon).
    #[arg(long, requires = "simulate_horizon")]
    trajectory_out: Option<PathBuf>,
    /// Duplicate-edge handling for the input file.
    #[arg(long, value_enum, default_value_t = DedupeArg::Error)]
    dedupe: DedupeArg,
}

#[derive(Args)]
struct DistancesArgs {
    /// Edge-list file: `u v [w]` per line, `#` comments.
    #[arg(long)]
    edges: PathBuf,
    /// First endpoint; with --v, report just this pair.
    #[arg(long, requires = "v")]
    u: Option<usize>,
    /// Second endpoint; with --u, report just this pair.
    #[arg(long, requires = "u")]
    v: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Duplicate-edge handling for the input file.
    #[arg(long, value_enum, default_value_t = DedupeArg::Error)]
    dedupe: DedupeArg,
}

#[derive(Args)]
struct SelectLeaderArgs {
    /// Edge-list file: `u v [w]` per line, `#` comments.
    #[arg(long)]
    edges: PathBuf,
    /// The fixed leader to oppose.
    #[arg(long)]
    s0: usize,
    /// Mixing weight between disagreement and polarization.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Duplicate-edge handling for the input file.
    #[arg(long, value_enum, default_value_t = DedupeArg::Error)]
    dedupe: DedupeArg,
}

#[derive(Args)]
struct DesignSparseArgs {
    /// Number of vertices.
    #[arg(long)]
    n: usize,
    /// Maximum number of edges.
    #[arg(long)]
    k: usize,
    /// Maximum total edge weight.
    #[arg(long)]
    max_weight: f64,
    /// Requested spectral-spread tolerance.
    #[arg(long)]
    epsilon: f64,
    /// Sampling seed (default 42; POLARNET_SEED overrides the default).
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also export the designed graph as an edge list.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignWeightsArgs {
    /// Edge-list file fixing the topology; its weights are the start point's
    /// scale but are otherwise ignored.
    #[arg(long)]
    edges: PathBuf,
    /// Node-attribute file: `v kappa beta` per line.
    #[arg(long)]
    attrs: PathBuf,
    /// Per-edge lower weight bound.
    #[arg(long)]
    lower: f64,
    /// Per-edge upper weight bound.
    #[arg(long)]
    upper: f64,
    /// Total-weight budget.
    #[arg(long)]
    budget: f64,
    /// Iteration cap for the projected-gradient solve.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Stationarity tolerance for the projected-gradient solve.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also export the reweighted graph as an edge list.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    /// Duplicate-edge handling for the input file.
    #[arg(long, value_enum, default_value_t = DedupeArg::Error)]
    dedupe: DedupeArg,
}

#[derive(Args)]
struct FlipPrefsArgs {
    /// Edge-list file: `u v [w]` per line, `#` comments.
    #[arg(long)]
    edges: PathBuf,
    /// Node-attribute file: `v kappa beta` per line; beta must be 0 or 1.
    #[arg(long)]
    attrs: PathBuf,
    /// l1 penalty strength (exclusive with --k).
    #[arg(long, conflicts_with = "k")]
    lambda: Option<f64>,
    /// Flip budget (exclusive with --lambda).
    #[arg(long)]
    k: Option<usize>,
    /// Mixing weight between disagreement and polarization.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Iteration cap for the proximal-gradient solve (with --lambda).
    #[arg(long, requires = "lambda")]
    max_iterations: Option<usize>,
    /// Step-change tolerance for the proximal-gradient solve (with --lambda).
    #[arg(long, requires = "lambda")]
    tolerance: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Duplicate-edge handling for the input file.
    #[arg(long, value_enum, default_value_t = DedupeArg::Error)]
    dedupe: DedupeArg,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Edge-list file; the sweep runs on its largest connected component.
    #[arg(long)]
    edges: PathBuf,
    /// Probability that a sampled preference is 0 (otherwise 1).
    #[arg(long, default_value_t = 0.35)]
    prob_zero: f64,
    /// Mixing weight between disagreement and polarization.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Smallest l1 penalty in the sweep.
    #[arg(long, default_value_t = 0.45)]
    lambda_lo: f64,
    /// Largest l1 penalty in the sweep.
    #[arg(long, default_value_t = 1.0)]
    lambda_hi: f64,
    /// Number of sweep points (geometric spacing).
    #[arg(long, default_value_t = 12)]
    lambda_points: usize,
    /// Random-baseline trials per sweep point.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Seed for preferences and baselines (default 42; POLARNET_SEED
    /// overrides the default).
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the sweep table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Duplicate-edge handling for the input file (contact lists repeat
    /// edges, so duplicates are collapsed by default here).
    #[arg(long, value_enum, default_value_t = DedupeArg::KeepFirst)]
    dedupe: DedupeArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Distances(args) => cmd_distances(args),
        Command::SelectLeader(args) => cmd_select_leader(args),
        Command::DesignSparse(args) => cmd_design_sparse(args),
        Command::DesignWeights(args) => cmd_design_weights(args),
        Command::FlipPrefs(args) => cmd_flip_prefs(args),
        Command::Experiment(args) => cmd_experiment(args),
    }
}

// ---- shared plumbing ----

fn read_graph(path: &Path, dedupe: DedupeArg) -> Result<WeightedGraph> {
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    io::parse_edge_list(&text, dedupe.into())
}

fn read_attrs(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    io::parse_node_attributes(&text)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("POLARNET_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            Error::Domain(format!(
                "POLARNET_SEED must be an unsigned integer, got {raw:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Write `content` to `path` atomically: a temporary sibling file receives
/// the bytes and is renamed over the target only after a successful write.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(Error::Io)?;
    std::io::Write::write_all(&mut tmp, content.as_bytes()).map_err(Error::Io)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn emit_json<T: serde::Serialize>(report: &T, output: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Numerical(format!("report serialization failed: {e}")))?;
    text.push('\n');
    match output {
        Some(path) => write_atomic(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Export a designed graph, dropping edges whose weight is numerically zero.
fn export_graph(g: &WeightedGraph, path: &Path) -> Result<()> {
    let kept: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .filter(|e| e.w >= EXPORT_WEIGHT_FLOOR)
        .map(|e| (e.u, e.v, e.w))
        .collect();
    let trimmed = WeightedGraph::with_node_count(g.node_count(), &kept, DedupePolicy::Error)?;
    write_atomic(path, &io::format_edge_list(&trimmed))
}

// ---- commands ----

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let g = read_graph(&args.edges, args.dedupe)?;
    match args.model {
        ModelKind::Fd => {
            if args.attrs.is_some() {
                return Err(Error::Domain(
                    "--attrs applies only to --model fj".to_string(),
                ));
            }
            let (s0, s1) = match (args.s0, args.s1) {
                (Some(s0), Some(s1)) => (s0, s1),
                _ => {
                    return Err(Error::Domain(
                        "--model fd requires --s0 and --s1".to_string(),
                    ))
                }
            };
            let report = fd_index_report(&g, s0, s1, args.rho)?;
            if let (Some(horizon), Some(csv)) = (args.simulate_horizon, &args.trajectory_out) {
                let model = FdModel::new(g, s0, s1)?;
                let traj = simulate_fd(&model, None, None, horizon)?;
                write_atomic(csv, &io::format_trajectory_csv(&traj))?;
            }
            emit_json(&report, args.output.as_deref())
        }
        ModelKind::Fj => {
            if args.s0.is_some() || args.s1.is_some() {
                return Err(Error::Domain(
                    "--s0/--s1 apply only to --model fd".to_string(),
                ));
            }
            let attrs = args.attrs.as_ref().ok_or_else(|| {
                Error::Domain("--model fj requires --attrs".to_string())
            })?;
            let (kappa, beta) = read_attrs(attrs)?;
            let model = FjModel::new(g, &kappa, &beta)?;
            let report = fj_index_report(&model, args.rho)?;
            if let (Some(horizon), Some(csv)) = (args.simulate_horizon, &args.trajectory_out) {
                let traj = simulate_fj(&model, None, None, horizon)?;
                write_atomic(csv, &io::format_trajectory_csv(&traj))?;
            }
            emit_json(&report, args.output.as_deref())
        }
    }
}

fn cmd_distances(args: DistancesArgs) -> Result<()> {
    let g = read_graph(&args.edges, args.dedupe)?;
    let kit = LaplacianKit::new(&g)?;
    let pair = |u: usize, v: usize| -> Result<serde_json::Value> {
        Ok(json!({
            "u": u,
            "v": v,
            "resistance": kit.resistance_distance(u, v)?,
            "biharmonic": kit.biharmonic_distance(u, v)?,
        }))
    };
    let report = match (args.u, args.v) {
        (Some(u), Some(v)) => pair(u, v)?,
        _ => {
            let n = g.node_count();
            let mut rows = Vec::with_capacity(n * (n - 1) / 2);
            for u in 0..n {
                for v in (u + 1)..n {
                    rows.push(pair(u, v)?);
                }
            }
            json!({ "nodes": n, "pairs": rows })
        }
    };
    emit_json(&report, args.output.as_deref())
}

fn cmd_select_leader(args: SelectLeaderArgs) -> Result<()> {
    let g = read_graph(&args.edges, args.dedupe)?;
    let choice = select_leader(&g, args.s0, args.rho)?;
    let twins = detect_twins(&g, args.s0)?;
    let report = json!({
        "choice": choice,
        "twins": twins,
    });
    emit_json(&report, args.output.as_deref())
}

fn cmd_design_sparse(args: DesignSparseArgs) -> Result<()> {
    let seed = resolve_seed(args.seed)?;
    let design = design_robust_graph(args.n, args.k, args.max_weight, args.epsilon, seed)?;
    if let Some(path) = &args.graph_out {
        export_graph(&design.graph, path)?;
    }
    emit_json(&design, args.output.as_deref())
}

fn cmd_design_weights(args: DesignWeightsArgs) -> Result<()> {
    let g = read_graph(&args.edges, args.dedupe)?;
    let (kappa, beta) = read_attrs(&args.attrs)?;
    let mut options = SolverOptions::default();
    if let Some(iters) = args.max_iterations {
        options.max_iterations = iters;
    }
    if let Some(tol) = args.tolerance {
        options.tolerance = Some(tol);
    }
    let design = optimize_weights(
        &g,
        &kappa,
        &beta,
        args.lower,
        args.upper,
        args.budget,
        options,
    )?;
    if let Some(path) = &args.graph_out {
        export_graph(&g.with_weights(&design.weights)?, path)?;
    }
    emit_json(&design, args.output.as_deref())
}

fn cmd_flip_prefs(args: FlipPrefsArgs) -> Result<()> {
    let g = read_graph(&args.edges, args.dedupe)?;
    let (kappa, beta) = read_attrs(&args.attrs)?;
    let plan = match (args.lambda, args.k) {
        (Some(lambda), None) => {
            let mut options = SolverOptions::default();
            if let Some(iters) = args.max_iterations {
                options.max_iterations = iters;
            }
            if let Some(tol) = args.tolerance {
                options.tolerance = Some(tol);
            }
            flip_preferences_l1(&g, &kappa, &beta, lambda, args.rho, options)?
        }
        (None, Some(k)) => flip_preferences_budget(&g, &kappa, &beta, k, args.rho)?,
        _ => {
            return Err(Error::Domain(
                "exactly one of --lambda or --k is required".to_string(),
            ))
        }
    };
    emit_json(&plan, args.output.as_deref())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let g = read_graph(&args.edges, args.dedupe)?;
    let config = ExperimentConfig {
        prob_zero: args.prob_zero,
        rho: args.rho,
        lambda_lo: args.lambda_lo,
        lambda_hi: args.lambda_hi,
        lambda_points: args.lambda_points,
        trials: args.trials,
        seed: resolve_seed(args.seed)?,
    };
    let report = run_flip_experiment(&g, &config)?;
    if let Some(path) = &args.csv {
        write_atomic(path, &io::format_experiment_csv(&report))?;
    }
    emit_json(&report, args.output.as_deref())
}
