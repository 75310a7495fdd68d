//! Command-line interface for the vortex equation solver.
//!
//! Exit codes: 0 success, 1 validation error (bad input), 2 solver
//! failure, 3 critical-coupling result flagged inconclusive.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use csgraph::critical::{bisect, lambda_sweep, BisectOptions};
use csgraph::monotone::{compute_u0, iterate_scheme, MonotoneOptions};
use csgraph::nonlinearity::{classify_sub_super, lambda_lower_bound, residual};
use csgraph::report::{
    critical_lambda_json, multiplicity_json, solve_report_json, sweep_json, sweep_tsv,
};
use csgraph::variational::{find_two_solutions, functional_j, MountainPassOptions};
use csgraph::{
    gradient_form, integrate, poincare_constant, spectral_gap, Error, FiniteGraph,
    LinearSolveOptions, Problem, SolveStatus, VertexFunction, VortexSet,
};

#[derive(Parser)]
#[command(
    name = "csgraph",
    version,
    about = "Solver for the generalized Chern-Simons vortex equation on finite weighted graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the monotone scheme at a fixed coupling.
    Solve(SolveArgs),
    /// Bracket and bisect the critical coupling.
    Critical(CriticalArgs),
    /// Compute two solutions above the critical coupling.
    Multiplicity(MultiplicityArgs),
    /// Check a solution file against the equation.
    Verify(VerifyArgs),
    /// Evaluate the solver on a coupling grid (plot-ready TSV).
    Sweep(SweepArgs),
    /// Spectral gap and Poincare constant, with optional randomized check.
    Poincare(PoincareArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Graph JSON file: {"vertices":[{"id","mu"}],"edges":[{"u","v","w"}]}
    #[arg(long)]
    graph: PathBuf,
    /// Vortex vertex id; repeat the flag for several vortices, repeat an
    /// id for multiplicity.
    #[arg(long = "vortex", required = true)]
    vortices: Vec<String>,
    /// Reject repeated vortex ids.
    #[arg(long)]
    strict_distinct: bool,
}

impl GraphArgs {
    fn load(&self) -> anyhow::Result<(Arc<FiniteGraph>, VortexSet)> {
        let text = std::fs::read_to_string(&self.graph)
            .with_context(|| format!("cannot read graph file {}", self.graph.display()))?;
        let graph = Arc::new(FiniteGraph::from_json_str(&text)?);
        let vortices = if self.strict_distinct {
            VortexSet::new_distinct(&graph, &self.vortices)?
        } else {
            VortexSet::new(&graph, &self.vortices)?
        };
        Ok((graph, vortices))
    }
}

#[derive(Args, Clone)]
struct MonotoneArgs {
    /// Additive margin in K = b*lambda + margin.
    #[arg(long, default_value_t = 1.0)]
    k_margin: f64,
    /// Sup-norm step threshold for convergence.
    #[arg(long, default_value_t = 1e-12)]
    step_tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: usize,
    /// Mean value of v below which non-existence is declared.
    #[arg(long, default_value_t = -1e6, allow_hyphen_values = true)]
    divergence_floor: f64,
    /// Residual bound for a converged solve.
    #[arg(long, default_value_t = 1e-9)]
    residual_tolerance: f64,
}

impl MonotoneArgs {
    fn options(&self) -> MonotoneOptions {
        MonotoneOptions {
            k_margin: self.k_margin,
            step_tolerance: self.step_tolerance,
            max_iterations: self.max_iterations,
            divergence_floor: self.divergence_floor,
            residual_tolerance: self.residual_tolerance,
            linear: LinearSolveOptions::default(),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    b: f64,
    #[command(flatten)]
    monotone: MonotoneArgs,
}

#[derive(Args)]
struct CriticalArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    b: f64,
    /// Bracket-width tolerance relative to the tightened upper bracket.
    #[arg(long, default_value_t = 1e-4)]
    tol_rel: f64,
    #[command(flatten)]
    monotone: MonotoneArgs,
}

#[derive(Args)]
struct MultiplicityArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    b: f64,
    /// Working coupling; must exceed the critical value. When omitted,
    /// lambda = factor * lambda_c is used.
    #[arg(long)]
    lambda: Option<f64>,
    /// Factor applied to lambda_c when --lambda is not given.
    #[arg(long, default_value_t = 1.01)]
    lambda_factor: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol_rel: f64,
    /// Path states for the mountain-pass search.
    #[arg(long, default_value_t = 64)]
    path_points: usize,
    /// Gradient threshold for critical points.
    #[arg(long, default_value_t = 1e-8)]
    descent_tolerance: f64,
    #[arg(long, default_value_t = 50_000)]
    max_deformations: usize,
    #[command(flatten)]
    monotone: MonotoneArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    b: f64,
    /// Solution JSON file: an id -> value map over all vertices.
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    lambda_min: f64,
    #[arg(long)]
    lambda_max: f64,
    #[arg(long, default_value_t = 16)]
    steps: usize,
    /// Worker threads for the grid; 0 means one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output format: tsv (default) or json.
    #[arg(long, default_value = "tsv")]
    format: String,
    #[command(flatten)]
    monotone: MonotoneArgs,
}

#[derive(Args)]
struct PoincareArgs {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Randomized mean-zero functions to test the inequality against.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Seed for the randomized self-check.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify_error(&err))
        }
    }
}

fn classify_error(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) => match e {
            Error::SolveDidNotConverge { .. }
            | Error::FactorizationFailed
            | Error::EigenSolverFailed
            | Error::BracketInvalid(_)
            | Error::UpSetViolation { .. }
            | Error::UpperBracketFailed { .. }
            | Error::CriticalEstimateTooLow(_)
            | Error::FunctionalOverflow { .. }
            | Error::LineSearchFailed(_)
            | Error::ObstacleActive { .. }
            | Error::DeformationCapReached(_)
            | Error::DegeneratePath
            | Error::MinimizationFailed(_)
            | Error::NoSolutionFound { .. } => 2,
            _ => 1,
        },
        // I/O and argument problems.
        None => 1,
    }
}

fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => {
            let (graph, vortices) = args.graph.load()?;
            let opts = args.monotone.options();
            let problem = Problem::new(Arc::clone(&graph), vortices.clone(), args.lambda, args.b)?;
            let bg = compute_u0(&graph, &vortices, &opts.linear)?;
            let report = iterate_scheme(&problem, &bg, &opts)?;
            let out = json!({
                "command": "solve",
                "lambda": args.lambda,
                "b": args.b,
                "n_vortices": vortices.n(),
                "lambda_lower_bound": lambda_lower_bound(&graph, vortices.n(), args.b),
                "report": solve_report_json(&graph, &report),
            });
            print_json(&out)?;
            Ok(match report.status {
                SolveStatus::Inconclusive => ExitCode::from(2),
                _ => ExitCode::SUCCESS,
            })
        }
        Command::Critical(args) => {
            let (graph, vortices) = args.graph.load()?;
            let opts = BisectOptions {
                tol_rel: args.tol_rel,
                monotone: args.monotone.options(),
            };
            let result = bisect(&graph, &vortices, args.b, &opts)?;
            let out = json!({
                "command": "critical",
                "b": args.b,
                "n_vortices": vortices.n(),
                "result": critical_lambda_json(&result),
            });
            print_json(&out)?;
            Ok(if result.inconclusive_count > 0 {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Multiplicity(args) => {
            let (graph, vortices) = args.graph.load()?;
            let monotone = args.monotone.options();
            let bisect_opts = BisectOptions {
                tol_rel: args.tol_rel,
                monotone: monotone.clone(),
            };
            let crit = bisect(&graph, &vortices, args.b, &bisect_opts)?;
            let lambda = args.lambda.unwrap_or(args.lambda_factor * crit.lambda_c);
            let problem = Problem::new(Arc::clone(&graph), vortices.clone(), lambda, args.b)?;
            let bg = compute_u0(&graph, &vortices, &monotone.linear)?;
            let mp_opts = MountainPassOptions {
                path_points: args.path_points,
                descent_tolerance: args.descent_tolerance,
                max_deformations: args.max_deformations,
                ..Default::default()
            };
            let result = find_two_solutions(&problem, &bg, crit.lambda_c, &monotone, &mp_opts)?;
            let out = json!({
                "command": "multiplicity",
                "lambda": lambda,
                "lambda_c": crit.lambda_c,
                "b": args.b,
                "result": multiplicity_json(&graph, &result),
            });
            print_json(&out)?;
            Ok(if crit.inconclusive_count > 0 {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Verify(args) => {
            let (graph, vortices) = args.graph.load()?;
            let text = std::fs::read_to_string(&args.solution).with_context(|| {
                format!("cannot read solution file {}", args.solution.display())
            })?;
            let map: BTreeMap<String, f64> =
                serde_json::from_str(&text).context("solution file must be an id->value map")?;
            let v = VertexFunction::from_id_map(&graph, &map)?;
            let problem = Problem::new(Arc::clone(&graph), vortices.clone(), args.lambda, args.b)?;
            let bg = compute_u0(&graph, &vortices, &LinearSolveOptions::default())?;
            let r = residual(&problem, &bg, &v)?;
            let class = classify_sub_super(&problem, &bg, &v)?;
            let u = bg.u0.add(&v);
            let out = json!({
                "command": "verify",
                "lambda": args.lambda,
                "b": args.b,
                "classification": class.as_str(),
                "residual_sup": r.sup_norm(),
                "max_u0_plus_v": u.max(),
                "j": functional_j(&problem, &bg, &v).ok(),
                "residual": r.to_id_map(&graph),
            });
            print_json(&out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            if args.steps < 2 {
                return Err(anyhow!("--steps must be at least 2"));
            }
            if !(args.lambda_min > 0.0 && args.lambda_max > args.lambda_min) {
                return Err(anyhow!(
                    "need 0 < --lambda-min < --lambda-max (got {} and {})",
                    args.lambda_min,
                    args.lambda_max
                ));
            }
            let (graph, vortices) = args.graph.load()?;
            let lambdas: Vec<f64> = (0..args.steps)
                .map(|i| {
                    args.lambda_min
                        + (args.lambda_max - args.lambda_min) * i as f64
                            / (args.steps - 1) as f64
                })
                .collect();
            let opts = args.monotone.options();
            let run_sweep = || lambda_sweep(&graph, &vortices, args.b, &lambdas, &opts);
            let sweep = if args.jobs > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(args.jobs)
                    .build()
                    .context("cannot build worker pool")?
                    .install(run_sweep)?
            } else {
                run_sweep()?
            };
            match args.format.as_str() {
                "tsv" => print!("{}", sweep_tsv(&sweep)),
                "json" => print_json(&serde_json::to_value(sweep_json(&sweep))?)?,
                other => return Err(anyhow!("unknown format {other:?}; use tsv or json")),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Poincare(args) => {
            let text = std::fs::read_to_string(&args.graph)
                .with_context(|| format!("cannot read graph file {}", args.graph.display()))?;
            let graph = FiniteGraph::from_json_str(&text)?;
            let opts = LinearSolveOptions::default();
            let gap = spectral_gap(&graph, &opts)?;
            let constant = poincare_constant(&graph, &opts)?;
            let mut max_fraction = 0.0f64;
            let mut violations = 0usize;
            if args.samples > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                let total = graph.total_measure();
                for _ in 0..args.samples {
                    let raw: Vec<f64> =
                        (0..graph.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let u = VertexFunction::new(&graph, raw)?;
                    let mean = integrate(&graph, &u)? / total;
                    let u = u.shift(-mean);
                    let lhs = integrate(&graph, &u.zip_map(&u, |a, b| a * b))?;
                    let gamma = gradient_form(&graph, &u, &u)?;
                    let rhs = constant * integrate(&graph, &gamma)?;
                    if rhs > 0.0 {
                        let fraction = lhs / rhs;
                        max_fraction = max_fraction.max(fraction);
                        if lhs > rhs * (1.0 + 1e-9) {
                            violations += 1;
                        }
                    }
                }
            }
            let out = json!({
                "command": "poincare",
                "spectral_gap": gap,
                "poincare_constant": constant,
                "samples": args.samples,
                "seed": args.seed,
                "max_ratio_fraction": max_fraction,
                "violations": violations,
            });
            print_json(&out)?;
            Ok(if violations > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}
