//! `dks`: solve, sweep, verify and score densest-k-subgraph instances.
//!
//! Exit codes: 0 success, 1 verify failure, 2 bad flags or arguments,
//! 3 I/O or malformed input, 4 solver failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dks_core::metrics::{read_selection_file, score_selection, write_records, write_report};
use dks_core::oracle::family::test_family;
use dks_core::oracle::MAX_CLIQUE_N;
use dks_core::theory::{self, SuiteReport};
use dks_core::{
    load_edge_list, run_solver, run_sweep, DksError, ExperimentRecord, Graph, ReportFormat, SolverKind,
    SolverSettings, StepRule, SweepSpec,
};

#[derive(Parser)]
#[command(name = "dks", version, about = "Densest k-subgraph via the diagonally loaded relaxation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the selected vertices.
    Solve(SolveArgs),
    /// Run several solvers over a list of k and write a report.
    Sweep(SweepArgs),
    /// Run the oracle-backed property suites on small graphs.
    Verify(VerifyArgs),
    /// Score an externally produced vertex set.
    Score(ScoreArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StepRuleArg {
    Option1,
    Option2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Suite {
    All,
    Motzkin,
    Rounding,
    Tightness,
    Landscape,
}

#[derive(clap::Args)]
struct GraphArgs {
    /// SNAP-style edge list (`.gz` accepted).
    #[arg(long)]
    graph: PathBuf,
    /// Input lists directed arcs; they are symmetrized either way.
    #[arg(long)]
    directed: bool,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[command(flatten)]
    input: GraphArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value = "fw", value_parser = parse_solver)]
    solver: SolverKind,
    #[arg(long, value_enum, default_value_t = StepRuleArg::Option1)]
    step_rule: StepRuleArg,
    /// Iteration budget (default 1000 for fw, 200 for param).
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Learning rate for the param solver.
    #[arg(long, default_value_t = 3.0)]
    lr: f64,
    /// Recorded for reproducibility; every solver is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[command(flatten)]
    input: GraphArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    k_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_solver)]
    solvers: Vec<SolverKind>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Dataset name in the report (default: file stem).
    #[arg(long)]
    dataset: Option<String>,
    /// Worker threads; overrides DKS_JOBS (default: available processors).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Largest graph in the exhaustive/random family.
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
}

#[derive(clap::Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: GraphArgs,
    /// One original vertex id per line.
    #[arg(long)]
    selection: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Solver name recorded in the output.
    #[arg(long, default_value = "external")]
    name: String,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: DksError| e.to_string())
}

/// An error with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<DksError> for Failure {
    fn from(e: DksError) -> Self {
        let code = match e {
            DksError::Domain(_) | DksError::Config(_) | DksError::Size(_) => 2,
            DksError::Io(_) | DksError::Parse { .. } | DksError::EmptyGraph | DksError::Csv(_) | DksError::Json(_) => 3,
            DksError::Precondition(_) | DksError::NonFinite(_) | DksError::Internal(_) => 4,
        };
        Self { code, message: e.to_string() }
    }
}

fn load(args: &GraphArgs) -> Result<Graph, Failure> {
    load_edge_list(&args.graph, args.directed)
        .map_err(|e| Failure { code: 3, message: format!("{}: {e}", args.graph.display()) })
}

#[derive(Serialize)]
struct SolveOutput {
    solver: String,
    k: usize,
    lambda: f64,
    vertices: Vec<u64>,
    normalized_density: f64,
    objective: f64,
    iterations: usize,
    converged: bool,
    integral_before_projection: bool,
    final_gap: Option<f64>,
    wall_time_s: f64,
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let g = load(&args.input)?;
    let mut settings = SolverSettings::default();
    settings.fw.step_rule = match args.step_rule {
        StepRuleArg::Option1 => StepRule::OptionI,
        StepRuleArg::Option2 => StepRule::OptionII,
    };
    if let Some(it) = args.max_iters {
        settings.fw.max_iters = it;
        settings.param.max_iters = it;
    }
    if let Some(tol) = args.gap_tol {
        settings.fw.gap_tol = tol;
    }
    settings.param.learning_rate = args.lr;
    settings.fw.validate()?;
    settings.param.validate()?;

    let report = run_solver(args.solver, &g, args.k, args.lambda, &settings)?;
    let sel = &report.selection;
    let out = SolveOutput {
        solver: report.solver.to_string(),
        k: args.k,
        lambda: args.lambda,
        vertices: sel.vertices.iter().map(|&v| g.label(v)).collect(),
        normalized_density: sel.normalized_density,
        objective: sel.objective_at_lambda,
        iterations: report.iterations,
        converged: report.converged,
        integral_before_projection: report.integral,
        final_gap: report.final_gap,
        wall_time_s: report.wall_time,
    };
    match args.output {
        Output::Json => println!("{}", serde_json::to_string_pretty(&out).map_err(DksError::from)?),
        Output::Text => {
            let ids: Vec<String> = out.vertices.iter().map(u64::to_string).collect();
            println!("solver: {}", out.solver);
            println!("k: {}  lambda: {}", out.k, out.lambda);
            println!("vertices: {}", ids.join(" "));
            println!("normalized density: {}", out.normalized_density);
            println!("objective: {}", out.objective);
            println!("iterations: {}  converged: {}", out.iterations, out.converged);
            println!("integral before projection: {}", out.integral_before_projection);
            if let Some(gap) = out.final_gap {
                println!("final gap: {gap:e}");
            }
            println!("wall time: {:.6} s", out.wall_time_s);
        }
    }
    Ok(())
}

fn jobs(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(j) = flag {
        return Ok(j);
    }
    match std::env::var("DKS_JOBS") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::usage(format!("DKS_JOBS={v:?} is not a thread count"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn dataset_name(path: &Path) -> String {
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("graph");
    name.trim_end_matches(".gz").trim_end_matches(".txt").to_string()
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let jobs = jobs(args.jobs)?;
    if jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    let g = load(&args.input)?;
    let dataset = args.dataset.unwrap_or_else(|| dataset_name(&args.input.graph));
    let spec = SweepSpec {
        dataset: &dataset,
        lambda: args.lambda,
        k_values: &args.k_list,
        solvers: &args.solvers,
        settings: SolverSettings::default(),
        jobs,
    };
    let records = run_sweep(&g, &spec)?;
    let format = match args.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Json => ReportFormat::Json,
    };
    write_report(&records, &args.out, format)
        .map_err(|e| Failure { code: 3, message: format!("{}: {e}", args.out.display()) })?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    println!("wrote {} records to {} ({failed} failed)", records.len(), args.out.display());
    if failed > 0 {
        for r in records.iter().filter(|r| !r.is_ok()) {
            eprintln!("{} k={}: {}", r.solver, r.k, r.status);
        }
        return Err(Failure { code: 4, message: format!("{failed} solver runs failed") });
    }
    Ok(())
}

fn print_suite(r: &SuiteReport) {
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    println!("{verdict} {}: {} checks, {} failures; {}", r.name, r.checked, r.failures, r.detail);
    if let Some(c) = &r.counterexample {
        println!("minimal failing instance:\n{c}");
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    if !(1..=MAX_CLIQUE_N).contains(&args.max_n) {
        return Err(Failure::usage(format!("--max-n must lie in 1..={MAX_CLIQUE_N}")));
    }
    let random = if args.max_n >= 7 { 50 } else { 0 };
    let family = test_family(args.max_n, random, args.seed);
    let want = |s: Suite| args.suite == Suite::All || args.suite == s;

    let mut reports = Vec::new();
    if want(Suite::Motzkin) {
        reports.push(theory::motzkin_suite(&family, &[0.0, 0.25, 0.5, 0.75, 1.0], 8, args.seed)?);
    }
    if want(Suite::Rounding) {
        reports.push(theory::rounding_suite(2000, 50, &[1.0, 1.5, 2.0], args.seed)?);
    }
    if want(Suite::Tightness) {
        let small: Vec<Graph> = family.iter().filter(|g| g.n() <= 10).cloned().collect();
        reports.push(theory::tightness_suite(&small, 200, args.seed)?);
        // Below λ = 1 the relaxation must be strictly loose on k < ω.
        reports.push(theory::relaxation_gap_suite(&family, &[0.5], 8, args.seed)?);
    }
    if want(Suite::Landscape) {
        reports.push(theory::landscape_suite(1000, 30, 1.5, args.seed)?);
    }
    for r in &reports {
        print_suite(r);
    }
    if reports.iter().all(SuiteReport::passed) {
        Ok(())
    } else {
        Err(Failure { code: 1, message: "property suite failed".into() })
    }
}

fn cmd_score(args: ScoreArgs) -> Result<(), Failure> {
    let g = load(&args.input)?;
    let vertices = read_selection_file(&args.selection, &g)
        .map_err(|e| Failure { code: 3, message: format!("{}: {e}", args.selection.display()) })?;
    let record: ExperimentRecord =
        score_selection(&g, &dataset_name(&args.input.graph), &args.name, vertices, args.lambda)?;
    match args.output {
        Output::Json => {
            write_records(std::slice::from_ref(&record), std::io::stdout().lock(), ReportFormat::Json)?;
        }
        Output::Text => {
            println!("k: {}", record.k);
            println!("normalized density: {}", record.normalized_density);
            println!("objective: {}", record.objective);
            match record.upper_bound {
                Some(b) => println!("density upper bound: {b}"),
                None => println!("density upper bound: n/a (k < 2)"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let rendered = e.render().to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Score(a) => cmd_score(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
