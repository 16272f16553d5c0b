//! `madbcd` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure
//! (rank deficiency, audit violation), 3 a run stopped without converging.

use clap::{Args, Parser, Subcommand};
use madbcd::bench::{
    default_beta_grid, emit_outputs, run_experiment, sweep_beta, write_sweep_csv, BenchError,
    BenchRow, ExperimentConfig, ExperimentOutcome, MethodSpec, ProblemSpec, StopSpec,
};
use madbcd::oracle::{contraction_audit, global_bound_audit, minimum_alpha, OracleError};
use madbcd::problems::write_bundle;
use madbcd::sketch::{cs_prepare, SketchError};
use madbcd::solver::{run_solver_with, Method, MethodParams, RunOptions, SolverError};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "madbcd",
    version,
    about = "Block coordinate descent least-squares solvers and benchmarks"
)]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem instance with one method.
    Solve(SolveArgs),
    /// Run an experiment described by a TOML config.
    Bench(BenchArgs),
    /// Iteration counts of mADBCD over a grid of momentum values.
    SweepBeta(SweepArgs),
    /// Run mADBCD with full history and check it against the convergence
    /// bounds.
    Verify(VerifyArgs),
    /// Write a problem instance as a bundle directory.
    Gen(GenArgs),
}

fn parse_problem(s: &str) -> Result<ProblemSpec, String> {
    s.parse().map_err(|e: BenchError| e.to_string())
}

#[derive(Args, Clone)]
struct StopArgs {
    /// Stop once the relative squared error drops below this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_it: usize,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

impl StopArgs {
    fn spec(&self) -> StopSpec {
        StopSpec {
            rse: Some(self.tol),
            max_iterations: Some(self.max_it),
            time_budget: self.time_budget,
            ..StopSpec::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// gaussian:MxN, sparse:MxN:density, identity:N, tomo:N[:angles:detectors[:phantom]],
    /// mtx:path[:t], bundle:path[:t], or a path.
    #[arg(long, value_parser = parse_problem)]
    problem: ProblemSpec,
    /// cd, fbcd, mrbgs or madbcd.
    #[arg(long, default_value = "madbcd")]
    method: Method,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// MRBGS threshold fraction.
    #[arg(long)]
    fraction: Option<f64>,
    /// Sketch to `d = factor * n` rows first (mADBCD only).
    #[arg(long)]
    d_factor: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    stop: StopArgs,
    /// Directory for summary.csv, the convergence curve and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Time methods one at a time (the default) or, with `=false`, run
    /// them in parallel.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    serial_timing: Option<bool>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_parser = parse_problem)]
    problem: ProblemSpec,
    /// Comma-separated values; default 0, 0.05, ..., 0.9.
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long)]
    d_factor: Option<f64>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    stop: StopArgs,
    /// CSV file for the sweep table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_problem)]
    problem: ProblemSpec,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Audit the sketched system with `d = factor * n` rows.
    #[arg(long)]
    d_factor: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_it: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_problem)]
    problem: ProblemSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Solver(SolverError::InvalidParameter(_)) => Failure::usage(e.to_string()),
            BenchError::Solver(_) | BenchError::Matrix(_) | BenchError::Speedup(_) => {
                Failure::numerical(e.to_string())
            }
            BenchError::Sketch(SketchError::Matrix(_)) => Failure::numerical(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::numerical(e.to_string())
    }
}

fn print_rows(rows: &[BenchRow]) {
    println!(
        "{:<34} {:>6} {:>10} {:>12} {:>12} {:>9}",
        "method", "runs", "conv", "mean IT", "total s", "speedup"
    );
    for r in rows {
        println!(
            "{:<34} {:>6} {:>10} {:>12.1} {:>12.4} {:>9}",
            r.label,
            r.runs,
            r.converged_runs,
            r.mean_it,
            r.mean_total_s,
            r.speedup.map_or("-".into(), |s| format!("{s:.2}"))
        );
    }
}

fn convergence_code(outcome: &ExperimentOutcome) -> u8 {
    if outcome.runs.iter().all(|r| r.report.converged()) {
        0
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let mut spec = MethodSpec::new(args.method, args.beta);
    spec.fraction = args.fraction;
    if args.d_factor.is_some() && args.method != Method::Madbcd {
        return Err(Failure::usage(
            "--d-factor applies to the mADBCD method only",
        ));
    }
    spec.sketch_factor = args.d_factor;
    let config = ExperimentConfig {
        name: "solve".into(),
        problem: args.problem,
        methods: vec![spec],
        stop: args.stop.spec(),
        repeats: 1,
        seed: args.seed,
        serial_timing: true,
        output_dir: args.out.clone(),
    };
    let outcome = run_experiment(&config)?;
    let run = &outcome.runs[0];
    let rep = &run.report;
    println!("method     {}", run.label);
    println!(
        "stop       {} after {} iterations",
        rep.stop_reason, rep.iterations
    );
    match rep.final_rse() {
        Some(e) => println!("rse        {e:.3e}"),
        None => println!("rse        n/a (no reference solution)"),
    }
    if let Some(last) = rep.records.last() {
        println!("|A^T r|    {:.3e}", last.normal_residual);
    }
    println!(
        "time       {:.4} s (sketch {:.4} s, solve {:.4} s)",
        run.total_seconds(),
        run.prep_seconds,
        rep.solve_seconds
    );
    if let Some(dir) = &args.out {
        emit_outputs(&outcome, dir)?;
        println!("outputs    {}", dir.display());
    }
    Ok(convergence_code(&outcome))
}

fn bench(args: BenchArgs) -> Result<u8, Failure> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if let Some(r) = args.repeats {
        config.repeats = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(s) = args.serial_timing {
        config.serial_timing = s;
    }
    let dir = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(&config.name));
    let outcome = run_experiment(&config)?;
    print_rows(&outcome.rows);
    emit_outputs(&outcome, &dir)?;
    println!("outputs in {}", dir.display());
    // non-converged runs are flagged in the outputs; only single runs map
    // them to an exit code
    Ok(0)
}

fn sweep(args: SweepArgs) -> Result<u8, Failure> {
    let betas = args.betas.unwrap_or_else(default_beta_grid);
    let stop = args.stop.spec().rule();
    let points = sweep_beta(
        &args.problem,
        &betas,
        args.d_factor,
        args.repeats,
        args.seed,
        &stop,
    )?;
    println!(
        "{:>6} {:>6} {:>10} {:>12}",
        "beta", "conv", "mean IT", "solve s"
    );
    for p in &points {
        println!(
            "{:>6.2} {:>3}/{:<2} {:>10.1} {:>12.4}",
            p.beta, p.converged_runs, p.runs, p.mean_it, p.mean_solve_s
        );
    }
    let best = points
        .iter()
        .filter(|p| p.converged_runs == p.runs)
        .min_by(|a, b| a.mean_it.total_cmp(&b.mean_it));
    match best {
        Some(p) => println!("best beta {:.2} ({:.1} iterations)", p.beta, p.mean_it),
        None => println!("no beta converged on every repeat"),
    }
    if let Some(path) = &args.out {
        write_sweep_csv(path, &points)?;
    }
    Ok(if best.is_some() {
        0
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let base = args.problem.realize(args.seed)?;
    let problem = match args.d_factor {
        Some(f) => {
            let d = ((f * base.cols() as f64).round() as usize).max(1);
            cs_prepare(&base, d, madbcd::bench::sketch_seed(args.seed, d))
                .map_err(BenchError::from)?
                .0
        }
        None => base,
    };
    let Some(x_star) = problem.x_star.clone() else {
        return Err(Failure::usage(
            "verify needs a problem with a known solution",
        ));
    };
    let params = MethodParams::madbcd(args.beta);
    let stop = madbcd::solver::StoppingRule::rse(args.tol, args.max_it);
    let opts = RunOptions {
        record_blocks: true,
        record_iterates: true,
        ..RunOptions::default()
    };
    let rep = run_solver_with(&problem, &params, &stop, &opts).map_err(BenchError::from)?;
    println!(
        "{}: {} x {}, {} after {} iterations",
        problem.label,
        problem.rows(),
        problem.cols(),
        rep.stop_reason,
        rep.iterations
    );
    let n = problem.cols();
    let identity_failures = rep
        .records
        .iter()
        .filter_map(|r| r.step.as_ref())
        .filter(|s| !s.satisfies_block_identity(n, 1e-12))
        .count();
    println!("block identity failures   {identity_failures}");
    let mut failures = identity_failures;
    if args.beta == 0.0 {
        let v = contraction_audit(&rep, &problem.a, &x_star)?;
        println!("contraction violations    {}", v.len());
        for x in v.iter().take(5) {
            println!("  {x:?}");
        }
        failures += v.len();
    }
    let alpha = minimum_alpha(&rep, &problem.a)?;
    let audit = global_bound_audit(&rep, &problem.a, &x_star)?;
    let b = &audit.bounds;
    println!(
        "min alpha {alpha:.4e}  gamma1 {:.6}  gamma2 {:.3e}  q {:.6}  tau {:.3e}",
        b.gamma1, b.gamma2, b.q, b.tau
    );
    if b.feasible {
        println!("global bound violations   {}", audit.violations.len());
        failures += audit.violations.len();
    } else {
        println!(
            "global bound not claimed: beta {} exceeds the feasible limit {:.4e}",
            args.beta,
            madbcd::oracle::beta_feasible_max(alpha)
        );
    }
    if failures > 0 {
        return Err(Failure::numerical(format!("{failures} audit failures")));
    }
    Ok(if rep.converged() {
        0
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn generate(args: GenArgs) -> Result<u8, Failure> {
    let problem = args.problem.realize(args.seed)?;
    write_bundle(&args.out, &problem).map_err(BenchError::from)?;
    println!(
        "{}: {} x {}, nnz {} written to {}",
        problem.label,
        problem.rows(),
        problem.cols(),
        problem.a.nnz(),
        args.out.display()
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::SweepBeta(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Gen(a) => generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
