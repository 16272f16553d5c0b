use super::config::{ExperimentConfig, MethodSpec, ProblemSpec};
use super::BenchError;
use crate::problems::ProblemInstance;
use crate::rng::derive_seed;
use crate::sketch::cs_prepare;
use crate::solver::{
    run_solver_with, ConvergenceReport, Method, MethodParams, RunOptions, StoppingRule,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One method on one problem realization.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub label: String,
    pub method_index: usize,
    pub repeat: usize,
    /// Seed of the problem realization.
    pub seed: u64,
    /// Sketch seed and rows, for sketched runs.
    pub sketch: Option<(u64, usize)>,
    pub prep_seconds: f64,
    pub report: ConvergenceReport,
}

impl RunRecord {
    pub fn total_seconds(&self) -> f64 {
        self.prep_seconds + self.report.solve_seconds
    }
}

/// Averaged results for one method column. Serialized as a `summary.csv`
/// line in field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub label: String,
    pub method: String,
    pub beta: Option<f64>,
    pub sketch_d: Option<usize>,
    pub runs: usize,
    pub converged_runs: usize,
    pub mean_it: f64,
    pub mean_total_s: f64,
    pub mean_prep_s: Option<f64>,
    pub mean_solve_s: f64,
    /// `mean_total_s` over the plain mADBCD row's `mean_total_s`.
    pub speedup: Option<f64>,
}

impl BenchRow {
    pub fn all_converged(&self) -> bool {
        self.converged_runs == self.runs
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub rows: Vec<BenchRow>,
    pub runs: Vec<RunRecord>,
}

/// `cpu_method / cpu_madbcd`.
pub fn compute_speedup(cpu_method: f64, cpu_madbcd: f64) -> Result<f64, BenchError> {
    if !(cpu_madbcd > 0.0) {
        return Err(BenchError::Speedup(cpu_madbcd));
    }
    Ok(cpu_method / cpu_madbcd)
}

/// Sketch seed for a realization: the same `(seed, d)` always gives the
/// same sketched problem, whichever method column asks for it.
pub fn sketch_seed(problem_seed: u64, d: usize) -> u64 {
    derive_seed(problem_seed, 1_000_000 + d as u64)
}

fn run_cell(
    problem: &ProblemInstance,
    spec: &MethodSpec,
    index: usize,
    repeat: usize,
    seed: u64,
    stop: &StoppingRule,
) -> Result<RunRecord, BenchError> {
    let params = spec.params();
    let opts = RunOptions::default();
    let (report, prep_seconds, sketch) = match spec.sketch_rows(problem.cols()) {
        Some(d) => {
            let sketch_seed = sketch_seed(seed, d);
            let (sketched, prep) = cs_prepare(problem, d, sketch_seed)?;
            let report = run_solver_with(&sketched, &params, stop, &opts)?;
            (report, prep, Some((sketch_seed, d)))
        }
        None => (run_solver_with(problem, &params, stop, &opts)?, 0.0, None),
    };
    if !report.converged() {
        log::warn!(
            "{} on {} (repeat {repeat}): did not converge ({}, {} iterations)",
            spec.display_label(),
            problem.label,
            report.stop_reason,
            report.iterations
        );
    }
    Ok(RunRecord {
        label: spec.display_label(),
        method_index: index,
        repeat,
        seed,
        sketch,
        prep_seconds,
        report,
    })
}

/// Runs every method on `repeats` realizations of the problem. A run that
/// hits a limit without converging is kept and counted, not treated as an
/// error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, BenchError> {
    config.validate()?;
    let stop = config.stop.rule();
    let mut runs = Vec::with_capacity(config.repeats * config.methods.len());
    let fixed = if config.problem.is_random() {
        None
    } else {
        Some(config.problem.realize(config.seed)?)
    };
    for repeat in 0..config.repeats {
        let seed = derive_seed(config.seed, repeat as u64);
        let realized;
        let problem = match &fixed {
            Some(p) => p,
            None => {
                realized = config.problem.realize(seed)?;
                &realized
            }
        };
        let cells: Vec<Result<RunRecord, BenchError>> = if config.serial_timing {
            config
                .methods
                .iter()
                .enumerate()
                .map(|(i, m)| run_cell(problem, m, i, repeat, seed, &stop))
                .collect()
        } else {
            config
                .methods
                .par_iter()
                .enumerate()
                .map(|(i, m)| run_cell(problem, m, i, repeat, seed, &stop))
                .collect()
        };
        for c in cells {
            runs.push(c?);
        }
    }
    let rows = aggregate(&config.methods, &runs)?;
    Ok(ExperimentOutcome {
        config: config.clone(),
        rows,
        runs,
    })
}

/// Arithmetic means per method, then speed-ups against the first plain
/// mADBCD row.
pub fn aggregate(methods: &[MethodSpec], runs: &[RunRecord]) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::with_capacity(methods.len());
    for (i, spec) in methods.iter().enumerate() {
        let cell: Vec<&RunRecord> = runs.iter().filter(|r| r.method_index == i).collect();
        if cell.is_empty() {
            return Err(BenchError::Config(format!("no runs for method {i}")));
        }
        let k = cell.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| cell.iter().map(|r| f(r)).sum::<f64>() / k;
        let sketched = spec.sketch_factor.is_some();
        rows.push(BenchRow {
            label: spec.display_label(),
            method: if sketched {
                "CS-mADBCD".into()
            } else {
                spec.method.name().into()
            },
            beta: (spec.method == Method::Madbcd).then_some(spec.beta),
            sketch_d: cell[0].sketch.map(|(_, d)| d),
            runs: cell.len(),
            converged_runs: cell.iter().filter(|r| r.report.converged()).count(),
            mean_it: mean(&|r| r.report.iterations as f64),
            mean_total_s: mean(&|r| r.total_seconds()),
            mean_prep_s: sketched.then(|| mean(&|r| r.prep_seconds)),
            mean_solve_s: mean(&|r| r.report.solve_seconds),
            speedup: None,
        });
    }
    let reference = methods
        .iter()
        .position(|m| m.method == Method::Madbcd && m.sketch_factor.is_none())
        .map(|i| rows[i].mean_total_s);
    if let Some(base) = reference {
        for row in rows.iter_mut() {
            row.speedup = Some(compute_speedup(row.mean_total_s, base)?);
        }
    }
    Ok(rows)
}

/// One point of a momentum sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub runs: usize,
    pub converged_runs: usize,
    pub mean_it: f64,
    pub mean_solve_s: f64,
}

/// The default sweep grid `0, 0.05, ..., 0.9`.
pub fn default_beta_grid() -> Vec<f64> {
    (0..=18).map(|i| i as f64 / 20.0).collect()
}

/// mADBCD (optionally sketched) at every `β` of the grid, on the same
/// realizations.
pub fn sweep_beta(
    problem: &ProblemSpec,
    betas: &[f64],
    sketch_factor: Option<f64>,
    repeats: usize,
    seed: u64,
    stop: &StoppingRule,
) -> Result<Vec<SweepPoint>, BenchError> {
    if repeats == 0 || betas.is_empty() {
        return Err(BenchError::Config(
            "sweep needs at least one beta and one repeat".into(),
        ));
    }
    for &b in betas {
        MethodParams::madbcd(b).validate()?;
    }
    let mut totals = vec![(0usize, 0usize, 0.0f64, 0.0f64); betas.len()];
    for repeat in 0..repeats {
        let rseed = derive_seed(seed, repeat as u64);
        let base = problem.realize(rseed)?;
        let (p, _) = match sketch_factor {
            Some(f) => {
                let d = ((f * base.cols() as f64).round() as usize).max(1);
                let (sk, prep) = cs_prepare(&base, d, sketch_seed(rseed, d))?;
                (sk, prep)
            }
            None => (base, 0.0),
        };
        for (i, &b) in betas.iter().enumerate() {
            let rep = run_solver_with(&p, &MethodParams::madbcd(b), stop, &RunOptions::default())?;
            let t = &mut totals[i];
            t.0 += 1;
            t.1 += usize::from(rep.converged());
            t.2 += rep.iterations as f64;
            t.3 += rep.solve_seconds;
        }
    }
    Ok(betas
        .iter()
        .zip(totals)
        .map(|(&beta, (runs, conv, it, secs))| SweepPoint {
            beta,
            runs,
            converged_runs: conv,
            mean_it: it / runs as f64,
            mean_solve_s: secs / runs as f64,
        })
        .collect())
}
