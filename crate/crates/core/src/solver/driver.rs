use super::state::SolverState;
use super::step::{cd_update, fbcd_update, greedy_index, madbcd_update, mrbgs_update, StepOutcome};
use super::{
    compute_rse, ConvergenceReport, IterationRecord, Method, MethodParams, SolverError, StopReason,
    StoppingRule,
};
use crate::matrix::norm2;
use crate::problems::ProblemInstance;
use std::time::Instant;

/// Steps between from-scratch recomputations of `r` and `w`.
pub const DEFAULT_REFRESH_INTERVAL: usize = 50;

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Initial guess; zero when `None`.
    pub x0: Option<Vec<f64>>,
    pub record_blocks: bool,
    pub record_iterates: bool,
    pub residual_refresh: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            x0: None,
            record_blocks: false,
            record_iterates: false,
            residual_refresh: DEFAULT_REFRESH_INTERVAL,
        }
    }
}

/// Runs `params.method` from `x^(0) = x^(1) = 0` until a limit fires.
pub fn run_solver(
    problem: &ProblemInstance,
    params: &MethodParams,
    stop: &StoppingRule,
) -> Result<ConvergenceReport, SolverError> {
    run_solver_with(problem, params, stop, &RunOptions::default())
}

pub fn run_solver_with(
    problem: &ProblemInstance,
    params: &MethodParams,
    stop: &StoppingRule,
    opts: &RunOptions,
) -> Result<ConvergenceReport, SolverError> {
    params.validate()?;
    stop.validate()?;
    if opts.residual_refresh == 0 {
        return Err(SolverError::InvalidParameter(
            "residual refresh interval must be positive".into(),
        ));
    }
    let a = &problem.a;
    let b = &problem.b;
    let n = a.cols();
    let x_star = problem.x_star.as_deref();
    if let Some(xs) = x_star {
        compute_rse(xs, xs)?;
    }

    let rse_threshold = if x_star.is_some() {
        stop.rse_threshold
    } else {
        None
    };
    let mut gradient_fallback = false;
    let mut gradient_threshold = None;
    if x_star.is_none() {
        if stop.rse_threshold.is_some() {
            match stop.gradient_threshold {
                Some(t) => {
                    gradient_fallback = true;
                    gradient_threshold = Some(t);
                    log::warn!(
                        "{}: no ground truth, stopping on ||A^T r|| / ||A^T b|| <= {t:e}",
                        problem.label
                    );
                }
                None => return Err(SolverError::MissingSolution),
            }
        } else {
            gradient_threshold = stop.gradient_threshold;
        }
    }
    let atb_norm = if gradient_threshold.is_some() {
        norm2(&a.transpose_matvec(b)?)
    } else {
        0.0
    };

    let (column_norms, frobenius) = if params.method == Method::Fbcd {
        (a.column_norms(), a.frobenius_norm())
    } else {
        (Vec::new(), 0.0)
    };
    let b_norm = norm2(b);

    let mut state = SolverState::new(a, b, opts.x0.as_deref())?;
    let mut records = Vec::new();
    let mut blocks = opts.record_blocks.then(Vec::new);
    let mut iterates = opts.record_iterates.then(Vec::new);
    let mut max_drift: f64 = 0.0;
    let mut s = vec![0.0; n];

    let start = Instant::now();
    let stop_reason = loop {
        a.transpose_matvec_into(&state.residual, &mut s)?;
        let s_norm = norm2(&s);
        let rse = match x_star {
            Some(xs) => Some(compute_rse(&state.x, xs)?),
            None => None,
        };
        let elapsed = start.elapsed().as_secs_f64();
        records.push(IterationRecord {
            k: state.k,
            rse,
            normal_residual: s_norm,
            block_size: 0,
            elapsed_s: elapsed,
            step: None,
        });
        if let Some(it) = iterates.as_mut() {
            it.push(state.x.clone());
        }

        if !s_norm.is_finite() || rse.is_some_and(|v| !v.is_finite()) {
            break StopReason::Diverged;
        }
        if let (Some(t), Some(v)) = (rse_threshold, rse) {
            if v < t {
                break StopReason::RseThreshold;
            }
        }
        if s_norm == 0.0 {
            break StopReason::Stationary;
        }
        if let Some(t) = gradient_threshold {
            if atb_norm == 0.0 || s_norm / atb_norm <= t {
                break StopReason::GradientThreshold;
            }
        }
        if stop.max_iterations.is_some_and(|m| state.k >= m) {
            break StopReason::MaxIterations;
        }
        if stop.time_budget.is_some_and(|t| elapsed >= t) {
            break StopReason::TimeBudget;
        }

        let outcome = match params.method {
            Method::Madbcd => madbcd_update(&mut state, a, &s, params.beta)?,
            Method::Fbcd => fbcd_update(&mut state, a, &s, &column_norms, frobenius)?,
            Method::Cd => cd_update(&mut state, a, &s, greedy_index(&s))?,
            Method::Mrbgs => mrbgs_update(&mut state, a, &s, params.mrbgs_fraction)?,
        };
        match outcome {
            StepOutcome::Stationary => break StopReason::Stationary,
            StepOutcome::Advanced { stats, block } => {
                let last = records.last_mut().expect("record pushed above");
                last.block_size = stats.block_size;
                last.step = Some(stats);
                if let Some(bl) = blocks.as_mut() {
                    bl.push(block);
                }
            }
        }
        if state.k % opts.residual_refresh == 0 {
            let drift = state.refresh(a, b)?;
            let rel = if b_norm > 0.0 { drift / b_norm } else { drift };
            max_drift = max_drift.max(rel);
        }
    };
    let solve_seconds = start.elapsed().as_secs_f64();
    log::debug!(
        "{} on {}: {} after {} iterations ({solve_seconds:.3}s)",
        params.method,
        problem.label,
        stop_reason,
        state.k
    );

    Ok(ConvergenceReport {
        method: params.method,
        beta: params.beta,
        records,
        iterations: state.k,
        x: state.x,
        stop_reason,
        solve_seconds,
        blocks,
        iterates,
        max_residual_drift: max_drift,
        gradient_fallback,
    })
}
