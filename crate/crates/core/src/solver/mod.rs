//! Iterative solvers: greedy CD, FBCD, MRBGS and mADBCD behind one driver.

mod driver;
mod select;
mod state;
mod step;

pub use driver::{run_solver, run_solver_with, RunOptions, DEFAULT_REFRESH_INTERVAL};
pub use select::{select_block_fbcd, select_block_madbcd, select_block_mrbgs};
pub use state::SolverState;
pub use step::{cd_step, fbcd_step, madbcd_step, mrbgs_step, StepOutcome};

use crate::block::BlockIndexSet;
use crate::matrix::MatrixError;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Upper end of the admissible momentum range.
pub const BETA_LIMIT: f64 = 0.9;
pub const DEFAULT_MRBGS_FRACTION: f64 = 0.3;
pub const DEFAULT_RSE_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_GRADIENT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("rank deficiency detected: {0}")]
    RankDeficiency(String),
    #[error("block subproblem on columns {block:?} is rank deficient (|R_jj| = {magnitude:e})")]
    SubproblemRankDeficient { block: Vec<usize>, magnitude: f64 },
    #[error("RSE stopping requires a ground-truth solution")]
    MissingSolution,
    #[error("RSE is undefined for a zero reference solution")]
    ZeroSolution,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cd,
    Fbcd,
    Mrbgs,
    Madbcd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cd => "CD",
            Method::Fbcd => "FBCD",
            Method::Mrbgs => "MRBGS",
            Method::Madbcd => "mADBCD",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cd" => Ok(Method::Cd),
            "fbcd" => Ok(Method::Fbcd),
            "mrbgs" => Ok(Method::Mrbgs),
            "madbcd" => Ok(Method::Madbcd),
            other => Err(SolverError::InvalidParameter(format!(
                "unknown method '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MethodParams {
    pub method: Method,
    pub beta: f64,
    pub mrbgs_fraction: f64,
}

impl MethodParams {
    pub fn madbcd(beta: f64) -> Self {
        Self {
            method: Method::Madbcd,
            beta,
            mrbgs_fraction: DEFAULT_MRBGS_FRACTION,
        }
    }

    pub fn fbcd() -> Self {
        Self {
            method: Method::Fbcd,
            ..Self::madbcd(0.0)
        }
    }

    pub fn cd() -> Self {
        Self {
            method: Method::Cd,
            ..Self::madbcd(0.0)
        }
    }

    pub fn mrbgs(fraction: f64) -> Self {
        Self {
            method: Method::Mrbgs,
            beta: 0.0,
            mrbgs_fraction: fraction,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(0.0..=BETA_LIMIT).contains(&self.beta) {
            return Err(SolverError::InvalidParameter(format!(
                "beta = {} outside [0, {BETA_LIMIT}]",
                self.beta
            )));
        }
        if self.method != Method::Madbcd && self.beta != 0.0 {
            return Err(SolverError::InvalidParameter(format!(
                "{} takes no momentum (beta = {})",
                self.method, self.beta
            )));
        }
        if !(self.mrbgs_fraction > 0.0 && self.mrbgs_fraction <= 1.0) {
            return Err(SolverError::InvalidParameter(format!(
                "MRBGS fraction {} outside (0, 1]",
                self.mrbgs_fraction
            )));
        }
        Ok(())
    }
}

/// Limits that end a run. The first one to fire wins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule {
    /// Stop once `RSE < threshold`. Needs `x⋆`.
    pub rse_threshold: Option<f64>,
    pub max_iterations: Option<usize>,
    /// Seconds of solve-loop wall time.
    pub time_budget: Option<f64>,
    /// `||A^T r|| / ||A^T b|| <= threshold`, used only when `x⋆` is absent.
    pub gradient_threshold: Option<f64>,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            rse_threshold: Some(DEFAULT_RSE_THRESHOLD),
            max_iterations: Some(100_000),
            time_budget: None,
            gradient_threshold: Some(DEFAULT_GRADIENT_THRESHOLD),
        }
    }
}

impl StoppingRule {
    pub fn rse(threshold: f64, max_iterations: usize) -> Self {
        Self {
            rse_threshold: Some(threshold),
            max_iterations: Some(max_iterations),
            ..Self::default()
        }
    }

    /// Runs for a fixed wall-clock budget only.
    pub fn time_budget(seconds: f64) -> Self {
        Self {
            rse_threshold: None,
            max_iterations: None,
            time_budget: Some(seconds),
            gradient_threshold: None,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let finite = |v: Option<f64>| v.is_some_and(|t| t.is_finite() && t > 0.0);
        if !(finite(self.rse_threshold)
            || self.max_iterations.is_some()
            || finite(self.time_budget))
        {
            return Err(SolverError::InvalidParameter(
                "stopping rule needs an RSE threshold, an iteration cap or a time budget".into(),
            ));
        }
        Ok(())
    }
}

/// What one step did.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub block_size: usize,
    /// `c` in `x + cη`; `None` for the block least-squares subsolve.
    pub step_length: Option<f64>,
    /// `η^T s`.
    pub eta_dot_s: f64,
    /// `Σ_{j∈τ} s_j²`, summed independently of `eta_dot_s`.
    pub block_s_norm_sq: f64,
    /// `||s||²`.
    pub s_norm_sq: f64,
}

impl StepStats {
    /// `η^T s = Σ_{j∈τ} s_j² ≥ |τ| ||s||² / n` to relative tolerance `tol`.
    pub fn satisfies_block_identity(&self, n: usize, tol: f64) -> bool {
        let lower = self.block_size as f64 * self.s_norm_sq / n as f64;
        let scale = self.eta_dot_s.abs().max(lower);
        (self.eta_dot_s - self.block_s_norm_sq).abs() <= tol * scale
            && self.eta_dot_s >= lower * (1.0 - tol)
            && self.eta_dot_s > 0.0
    }
}

/// One row of a run's history, taken at iterate `x^(k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub rse: Option<f64>,
    /// `||A^T r^(k)||`.
    pub normal_residual: f64,
    /// `|τ_k|` of the step leaving `x^(k)`; 0 on the final record.
    pub block_size: usize,
    pub elapsed_s: f64,
    pub step: Option<StepStats>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    RseThreshold,
    GradientThreshold,
    /// `A^T r = 0` exactly.
    Stationary,
    MaxIterations,
    TimeBudget,
    /// Non-finite values appeared.
    Diverged,
}

impl StopReason {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            StopReason::RseThreshold | StopReason::GradientThreshold | StopReason::Stationary
        )
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StopReason::RseThreshold => "rse-threshold",
            StopReason::GradientThreshold => "gradient-threshold",
            StopReason::Stationary => "stationary",
            StopReason::MaxIterations => "max-iterations",
            StopReason::TimeBudget => "time-budget",
            StopReason::Diverged => "diverged",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub method: Method,
    pub beta: f64,
    pub records: Vec<IterationRecord>,
    pub x: Vec<f64>,
    pub stop_reason: StopReason,
    /// Number of steps taken.
    pub iterations: usize,
    pub solve_seconds: f64,
    /// `τ_k` per step, when requested.
    pub blocks: Option<Vec<BlockIndexSet>>,
    /// `x^(0), x^(1), ...`, when requested.
    pub iterates: Option<Vec<Vec<f64>>>,
    /// Largest incremental-residual drift seen at a refresh, over `||b||`.
    pub max_residual_drift: f64,
    /// Stopping used `||A^T r|| / ||A^T b||` because `x⋆` was absent.
    pub gradient_fallback: bool,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.stop_reason.is_converged()
    }

    pub fn final_rse(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.rse)
    }
}

/// `||x - x⋆||² / ||x⋆||²`.
pub fn compute_rse(x: &[f64], x_star: &[f64]) -> Result<f64, SolverError> {
    if x.len() != x_star.len() {
        return Err(MatrixError::DimensionMismatch {
            expected: x_star.len(),
            actual: x.len(),
        }
        .into());
    }
    let denom: f64 = x_star.iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return Err(SolverError::ZeroSolution);
    }
    let num: f64 = x.iter().zip(x_star).map(|(p, q)| (p - q) * (p - q)).sum();
    Ok(num / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rse_examples() {
        assert_eq!(compute_rse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(compute_rse(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert!((compute_rse(&[1.0, 3.0], &[1.0, 2.0]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(compute_rse(&[1.0], &[0.0]), Err(SolverError::ZeroSolution));
    }

    #[test]
    fn params_validation() {
        assert!(MethodParams::madbcd(0.5).validate().is_ok());
        assert!(MethodParams::madbcd(0.95).validate().is_err());
        assert!(MethodParams::madbcd(-0.1).validate().is_err());
        let mut p = MethodParams::fbcd();
        p.beta = 0.1;
        assert!(p.validate().is_err());
        assert!(MethodParams::mrbgs(0.0).validate().is_err());
        assert!(MethodParams::mrbgs(1.0).validate().is_ok());
    }

    #[test]
    fn stopping_rule_needs_a_limit() {
        let none = StoppingRule {
            rse_threshold: None,
            max_iterations: None,
            time_budget: None,
            gradient_threshold: Some(1e-8),
        };
        assert!(none.validate().is_err());
        assert!(StoppingRule::default().validate().is_ok());
        assert!(StoppingRule::time_budget(1.0).validate().is_ok());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Cd, Method::Fbcd, Method::Mrbgs, Method::Madbcd] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }
}
