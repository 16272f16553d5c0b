//! Checks a recorded run against the per-step and global rate bounds.

use super::bounds::{SpectralOracle, TheoremBounds};
use super::OracleError;
use crate::matrix::{norm2, Matrix};
use crate::solver::ConvergenceReport;

/// Relative slack allowed on every bound comparison.
pub const AUDIT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// `F^(k) > (1 - α_{k-1}) F^(k-1)`; `k` is the iterate that broke it.
    Contraction { k: usize, ratio: f64, factor: f64 },
    /// `σ_max(A_τ) < σ_min(A)` for the block leaving iterate `k`.
    Interlacing {
        k: usize,
        block_sigma_max: f64,
        sigma_min: f64,
    },
    /// `F^(k) > q^k (1+τ) F^(0)`.
    GlobalBound { k: usize, energy: f64, bound: f64 },
}

/// `||x - x⋆||²_{A^T A} = ||A (x - x⋆)||²`.
pub fn energy_error(a: &Matrix, x: &[f64], x_star: &[f64]) -> Result<f64, OracleError> {
    let d: Vec<f64> = x.iter().zip(x_star).map(|(p, q)| p - q).collect();
    Ok(norm2(&a.matvec(&d)?).powi(2))
}

fn history(
    report: &ConvergenceReport,
) -> Result<(&[crate::block::BlockIndexSet], &[Vec<f64>]), OracleError> {
    let blocks = report
        .blocks
        .as_deref()
        .ok_or(OracleError::MissingHistory("block"))?;
    let iterates = report
        .iterates
        .as_deref()
        .ok_or(OracleError::MissingHistory("iterate"))?;
    if iterates.len() < blocks.len() + 1 {
        return Err(OracleError::MissingHistory("iterate"));
    }
    Ok((blocks, iterates))
}

/// Per-step contraction check for a momentum-free run. Returns every
/// violation found; an empty list means the run is consistent with the
/// bound.
pub fn contraction_audit(
    report: &ConvergenceReport,
    a: &Matrix,
    x_star: &[f64],
) -> Result<Vec<Violation>, OracleError> {
    if report.beta != 0.0 {
        return Err(OracleError::InvalidParameter(format!(
            "contraction audit needs beta = 0, run used {}",
            report.beta
        )));
    }
    let (blocks, iterates) = history(report)?;
    let oracle = SpectralOracle::new(a);
    let mut out = Vec::new();
    let mut f_prev = energy_error(a, &iterates[0], x_star)?;
    for (k, block) in blocks.iter().enumerate() {
        let smax = oracle.block_sigma_max(a, block)?;
        if smax < oracle.sigma_min * (1.0 - AUDIT_SLACK) {
            out.push(Violation::Interlacing {
                k,
                block_sigma_max: smax,
                sigma_min: oracle.sigma_min,
            });
        }
        let alpha = oracle.alpha(a, block)?;
        let factor = 1.0 - alpha;
        let f_next = energy_error(a, &iterates[k + 1], x_star)?;
        if f_next > factor * f_prev * (1.0 + AUDIT_SLACK) {
            out.push(Violation::Contraction {
                k: k + 1,
                ratio: if f_prev > 0.0 {
                    f_next / f_prev
                } else {
                    f64::INFINITY
                },
                factor,
            });
        }
        f_prev = f_next;
    }
    Ok(out)
}

/// Smallest `α_k` over a recorded run.
pub fn minimum_alpha(report: &ConvergenceReport, a: &Matrix) -> Result<f64, OracleError> {
    let blocks = report
        .blocks
        .as_deref()
        .ok_or(OracleError::MissingHistory("block"))?;
    let oracle = SpectralOracle::new(a);
    let mut alpha = f64::INFINITY;
    for block in blocks {
        alpha = alpha.min(oracle.alpha(a, block)?);
    }
    Ok(alpha)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalAudit {
    /// Constants at the worst `α` of the run.
    pub bounds: TheoremBounds,
    pub violations: Vec<Violation>,
}

/// Checks `F^(k) ≤ q^k (1+τ) F^(0)` along the run, with `q` and `τ` taken at
/// the run's smallest `α`. When those constants are infeasible the bound is
/// not claimed and no comparison is made.
pub fn global_bound_audit(
    report: &ConvergenceReport,
    a: &Matrix,
    x_star: &[f64],
) -> Result<GlobalAudit, OracleError> {
    let (_, iterates) = history(report)?;
    let alpha = minimum_alpha(report, a)?;
    let bounds = TheoremBounds::from_alpha(alpha, report.beta);
    let mut violations = Vec::new();
    if bounds.feasible {
        let f0 = energy_error(a, &iterates[0], x_star)?;
        for (k, x) in iterates.iter().enumerate().skip(1) {
            let f = energy_error(a, x, x_star)?;
            let bound = bounds.global_factor(k) * f0;
            if f > bound * (1.0 + AUDIT_SLACK) {
                violations.push(Violation::GlobalBound {
                    k,
                    energy: f,
                    bound,
                });
            }
        }
    }
    Ok(GlobalAudit { bounds, violations })
}
