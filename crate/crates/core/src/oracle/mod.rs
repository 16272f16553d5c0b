//! Reference machinery independent of the iterative solvers: a dense QR
//! least-squares solve, a Jacobi eigensolver for extremal singular values,
//! and evaluators for the convergence-rate constants.

mod audit;
mod bounds;
mod jacobi;
mod qr;

pub use audit::{
    contraction_audit, energy_error, global_bound_audit, minimum_alpha, GlobalAudit, Violation,
};
pub use bounds::{
    beta_feasible_max, q_from_recurrence, theorem31_bounds, theorem41_bounds, CsBounds,
    SpectralOracle, TheoremBounds, RECURRENCE_STEPS,
};
pub use jacobi::{
    dense_extremal_singular_values, gram_extremal_singular_values, symmetric_eigenvalues,
    JACOBI_TOLERANCE,
};
pub use qr::{dense_lsq_solve, reference_lsq_solve, HouseholderQr, RANK_TOLERANCE};

use crate::matrix::MatrixError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("numerically rank deficient at column {column} (|R_jj| = {magnitude:e})")]
    RankDeficient { column: usize, magnitude: f64 },
    #[error("QR needs rows >= cols, got {rows}x{cols}")]
    NotOverdetermined { rows: usize, cols: usize },
    #[error("contraction hypothesis violated: gamma1 + gamma2 = {gamma1} + {gamma2} >= 1")]
    ContractionViolated { gamma1: f64, gamma2: f64 },
    #[error("two-term recurrence exceeded its bound at step {step}")]
    RecurrenceBound { step: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("report is missing the {0} history")]
    MissingHistory(&'static str),
}
