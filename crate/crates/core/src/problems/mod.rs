//! Problem instances: generators, tomography, and file ingestion.

mod bundle;
mod generate;
mod market;
mod tomography;

pub use bundle::{read_bundle, write_bundle};
pub use generate::{gen_gaussian_dense, gen_sparse_gaussian, make_consistent_problem};
pub use market::{read_matrix_market, read_matrix_market_str, write_matrix_market, MarketError};
pub use tomography::{gen_tomography, trace_ray, Phantom, TomoGeometry, TomographyInstance};

use crate::matrix::{norm2, Matrix, MatrixError};
use thiserror::Error;

/// Residual tolerance at `x⋆` for a consistent instance, relative to `||b||`.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("column {0} of A is identically zero")]
    ZeroColumn(usize),
    #[error("problem must be overdetermined (m >= n), got {rows}x{cols}")]
    Underdetermined { rows: usize, cols: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("instance flagged consistent but ||b - A x*|| = {residual:e} exceeds {limit:e}")]
    Inconsistent { residual: f64, limit: f64 },
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

/// `(A, b)` with an optional ground truth.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
    pub label: String,
    /// Generator parameters or source path.
    pub provenance: String,
    /// `b = A x⋆` by construction.
    pub consistent: bool,
}

impl ProblemInstance {
    /// Builds and validates an instance.
    pub fn new(
        a: Matrix,
        b: Vec<f64>,
        x_star: Option<Vec<f64>>,
        label: impl Into<String>,
        provenance: impl Into<String>,
        consistent: bool,
    ) -> Result<Self, ProblemError> {
        let p = Self {
            a,
            b,
            x_star,
            label: label.into(),
            provenance: provenance.into(),
            consistent,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// Checks shapes, the no-zero-column rule and, for consistent
    /// instances, the residual at `x⋆`.
    pub fn validate(&self) -> Result<(), ProblemError> {
        let (m, n) = (self.a.rows(), self.a.cols());
        if m < n {
            return Err(ProblemError::Underdetermined { rows: m, cols: n });
        }
        if self.b.len() != m {
            return Err(MatrixError::DimensionMismatch {
                expected: m,
                actual: self.b.len(),
            }
            .into());
        }
        if let Some(j) = self.a.first_zero_column() {
            return Err(ProblemError::ZeroColumn(j));
        }
        if let Some(xs) = &self.x_star {
            let ax = self.a.matvec(xs)?;
            if self.consistent {
                let res: Vec<f64> = self.b.iter().zip(&ax).map(|(p, q)| p - q).collect();
                let residual = norm2(&res);
                let limit = CONSISTENCY_TOLERANCE * norm2(&self.b);
                if residual > limit {
                    return Err(ProblemError::Inconsistent { residual, limit });
                }
            }
        }
        Ok(())
    }
}
