use super::SolverError;
use crate::matrix::{norm2, Matrix, MatrixError};

/// Iterate pair and the residual quantities carried between steps.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    /// `x^(k)`.
    pub x: Vec<f64>,
    /// `x^(k-1)`.
    pub x_prev: Vec<f64>,
    /// `r^(k) = b - A x^(k)`, updated incrementally.
    pub residual: Vec<f64>,
    /// `w^(k) = A (x^(k) - x^(k-1))`, updated incrementally.
    pub diff_image: Vec<f64>,
    pub k: usize,
}

impl SolverState {
    /// Start with `x^(0) = x^(1) = x0`, or zero when `x0` is `None`.
    pub fn new(a: &Matrix, b: &[f64], x0: Option<&[f64]>) -> Result<Self, SolverError> {
        let n = a.cols();
        let x = match x0 {
            Some(v) => v.to_vec(),
            None => vec![0.0; n],
        };
        Self::from_iterates(a, b, x.clone(), x, 0)
    }

    /// State at an arbitrary iterate pair; residual and difference image are
    /// computed from scratch.
    pub fn from_iterates(
        a: &Matrix,
        b: &[f64],
        x: Vec<f64>,
        x_prev: Vec<f64>,
        k: usize,
    ) -> Result<Self, SolverError> {
        if b.len() != a.rows() {
            return Err(MatrixError::DimensionMismatch {
                expected: a.rows(),
                actual: b.len(),
            }
            .into());
        }
        if x_prev.len() != x.len() {
            return Err(MatrixError::DimensionMismatch {
                expected: x.len(),
                actual: x_prev.len(),
            }
            .into());
        }
        let mut state = Self {
            residual: vec![0.0; a.rows()],
            diff_image: vec![0.0; a.rows()],
            x,
            x_prev,
            k,
        };
        state.refresh(a, b)?;
        Ok(state)
    }

    /// Recomputes `r` and `w` from the iterates. Returns the drift
    /// `||r_incremental - (b - A x)||` that was discarded.
    pub fn refresh(&mut self, a: &Matrix, b: &[f64]) -> Result<f64, SolverError> {
        let ax = a.matvec(&self.x)?;
        let mut drift_sq = 0.0;
        for ((r, bi), axi) in self.residual.iter_mut().zip(b).zip(&ax) {
            let fresh = bi - axi;
            drift_sq += (*r - fresh) * (*r - fresh);
            *r = fresh;
        }
        let diff: Vec<f64> = self
            .x
            .iter()
            .zip(&self.x_prev)
            .map(|(p, q)| p - q)
            .collect();
        if diff.iter().all(|&v| v == 0.0) {
            self.diff_image.iter_mut().for_each(|v| *v = 0.0);
        } else {
            a.matvec_into(&diff, &mut self.diff_image)?;
        }
        Ok(drift_sq.sqrt())
    }

    pub fn residual_norm(&self) -> f64 {
        norm2(&self.residual)
    }
}
