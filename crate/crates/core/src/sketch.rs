//! Count sketch `S = ΦD`, stored as its bucket map and sign diagonal.

use crate::matrix::{DenseMatrix, Matrix, MatrixError, SparseMatrixCsc};
use crate::problems::{ProblemError, ProblemInstance};
use crate::rng::{stream, stream_rng};
use rand::Rng;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SketchError {
    #[error("sketch dimension d = {d} must satisfy 1 <= d <= m = {m}")]
    Dimension { d: usize, m: usize },
    #[error("CS preprocessing needs d < m (got d = {d}, m = {m})")]
    NoCompression { d: usize, m: usize },
    #[error("invalid sketch: {0}")]
    Invalid(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// A `d × m` count sketch. Row `i` of the input lands in bucket
/// `buckets[i]` with sign `signs[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSketch {
    d: usize,
    m: usize,
    buckets: Vec<usize>,
    signs: Vec<f64>,
    seed: u64,
}

impl CountSketch {
    /// Buckets uniform over `0..d` and signs uniform over `±1`, drawn from
    /// separate streams of `seed`.
    pub fn build(d: usize, m: usize, seed: u64) -> Result<Self, SketchError> {
        if d == 0 || d > m {
            return Err(SketchError::Dimension { d, m });
        }
        let mut hr = stream_rng(seed, stream::SKETCH_BUCKETS);
        let buckets = (0..m).map(|_| hr.random_range(0..d)).collect();
        let mut sr = stream_rng(seed, stream::SKETCH_SIGNS);
        let signs = (0..m)
            .map(|_| if sr.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Ok(Self {
            d,
            m,
            buckets,
            signs,
            seed,
        })
    }

    /// The `m × m` identity written as a count sketch.
    pub fn identity(m: usize) -> Self {
        Self {
            d: m,
            m,
            buckets: (0..m).collect(),
            signs: vec![1.0; m],
            seed: 0,
        }
    }

    /// Sketch from an explicit bucket map and signs.
    pub fn from_parts(d: usize, buckets: Vec<usize>, signs: Vec<f64>) -> Result<Self, SketchError> {
        let m = buckets.len();
        if d == 0 || d > m {
            return Err(SketchError::Dimension { d, m });
        }
        if signs.len() != m {
            return Err(SketchError::Invalid(format!(
                "{} signs for {m} buckets",
                signs.len()
            )));
        }
        if let Some(b) = buckets.iter().find(|&&b| b >= d) {
            return Err(SketchError::Invalid(format!(
                "bucket {b} out of range 0..{d}"
            )));
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(SketchError::Invalid("signs must be +1 or -1".into()));
        }
        Ok(Self {
            d,
            m,
            buckets,
            signs,
            seed: 0,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn buckets(&self) -> &[usize] {
        &self.buckets
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `S v`.
    pub fn apply_vector(&self, v: &[f64]) -> Result<Vec<f64>, SketchError> {
        if v.len() != self.m {
            return Err(MatrixError::DimensionMismatch {
                expected: self.m,
                actual: v.len(),
            }
            .into());
        }
        let mut out = vec![0.0; self.d];
        for ((&h, &s), &x) in self.buckets.iter().zip(&self.signs).zip(v) {
            out[h] += s * x;
        }
        Ok(out)
    }

    /// `S A`, keeping the input's encoding. Sparse outputs drop entries that
    /// cancel to exactly zero.
    pub fn apply_matrix(&self, a: &Matrix) -> Result<Matrix, SketchError> {
        if a.rows() != self.m {
            return Err(MatrixError::DimensionMismatch {
                expected: self.m,
                actual: a.rows(),
            }
            .into());
        }
        match a {
            Matrix::Dense(dm) => {
                let mut out = DenseMatrix::zeros(self.d, dm.cols())?;
                for j in 0..dm.cols() {
                    let src = dm.column(j);
                    let dst = out.column_mut(j);
                    for ((&h, &s), &x) in self.buckets.iter().zip(&self.signs).zip(src) {
                        dst[h] += s * x;
                    }
                }
                Ok(out.into())
            }
            Matrix::Sparse(sm) => Ok(self.apply_sparse(sm)?.into()),
        }
    }

    fn apply_sparse(&self, a: &SparseMatrixCsc) -> Result<SparseMatrixCsc, SketchError> {
        let mut acc = vec![0.0; self.d];
        let mut seen = vec![false; self.d];
        let mut touched: Vec<usize> = Vec::new();
        let mut col_ptr = Vec::with_capacity(a.cols() + 1);
        let mut row_idx = Vec::with_capacity(a.nnz());
        let mut values = Vec::with_capacity(a.nnz());
        col_ptr.push(0);
        for j in 0..a.cols() {
            let (rows, vals) = a.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                let h = self.buckets[i];
                if !seen[h] {
                    seen[h] = true;
                    touched.push(h);
                }
                acc[h] += self.signs[i] * v;
            }
            touched.sort_unstable();
            for &h in &touched {
                if acc[h] != 0.0 {
                    row_idx.push(h);
                    values.push(acc[h]);
                }
                acc[h] = 0.0;
                seen[h] = false;
            }
            touched.clear();
            col_ptr.push(row_idx.len());
        }
        Ok(SparseMatrixCsc::try_new(
            self.d,
            a.cols(),
            col_ptr,
            row_idx,
            values,
        )?)
    }

    /// Dense `d × m` matrix of the sketch, for tests on small sizes.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.d, self.m).expect("nonempty sketch");
        for (i, (&h, &s)) in self.buckets.iter().zip(&self.signs).enumerate() {
            out.set(h, i, s);
        }
        out
    }
}

/// `(n² + n) / (δ ε²)`: sketch rows sufficient for an ε-embedding with
/// probability `1 - δ`.
pub fn embedding_rows(n: usize, epsilon: f64, delta: f64) -> f64 {
    let nf = n as f64;
    (nf * nf + nf) / (delta * epsilon * epsilon)
}

/// Replaces `(A, b)` by `(SA, Sb)` for a fresh sketch with `d` rows. The
/// ground truth is carried over unchanged. Returns the sketched instance
/// and the seconds spent building and applying the sketch.
pub fn cs_prepare(
    problem: &ProblemInstance,
    d: usize,
    seed: u64,
) -> Result<(ProblemInstance, f64), SketchError> {
    let m = problem.rows();
    if d >= m {
        return Err(SketchError::NoCompression { d, m });
    }
    if !problem.consistent {
        log::warn!(
            "{}: sketching an inconsistent system; the sketched minimizer only approximates x*",
            problem.label
        );
    }
    let start = Instant::now();
    let sketch = CountSketch::build(d, m, seed)?;
    let a = sketch.apply_matrix(&problem.a)?;
    let b = sketch.apply_vector(&problem.b)?;
    let prep = start.elapsed().as_secs_f64();
    let sketched = ProblemInstance {
        a,
        b,
        x_star: problem.x_star.clone(),
        label: format!("{}/cs-d{d}", problem.label),
        provenance: format!("{}; count sketch d={d} seed={seed}", problem.provenance),
        consistent: problem.consistent,
    };
    if let Some(j) = sketched.a.first_zero_column() {
        return Err(ProblemError::ZeroColumn(j).into());
    }
    Ok((sketched, prep))
}
