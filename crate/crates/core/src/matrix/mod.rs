//! Dense and sparse storage with the column-oriented kernels the solvers
//! need.
//!
//! Both encodings are column-major: every method reads `A^T r` through column
//! dot products and `Aη` through column gathers.

mod dense;
mod sparse;

pub use dense::DenseMatrix;
pub use sparse::SparseMatrixCsc;

pub(crate) use dense::{axpy, dot};

use crate::block::BlockIndexSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("storage length mismatch: expected {expected}, got {actual}")]
    StorageLength { expected: usize, actual: usize },
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyShape { rows: usize, cols: usize },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),
}

/// A coefficient matrix in either encoding.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrixCsc),
}

impl From<DenseMatrix> for Matrix {
    fn from(m: DenseMatrix) -> Self {
        Matrix::Dense(m)
    }
}

impl From<SparseMatrixCsc> for Matrix {
    fn from(m: SparseMatrixCsc) -> Self {
        Matrix::Sparse(m)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<(), MatrixError> {
    if expected != actual {
        return Err(MatrixError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

impl Matrix {
    #[inline]
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.rows(),
            Matrix::Sparse(s) => s.rows(),
        }
    }

    #[inline]
    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.cols(),
            Matrix::Sparse(s) => s.cols(),
        }
    }

    /// Number of stored entries (`rows·cols` for dense storage).
    pub fn nnz(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.rows() * d.cols(),
            Matrix::Sparse(s) => s.nnz(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Matrix::Sparse(_))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, MatrixError> {
        let mut y = vec![0.0; self.rows()];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`, overwriting `y`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), MatrixError> {
        check_len(self.cols(), x.len())?;
        check_len(self.rows(), y.len())?;
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.column_axpy(j, xj, y);
            }
        }
        Ok(())
    }

    /// `s = A^T r`.
    pub fn transpose_matvec(&self, r: &[f64]) -> Result<Vec<f64>, MatrixError> {
        let mut s = vec![0.0; self.cols()];
        self.transpose_matvec_into(r, &mut s)?;
        Ok(s)
    }

    pub fn transpose_matvec_into(&self, r: &[f64], s: &mut [f64]) -> Result<(), MatrixError> {
        check_len(self.rows(), r.len())?;
        check_len(self.cols(), s.len())?;
        for (j, sj) in s.iter_mut().enumerate() {
            *sj = self.column_dot(j, r);
        }
        Ok(())
    }

    /// `A η` where η is the block's sparse direction. Only the selected
    /// columns are read.
    pub fn restricted_matvec(&self, block: &BlockIndexSet) -> Result<Vec<f64>, MatrixError> {
        let mut y = vec![0.0; self.rows()];
        self.restricted_matvec_into(block, &mut y)?;
        Ok(y)
    }

    pub fn restricted_matvec_into(
        &self,
        block: &BlockIndexSet,
        y: &mut [f64],
    ) -> Result<(), MatrixError> {
        check_len(self.rows(), y.len())?;
        let n = self.cols();
        if let Some(&bad) = block.indices().iter().find(|&&j| j >= n) {
            return Err(MatrixError::IndexOutOfRange {
                index: bad,
                bound: n,
            });
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        for (&j, &v) in block.indices().iter().zip(block.values()) {
            if v != 0.0 {
                self.column_axpy(j, v, y);
            }
        }
        Ok(())
    }

    /// Euclidean norm of every column.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.cols())
            .map(|j| self.column_norm_sq(j).sqrt())
            .collect()
    }

    pub fn column_norm_sq(&self, j: usize) -> f64 {
        match self {
            Matrix::Dense(d) => d.column(j).iter().map(|v| v * v).sum(),
            Matrix::Sparse(s) => s.column(j).1.iter().map(|v| v * v).sum(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        (0..self.cols())
            .map(|j| self.column_norm_sq(j))
            .sum::<f64>()
            .sqrt()
    }

    /// `A_(j)^T v`. No bounds checking beyond slice indexing.
    #[inline]
    pub fn column_dot(&self, j: usize, v: &[f64]) -> f64 {
        match self {
            Matrix::Dense(d) => dot(d.column(j), v),
            Matrix::Sparse(s) => {
                let (ri, vals) = s.column(j);
                ri.iter().zip(vals).map(|(&i, &a)| a * v[i]).sum()
            }
        }
    }

    /// `y += alpha · A_(j)`.
    #[inline]
    pub fn column_axpy(&self, j: usize, alpha: f64, y: &mut [f64]) {
        match self {
            Matrix::Dense(d) => axpy(alpha, d.column(j), y),
            Matrix::Sparse(s) => {
                let (ri, vals) = s.column(j);
                for (&i, &a) in ri.iter().zip(vals) {
                    y[i] += alpha * a;
                }
            }
        }
    }

    /// Dense copy of the columns listed in `indices`, in that order.
    pub fn gather_columns(&self, indices: &[usize]) -> Result<DenseMatrix, MatrixError> {
        let m = self.rows();
        if indices.is_empty() {
            return Err(MatrixError::EmptyShape { rows: m, cols: 0 });
        }
        let mut out = DenseMatrix::zeros(m, indices.len())?;
        for (p, &j) in indices.iter().enumerate() {
            if j >= self.cols() {
                return Err(MatrixError::IndexOutOfRange {
                    index: j,
                    bound: self.cols(),
                });
            }
            self.column_axpy(j, 1.0, out.column_mut(p));
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(d) => d.clone(),
            Matrix::Sparse(s) => s.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> SparseMatrixCsc {
        match self {
            Matrix::Dense(d) => SparseMatrixCsc::from_dense(d),
            Matrix::Sparse(s) => s.clone(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        match self {
            Matrix::Dense(d) => Matrix::Dense(d.transpose()),
            Matrix::Sparse(s) => Matrix::Sparse(s.transpose()),
        }
    }

    /// Index of the first column with no nonzero entry.
    pub fn first_zero_column(&self) -> Option<usize> {
        (0..self.cols()).find(|&j| match self {
            Matrix::Dense(d) => d.column(j).iter().all(|&v| v == 0.0),
            Matrix::Sparse(s) => s.column(j).0.is_empty(),
        })
    }
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex22() -> Matrix {
        DenseMatrix::from_row_major(2, 2, &[1.0, 2.0, 3.0, 4.0])
            .unwrap()
            .into()
    }

    fn rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
        let scale = norm2(b).max(1.0);
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
    }

    /// Reference `A x` computed from the densified matrix by row sums.
    fn dense_matvec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
        (0..a.rows())
            .map(|i| (0..a.cols()).map(|j| a.get(i, j) * x[j]).sum())
            .collect()
    }

    fn dense_tmatvec(a: &DenseMatrix, r: &[f64]) -> Vec<f64> {
        (0..a.cols())
            .map(|j| (0..a.rows()).map(|i| a.get(i, j) * r[i]).sum())
            .collect()
    }

    fn sparse_strategy(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrixCsc> {
        proptest::collection::vec((0..rows, 0..cols, -3.0f64..3.0), 1..(rows * cols))
            .prop_map(move |t| SparseMatrixCsc::from_triplets(rows, cols, &t).unwrap())
    }

    #[test]
    fn matvec_small_cases() {
        let id: Matrix = DenseMatrix::identity(2).unwrap().into();
        assert_eq!(id.matvec(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(ex22().matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
    }

    #[test]
    fn matvec_rejects_wrong_length() {
        let err = ex22().matvec(&[1.0, 2.0, 3.0]).unwrap_err();
        assert_eq!(
            err,
            MatrixError::DimensionMismatch {
                expected: 2,
                actual: 3
            }
        );
        assert!(ex22().transpose_matvec(&[1.0]).is_err());
    }

    #[test]
    fn transpose_matvec_small_cases() {
        let id: Matrix = DenseMatrix::identity(2).unwrap().into();
        assert_eq!(id.transpose_matvec(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        let a: Matrix = DenseMatrix::from_row_major(3, 2, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0])
            .unwrap()
            .into();
        assert_eq!(
            a.transpose_matvec(&[1.0, 1.0, 1.0]).unwrap(),
            vec![2.0, 3.0]
        );
    }

    #[test]
    fn restricted_matvec_small_cases() {
        let id: Matrix = DenseMatrix::identity(2).unwrap().into();
        let tau = BlockIndexSet::new(vec![1], vec![2.0]);
        assert_eq!(id.restricted_matvec(&tau).unwrap(), vec![0.0, 2.0]);
        let both = BlockIndexSet::new(vec![0, 1], vec![1.0, 1.0]);
        assert_eq!(ex22().restricted_matvec(&both).unwrap(), vec![3.0, 7.0]);
        let bad = BlockIndexSet::new(vec![2], vec![1.0]);
        assert_eq!(
            id.restricted_matvec(&bad).unwrap_err(),
            MatrixError::IndexOutOfRange { index: 2, bound: 2 }
        );
    }

    #[test]
    fn norms_small_cases() {
        let id3: Matrix = DenseMatrix::identity(3).unwrap().into();
        assert_eq!(id3.column_norms(), vec![1.0, 1.0, 1.0]);
        let col: Matrix = DenseMatrix::from_row_major(2, 1, &[3.0, 4.0])
            .unwrap()
            .into();
        assert_eq!(col.column_norms(), vec![5.0]);
        let id4: Matrix = DenseMatrix::identity(4).unwrap().into();
        assert_eq!(id4.frobenius_norm(), 2.0);
        assert!((ex22().frobenius_norm() - 30f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let s = SparseMatrixCsc::from_triplets(
            3,
            2,
            &[
                (0, 0, 1.0),
                (0, 0, 2.0),
                (2, 1, 5.0),
                (1, 1, 4.0),
                (1, 1, -4.0),
            ],
        )
        .unwrap();
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.column(0), (&[0usize][..], &[3.0][..]));
        assert_eq!(s.column(1), (&[2usize][..], &[5.0][..]));
        assert_eq!(Matrix::from(s).first_zero_column(), None,);
    }

    #[test]
    fn try_new_rejects_bad_structure() {
        assert!(SparseMatrixCsc::try_new(2, 1, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrixCsc::try_new(2, 1, vec![0, 1], vec![0], vec![0.0]).is_err());
        assert!(SparseMatrixCsc::try_new(2, 1, vec![0, 1], vec![5], vec![1.0]).is_err());
        assert!(SparseMatrixCsc::try_new(2, 1, vec![0, 1], vec![1], vec![1.0]).is_ok());
    }

    #[test]
    fn zero_column_detected() {
        let s = SparseMatrixCsc::from_triplets(3, 3, &[(0, 0, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(Matrix::from(s.clone()).first_zero_column(), Some(1));
        assert_eq!(Matrix::from(s.to_dense()).first_zero_column(), Some(1));
    }

    #[test]
    fn gather_columns_copies_in_order() {
        let g = ex22().gather_columns(&[1, 0]).unwrap();
        assert_eq!(g.column(0), &[2.0, 4.0]);
        assert_eq!(g.column(1), &[1.0, 3.0]);
    }

    proptest! {
        #[test]
        fn sparse_matvec_matches_dense_oracle(
            s in sparse_strategy(7, 4),
            x in proptest::collection::vec(-2.0f64..2.0, 4),
        ) {
            let dense = s.to_dense();
            let got = Matrix::from(s).matvec(&x).unwrap();
            prop_assert!(rel_close(&got, &dense_matvec(&dense, &x), 1e-12));
        }

        #[test]
        fn sparse_transpose_matvec_matches_dense_oracle(
            s in sparse_strategy(9, 5),
            r in proptest::collection::vec(-2.0f64..2.0, 9),
        ) {
            let dense = s.to_dense();
            let got = Matrix::from(s).transpose_matvec(&r).unwrap();
            prop_assert!(rel_close(&got, &dense_tmatvec(&dense, &r), 1e-12));
        }

        #[test]
        fn restricted_matches_padded_matvec(
            s in sparse_strategy(20, 8),
            picks in proptest::sample::subsequence((0..8).collect::<Vec<_>>(), 3),
            vals in proptest::collection::vec(-2.0f64..2.0, 3),
        ) {
            let a = Matrix::from(s);
            let block = BlockIndexSet::new(picks, vals);
            let got = a.restricted_matvec(&block).unwrap();
            let want = a.matvec(&block.to_dense(8)).unwrap();
            prop_assert!(rel_close(&got, &want, 1e-14));
        }

        #[test]
        fn column_norms_match_dense_oracle(s in sparse_strategy(6, 4)) {
            let dense = s.to_dense();
            let a = Matrix::from(s);
            let norms = a.column_norms();
            for (j, &nj) in norms.iter().enumerate() {
                let want = (0..6).map(|i| dense.get(i, j).powi(2)).sum::<f64>().sqrt();
                prop_assert!((nj - want).abs() <= 1e-12 * want.max(1.0));
            }
            let agg = norms.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((a.frobenius_norm() - agg).abs() <= 1e-12 * agg.max(1.0));
        }

        #[test]
        fn adjointness(
            s in sparse_strategy(8, 5),
            x in proptest::collection::vec(-2.0f64..2.0, 5),
            r in proptest::collection::vec(-2.0f64..2.0, 8),
        ) {
            for a in [Matrix::from(s.clone()), Matrix::from(s.to_dense())] {
                let lhs = dot(&a.matvec(&x).unwrap(), &r);
                let rhs = dot(&x, &a.transpose_matvec(&r).unwrap());
                let scale = a.frobenius_norm() * norm2(&x) * norm2(&r);
                prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
            }
        }

        #[test]
        fn dense_and_sparse_encodings_agree(
            s in sparse_strategy(6, 6),
            x in proptest::collection::vec(-2.0f64..2.0, 6),
            r in proptest::collection::vec(-2.0f64..2.0, 6),
        ) {
            let sp = Matrix::from(s.clone());
            let de = Matrix::from(s.to_dense());
            prop_assert!(rel_close(&sp.matvec(&x).unwrap(), &de.matvec(&x).unwrap(), 1e-12));
            prop_assert!(rel_close(
                &sp.transpose_matvec(&r).unwrap(),
                &de.transpose_matvec(&r).unwrap(),
                1e-12
            ));
            let block = BlockIndexSet::new(vec![0, 3], vec![x[0], x[3]]);
            prop_assert!(rel_close(
                &sp.restricted_matvec(&block).unwrap(),
                &de.restricted_matvec(&block).unwrap(),
                1e-12
            ));
            prop_assert!(rel_close(&sp.column_norms(), &de.column_norms(), 1e-12));
            prop_assert!((sp.frobenius_norm() - de.frobenius_norm()).abs() <= 1e-12 * de.frobenius_norm().max(1.0));
        }

        #[test]
        fn transpose_is_involutive(s in sparse_strategy(5, 3)) {
            let t = s.transpose();
            prop_assert_eq!(t.rows(), 3);
            prop_assert_eq!(t.transpose(), s.clone());
            prop_assert_eq!(t.to_dense(), s.to_dense().transpose());
        }
    }
}
