use super::{DenseMatrix, MatrixError};

/// Compressed-sparse-column matrix.
///
/// Row indices inside a column are strictly increasing and no stored value
/// is an exact zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrixCsc {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCsc {
    /// Validates raw CSC arrays.
    pub fn try_new(
        rows: usize,
        cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::EmptyShape { rows, cols });
        }
        if col_ptr.len() != cols + 1 {
            return Err(MatrixError::StorageLength {
                expected: cols + 1,
                actual: col_ptr.len(),
            });
        }
        if row_idx.len() != values.len() {
            return Err(MatrixError::StorageLength {
                expected: row_idx.len(),
                actual: values.len(),
            });
        }
        if col_ptr[0] != 0 || col_ptr[cols] != row_idx.len() {
            return Err(MatrixError::InvalidStructure(
                "column offsets must start at 0 and end at the stored-entry count".into(),
            ));
        }
        for j in 0..cols {
            let (start, end) = (col_ptr[j], col_ptr[j + 1]);
            if start > end {
                return Err(MatrixError::InvalidStructure(format!(
                    "column offsets decrease at column {j}"
                )));
            }
            let rows_j = &row_idx[start..end];
            for (pos, &i) in rows_j.iter().enumerate() {
                if i >= rows {
                    return Err(MatrixError::IndexOutOfRange {
                        index: i,
                        bound: rows,
                    });
                }
                if pos > 0 && rows_j[pos - 1] >= i {
                    return Err(MatrixError::InvalidStructure(format!(
                        "row indices in column {j} are not strictly increasing"
                    )));
                }
            }
            if values[start..end].contains(&0.0) {
                return Err(MatrixError::InvalidStructure(format!(
                    "explicit zero stored in column {j}"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Assembles from (row, col, value) triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::EmptyShape { rows, cols });
        }
        let mut counts = vec![0usize; cols + 1];
        for &(i, j, _) in triplets {
            if i >= rows {
                return Err(MatrixError::IndexOutOfRange {
                    index: i,
                    bound: rows,
                });
            }
            if j >= cols {
                return Err(MatrixError::IndexOutOfRange {
                    index: j,
                    bound: cols,
                });
            }
            counts[j + 1] += 1;
        }
        for j in 0..cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut bucket_rows = vec![0usize; triplets.len()];
        let mut bucket_vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let p = next[j];
            bucket_rows[p] = i;
            bucket_vals[p] = v;
            next[j] += 1;
        }

        let mut col_ptr = Vec::with_capacity(cols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for j in 0..cols {
            scratch.clear();
            scratch.extend((counts[j]..counts[j + 1]).map(|p| (bucket_rows[p], bucket_vals[p])));
            // stable sort keeps duplicate summation order equal to input order
            scratch.sort_by_key(|&(i, _)| i);
            let mut k = 0;
            while k < scratch.len() {
                let i = scratch[k].0;
                let mut sum = 0.0;
                while k < scratch.len() && scratch[k].0 == i {
                    sum += scratch[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    row_idx.push(i);
                    values.push(sum);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn from_dense(dense: &DenseMatrix) -> Self {
        let mut col_ptr = Vec::with_capacity(dense.cols() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for j in 0..dense.cols() {
            for (i, &v) in dense.column(j).iter().enumerate() {
                if v != 0.0 {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            rows: dense.rows(),
            cols: dense.cols(),
            col_ptr,
            row_idx,
            values,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values stored in column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[s..e], &self.values[s..e])
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = vec![0.0; self.rows * self.cols];
        for j in 0..self.cols {
            let (ri, vals) = self.column(j);
            for (&i, &v) in ri.iter().zip(vals) {
                out[j * self.rows + i] = v;
            }
        }
        DenseMatrix::from_column_major(self.rows, self.cols, out).expect("shape already validated")
    }

    pub fn transpose(&self) -> SparseMatrixCsc {
        let mut counts = vec![0usize; self.rows + 1];
        for &i in &self.row_idx {
            counts[i + 1] += 1;
        }
        for i in 0..self.rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut row_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // walking columns in order keeps the new row indices sorted
        for j in 0..self.cols {
            let (ri, vals) = self.column(j);
            for (&i, &v) in ri.iter().zip(vals) {
                let p = next[i];
                row_idx[p] = j;
                values[p] = v;
                next[i] += 1;
            }
        }
        SparseMatrixCsc {
            rows: self.cols,
            cols: self.rows,
            col_ptr: counts,
            row_idx,
            values,
        }
    }
}
