use super::MatrixError;

/// Column-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from values stored column by column.
    pub fn from_column_major(
        rows: usize,
        cols: usize,
        values: Vec<f64>,
    ) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::EmptyShape { rows, cols });
        }
        if values.len() != rows * cols {
            return Err(MatrixError::StorageLength {
                expected: rows * cols,
                actual: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    /// Builds a matrix from values listed row by row, the way matrices are
    /// usually written down.
    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Self, MatrixError> {
        if values.len() != rows * cols {
            return Err(MatrixError::StorageLength {
                expected: rows * cols,
                actual: values.len(),
            });
        }
        let mut col_major = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                col_major[j * rows + i] = values[i * cols + j];
            }
        }
        Self::from_column_major(rows, cols, col_major)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self, MatrixError> {
        Self::from_column_major(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        Ok(m)
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.rows + i] = v;
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        let rows = self.rows;
        &mut self.values[j * rows..(j + 1) * rows]
    }

    /// Raw column-major storage.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = vec![0.0; self.values.len()];
        for j in 0..self.cols {
            for (i, &v) in self.column(j).iter().enumerate() {
                out[i * self.cols + j] = v;
            }
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            values: out,
        }
    }

    /// `A^T A`, the n×n Gram matrix.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..=j {
                let v = dot(self.column(i), self.column(j));
                g[j * n + i] = v;
                g[i * n + j] = v;
            }
        }
        DenseMatrix {
            rows: n,
            cols: n,
            values: g,
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
