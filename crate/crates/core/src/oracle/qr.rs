use super::OracleError;
use crate::matrix::{dot, DenseMatrix, Matrix};

/// Householder QR of a tall dense matrix, kept in factored form.
#[derive(Clone, Debug)]
pub struct HouseholderQr {
    /// Reflector vectors below the diagonal, R on and above it.
    factors: DenseMatrix,
    /// Diagonal of R.
    r_diag: Vec<f64>,
    /// `2 / (v^T v)` per reflector; zero marks an identity reflector.
    scales: Vec<f64>,
}

impl HouseholderQr {
    /// Requires `rows >= cols`.
    pub fn factor(a: &DenseMatrix) -> Result<Self, OracleError> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(OracleError::NotOverdetermined { rows: m, cols: n });
        }
        let mut f = a.clone();
        let mut r_diag = vec![0.0; n];
        let mut scales = vec![0.0; n];
        for k in 0..n {
            let col = &mut f.column_mut(k)[k..];
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                r_diag[k] = 0.0;
                continue;
            }
            let alpha = if col[0] > 0.0 { -norm } else { norm };
            col[0] -= alpha;
            let vtv: f64 = col.iter().map(|v| v * v).sum();
            r_diag[k] = alpha;
            if vtv == 0.0 {
                continue;
            }
            let scale = 2.0 / vtv;
            scales[k] = scale;
            let v: Vec<f64> = col.to_vec();
            for j in (k + 1)..n {
                let cj = &mut f.column_mut(j)[k..];
                let proj = scale * dot(&v, cj);
                for (c, vi) in cj.iter_mut().zip(&v) {
                    *c -= proj * vi;
                }
            }
        }
        Ok(Self {
            factors: f,
            r_diag,
            scales,
        })
    }

    pub fn r_diagonal(&self) -> &[f64] {
        &self.r_diag
    }

    /// Overwrites `b` with `Q^T b`.
    pub fn apply_qt(&self, b: &mut [f64]) {
        let n = self.factors.cols();
        for k in 0..n {
            if self.scales[k] == 0.0 {
                continue;
            }
            let v = &self.factors.column(k)[k..];
            let tail = &mut b[k..];
            let proj = self.scales[k] * dot(v, tail);
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= proj * vi;
            }
        }
    }

    /// Least-squares solution of `min ||b - A x||`. Fails if some `|R_jj|`
    /// falls below `rank_tol`.
    pub fn solve(&self, b: &[f64], rank_tol: f64) -> Result<Vec<f64>, OracleError> {
        let (m, n) = (self.factors.rows(), self.factors.cols());
        if b.len() != m {
            return Err(OracleError::Matrix(
                crate::matrix::MatrixError::DimensionMismatch {
                    expected: m,
                    actual: b.len(),
                },
            ));
        }
        if let Some((j, &d)) = self
            .r_diag
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.abs() >= rank_tol))
        {
            return Err(OracleError::RankDeficient {
                column: j,
                magnitude: d.abs(),
            });
        }
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = qtb[i];
            for j in (i + 1)..n {
                acc -= self.factors.get(i, j) * x[j];
            }
            x[i] = acc / self.r_diag[i];
        }
        Ok(x)
    }
}

/// Relative rank threshold on `|R_jj|`, scaled by `||A||_F`.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Least-squares solution `x = A^† b` by Householder QR on a dense copy.
pub fn reference_lsq_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, OracleError> {
    let dense = a.to_dense();
    dense_lsq_solve(&dense, b)
}

pub fn dense_lsq_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, OracleError> {
    let frob = a.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    let qr = HouseholderQr::factor(a)?;
    qr.solve(b, RANK_TOLERANCE * frob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identity_returns_rhs() {
        let a: Matrix = DenseMatrix::identity(3).unwrap().into();
        let x = reference_lsq_solve(&a, &[1.0, -2.0, 3.5]).unwrap();
        for (xi, bi) in x.iter().zip([1.0, -2.0, 3.5]) {
            assert!((xi - bi).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_one_column_gives_mean() {
        let a: Matrix = DenseMatrix::from_row_major(2, 1, &[1.0, 1.0])
            .unwrap()
            .into();
        let x = reference_lsq_solve(&a, &[0.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recovers_generating_solution() {
        let mut rng = stream_rng(11, 0);
        let (m, n) = (30, 8);
        let vals: Vec<f64> = (0..m * n)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let a: Matrix = DenseMatrix::from_column_major(m, n, vals).unwrap().into();
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b = a.matvec(&xs).unwrap();
        let x = reference_lsq_solve(&a, &b).unwrap();
        let err: f64 = x
            .iter()
            .zip(&xs)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        let nrm: f64 = xs.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err <= 1e-8 * nrm);
        // residual orthogonality
        let r: Vec<f64> = b
            .iter()
            .zip(a.matvec(&x).unwrap())
            .map(|(p, q)| p - q)
            .collect();
        let s = a.transpose_matvec(&r).unwrap();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(crate::matrix::norm2(&s) <= 1e-8 * a.frobenius_norm() * bn);
    }

    #[test]
    fn inconsistent_system_residual_is_orthogonal() {
        let a: Matrix = DenseMatrix::from_row_major(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0])
            .unwrap()
            .into();
        let b = [1.0, 1.0, 0.0];
        let x = reference_lsq_solve(&a, &b).unwrap();
        let ax = a.matvec(&x).unwrap();
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let s = a.transpose_matvec(&r).unwrap();
        assert!(crate::matrix::norm2(&s) < 1e-14);
        // normal equations [[2,1],[1,2]] x = [1,1] -> x = (1/3, 1/3)
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rank_deficiency_names_column() {
        let a: Matrix = DenseMatrix::from_row_major(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0])
            .unwrap()
            .into();
        match reference_lsq_solve(&a, &[1.0, 1.0, 1.0]) {
            Err(OracleError::RankDeficient { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn wide_matrix_rejected() {
        let a = DenseMatrix::zeros(2, 3).unwrap();
        assert!(matches!(
            HouseholderQr::factor(&a),
            Err(OracleError::NotOverdetermined { .. })
        ));
    }
}
