use crate::matrix::{DenseMatrix, Matrix};

/// Off-diagonal stopping threshold relative to `||G||_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Only the lower/upper symmetric part is assumed; no symmetry check is made.
pub fn symmetric_eigenvalues(g: &DenseMatrix) -> Vec<f64> {
    let n = g.rows();
    assert_eq!(n, g.cols(), "Jacobi needs a square matrix");
    let mut a: Vec<f64> = g.values().to_vec();
    let at = |a: &Vec<f64>, i: usize, j: usize| a[j * n + i];
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = JACOBI_TOLERANCE * frob;

    let off_norm = |a: &Vec<f64>| {
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    s += a[j * n + i] * a[j * n + i];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = at(&a, p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = at(&a, p, p);
                let aqq = at(&a, q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J^T A J with J the (p, q) rotation
                for k in 0..n {
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    a[p * n + k] = c * akp - s * akq;
                    a[q * n + k] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[k * n + p];
                    let aqk = a[k * n + q];
                    a[k * n + p] = c * apk - s * aqk;
                    a[k * n + q] = s * apk + c * aqk;
                }
                a[q * n + p] = 0.0;
                a[p * n + q] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

/// `(σ_min, σ_max)` of `A` from the eigenvalues of `A^T A`.
pub fn gram_extremal_singular_values(a: &Matrix) -> (f64, f64) {
    dense_extremal_singular_values(&a.to_dense())
}

pub fn dense_extremal_singular_values(a: &DenseMatrix) -> (f64, f64) {
    let eig = symmetric_eigenvalues(&a.gram());
    let lo = eig.first().copied().unwrap_or(0.0).max(0.0);
    let hi = eig.last().copied().unwrap_or(0.0).max(0.0);
    (lo.sqrt(), hi.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::norm2;
    use crate::rng::stream_rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn diagonal_padded_with_zero_rows() {
        let a: Matrix = DenseMatrix::from_row_major(3, 2, &[2.0, 0.0, 0.0, 3.0, 0.0, 0.0])
            .unwrap()
            .into();
        let (lo, hi) = gram_extremal_singular_values(&a);
        assert!((lo - 2.0).abs() < 1e-14);
        assert!((hi - 3.0).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_columns() {
        let s = 0.5f64.sqrt();
        let a: Matrix = DenseMatrix::from_row_major(3, 2, &[s, s, s, -s, 0.0, 0.0])
            .unwrap()
            .into();
        let (lo, hi) = gram_extremal_singular_values(&a);
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn known_symmetric_spectrum() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let g = DenseMatrix::from_row_major(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let eig = symmetric_eigenvalues(&g);
        assert!((eig[0] - 1.0).abs() < 1e-14 && (eig[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_value_sandwich() {
        let mut rng = stream_rng(5, 0);
        let (m, n) = (20, 6);
        let vals: Vec<f64> = (0..m * n)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let a: Matrix = DenseMatrix::from_column_major(m, n, vals).unwrap().into();
        let (lo, hi) = gram_extremal_singular_values(&a);
        assert!(lo > 0.0 && hi >= lo);
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let ax2 = norm2(&a.matvec(&x).unwrap()).powi(2);
            let x2 = norm2(&x).powi(2);
            assert!(lo * lo * x2 <= ax2 * (1.0 + 1e-9));
            assert!(ax2 <= hi * hi * x2 * (1.0 + 1e-9));
        }
    }
}
