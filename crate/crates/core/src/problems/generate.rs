use super::{ProblemError, ProblemInstance};
use crate::matrix::{DenseMatrix, Matrix, SparseMatrixCsc};
use crate::rng::{stream, stream_rng};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn check_shape(m: usize, n: usize) -> Result<(), ProblemError> {
    if n == 0 || m < n {
        return Err(ProblemError::Underdetermined { rows: m, cols: n });
    }
    Ok(())
}

/// `m × n` matrix of i.i.d. standard normals, filled column by column.
///
/// Normals come from `rand_distr::StandardNormal` (ziggurat) on the
/// matrix stream of `seed`.
pub fn gen_gaussian_dense(m: usize, n: usize, seed: u64) -> Result<Matrix, ProblemError> {
    check_shape(m, n)?;
    let mut rng = stream_rng(seed, stream::MATRIX);
    let values: Vec<f64> = (0..m * n)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Ok(DenseMatrix::from_column_major(m, n, values)?.into())
}

/// Each entry present with probability `density`, values standard normal.
/// A column left empty gets one normal entry at a random row.
pub fn gen_sparse_gaussian(
    m: usize,
    n: usize,
    density: f64,
    seed: u64,
) -> Result<Matrix, ProblemError> {
    check_shape(m, n)?;
    if !(density > 0.0 && density <= 1.0) {
        return Err(ProblemError::InvalidParameter(format!(
            "density {density} outside (0, 1]"
        )));
    }
    let mut pattern = stream_rng(seed, stream::PATTERN);
    let mut values = stream_rng(seed, stream::MATRIX);
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    let mut vals = Vec::new();
    col_ptr.push(0);
    let mut repaired = 0usize;
    for _ in 0..n {
        let start = row_idx.len();
        for i in 0..m {
            if pattern.random::<f64>() < density {
                let v: f64 = StandardNormal.sample(&mut values);
                if v != 0.0 {
                    row_idx.push(i);
                    vals.push(v);
                }
            }
        }
        if row_idx.len() == start {
            let i = pattern.random_range(0..m);
            let mut v: f64 = StandardNormal.sample(&mut values);
            while v == 0.0 {
                v = StandardNormal.sample(&mut values);
            }
            row_idx.push(i);
            vals.push(v);
            repaired += 1;
        }
        col_ptr.push(row_idx.len());
    }
    if repaired > 0 {
        log::debug!("sparse gaussian {m}x{n}: repaired {repaired} empty columns");
    }
    Ok(SparseMatrixCsc::try_new(m, n, col_ptr, row_idx, vals)?.into())
}

/// Draws `x⋆` i.i.d. standard normal and sets `b = A x⋆`.
pub fn make_consistent_problem(a: Matrix, seed: u64) -> Result<ProblemInstance, ProblemError> {
    let mut rng = stream_rng(seed, stream::SOLUTION);
    let x_star: Vec<f64> = (0..a.cols())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let b = a.matvec(&x_star)?;
    let (m, n) = (a.rows(), a.cols());
    ProblemInstance::new(
        a,
        b,
        Some(x_star),
        format!("{m}x{n}"),
        format!("consistent b = A x*, seed {seed}"),
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::gram_extremal_singular_values;

    #[test]
    fn gaussian_is_deterministic() {
        assert_eq!(
            gen_gaussian_dense(30, 5, 3).unwrap(),
            gen_gaussian_dense(30, 5, 3).unwrap()
        );
        assert_ne!(
            gen_gaussian_dense(30, 5, 3).unwrap(),
            gen_gaussian_dense(30, 5, 4).unwrap()
        );
        assert!(gen_gaussian_dense(3, 5, 3).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let a = gen_gaussian_dense(10_000, 1, 17).unwrap().to_dense();
        let v = a.values();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        assert!(mean.abs() <= 0.05, "mean {mean}");
        assert!((0.9..=1.1).contains(&var), "variance {var}");
    }

    #[test]
    fn gaussian_has_full_column_rank() {
        let a = gen_gaussian_dense(2000, 200, 1).unwrap();
        let (lo, hi) = gram_extremal_singular_values(&a);
        assert!(lo > 0.0 && hi > lo);
    }

    #[test]
    fn sparse_density_one_is_dense() {
        let a = gen_sparse_gaussian(8, 5, 1.0, 2).unwrap();
        assert_eq!(a.nnz(), 40);
        assert!(a.is_sparse());
    }

    #[test]
    fn sparse_count_near_binomial_mean() {
        let (m, n, p) = (10_000usize, 10usize, 0.1);
        let a = gen_sparse_gaussian(m, n, p, 5).unwrap();
        let mean = (m * n) as f64 * p;
        let sd = (mean * (1.0 - p)).sqrt();
        assert!((a.nnz() as f64 - mean).abs() <= 3.0 * sd, "nnz {}", a.nnz());
    }

    #[test]
    fn sparse_is_deterministic_and_repairs_columns() {
        let a = gen_sparse_gaussian(50, 20, 0.01, 8).unwrap();
        assert_eq!(a, gen_sparse_gaussian(50, 20, 0.01, 8).unwrap());
        assert_eq!(a.first_zero_column(), None);
    }

    #[test]
    fn consistent_problem_examples() {
        let a: Matrix = DenseMatrix::identity(4).unwrap().into();
        let p = make_consistent_problem(a, 3).unwrap();
        assert_eq!(p.b, *p.x_star.as_ref().unwrap());
        let q = make_consistent_problem(gen_gaussian_dense(20, 4, 1).unwrap(), 3).unwrap();
        assert_eq!(
            q.x_star,
            make_consistent_problem(gen_gaussian_dense(20, 4, 1).unwrap(), 3)
                .unwrap()
                .x_star
        );
        let r: Vec<f64> =
            q.a.matvec(q.x_star.as_ref().unwrap())
                .unwrap()
                .iter()
                .zip(&q.b)
                .map(|(p, b)| p - b)
                .collect();
        assert!(r.iter().all(|&v| v == 0.0));
    }
}
