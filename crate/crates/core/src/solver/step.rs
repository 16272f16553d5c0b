//! Single-step update rules.
//!
//! The public `*_step` functions compute `s = A^T r` themselves. The driver
//! calls the `*_update` variants with the `s` it has already formed for
//! its records.

use super::select::{select_block_fbcd, select_block_madbcd, select_block_mrbgs};
use super::state::SolverState;
use super::{SolverError, StepStats};
use crate::block::BlockIndexSet;
use crate::matrix::{axpy, Matrix};
use crate::oracle::{HouseholderQr, OracleError, RANK_TOLERANCE};

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    /// `s = 0`: the iterate solves the normal equations; nothing changed.
    Stationary,
    Advanced {
        stats: StepStats,
        block: BlockIndexSet,
    },
}

fn gradient(state: &SolverState, a: &Matrix) -> Result<Vec<f64>, SolverError> {
    Ok(a.transpose_matvec(&state.residual)?)
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// One mADBCD step with momentum `beta`.
pub fn madbcd_step(
    state: &mut SolverState,
    a: &Matrix,
    beta: f64,
) -> Result<StepOutcome, SolverError> {
    let s = gradient(state, a)?;
    madbcd_update(state, a, &s, beta)
}

/// One FBCD step.
pub fn fbcd_step(state: &mut SolverState, a: &Matrix) -> Result<StepOutcome, SolverError> {
    let s = gradient(state, a)?;
    let norms = a.column_norms();
    fbcd_update(state, a, &s, &norms, a.frobenius_norm())
}

/// Exact line search along coordinate `j`.
pub fn cd_step(state: &mut SolverState, a: &Matrix, j: usize) -> Result<StepOutcome, SolverError> {
    let s = gradient(state, a)?;
    cd_update(state, a, &s, j)
}

/// One MRBGS step: block least-squares subsolve over `τ`.
pub fn mrbgs_step(
    state: &mut SolverState,
    a: &Matrix,
    fraction: f64,
) -> Result<StepOutcome, SolverError> {
    let s = gradient(state, a)?;
    mrbgs_update(state, a, &s, fraction)
}

pub(crate) fn madbcd_update(
    state: &mut SolverState,
    a: &Matrix,
    s: &[f64],
    beta: f64,
) -> Result<StepOutcome, SolverError> {
    match select_block_madbcd(s) {
        None => Ok(StepOutcome::Stationary),
        Some(block) => directional_update(state, a, s, block, beta),
    }
}

pub(crate) fn fbcd_update(
    state: &mut SolverState,
    a: &Matrix,
    s: &[f64],
    column_norms: &[f64],
    frobenius: f64,
) -> Result<StepOutcome, SolverError> {
    match select_block_fbcd(s, column_norms, frobenius) {
        None => Ok(StepOutcome::Stationary),
        Some((_, block)) => directional_update(state, a, s, block, 0.0),
    }
}

/// Greedy coordinate: `argmax_j |s_j|`, first index on ties.
pub(crate) fn greedy_index(s: &[f64]) -> usize {
    let mut best = 0;
    for (j, v) in s.iter().enumerate() {
        if v.abs() > s[best].abs() {
            best = j;
        }
    }
    best
}

pub(crate) fn cd_update(
    state: &mut SolverState,
    a: &Matrix,
    s: &[f64],
    j: usize,
) -> Result<StepOutcome, SolverError> {
    if j >= a.cols() {
        return Err(crate::matrix::MatrixError::IndexOutOfRange {
            index: j,
            bound: a.cols(),
        }
        .into());
    }
    let s_norm_sq = norm_sq(s);
    if s_norm_sq == 0.0 {
        return Ok(StepOutcome::Stationary);
    }
    let col_sq = a.column_norm_sq(j);
    if !(col_sq > 0.0) {
        return Err(SolverError::RankDeficiency(format!(
            "column {j} has zero norm"
        )));
    }
    let c = s[j] / col_sq;
    state.x_prev.copy_from_slice(&state.x);
    state.x[j] += c;
    state.diff_image.iter_mut().for_each(|v| *v = 0.0);
    a.column_axpy(j, c, &mut state.diff_image);
    for (r, w) in state.residual.iter_mut().zip(&state.diff_image) {
        *r -= w;
    }
    state.k += 1;
    Ok(StepOutcome::Advanced {
        stats: StepStats {
            block_size: 1,
            step_length: Some(c),
            eta_dot_s: s[j] * s[j],
            block_s_norm_sq: s[j] * s[j],
            s_norm_sq,
        },
        block: BlockIndexSet::gather(vec![j], s),
    })
}

pub(crate) fn mrbgs_update(
    state: &mut SolverState,
    a: &Matrix,
    s: &[f64],
    fraction: f64,
) -> Result<StepOutcome, SolverError> {
    let Some(block) = select_block_mrbgs(s, fraction) else {
        return Ok(StepOutcome::Stationary);
    };
    let sub = a.gather_columns(block.indices())?;
    let frob = norm_sq(sub.values()).sqrt();
    let qr = HouseholderQr::factor(&sub).map_err(|e| oracle_to_solver(e, &block))?;
    let d = qr
        .solve(&state.residual, RANK_TOLERANCE * frob)
        .map_err(|e| oracle_to_solver(e, &block))?;

    state.x_prev.copy_from_slice(&state.x);
    state.diff_image.iter_mut().for_each(|v| *v = 0.0);
    for (p, &j) in block.indices().iter().enumerate() {
        state.x[j] += d[p];
        axpy(d[p], sub.column(p), &mut state.diff_image);
    }
    for (r, w) in state.residual.iter_mut().zip(&state.diff_image) {
        *r -= w;
    }
    state.k += 1;
    let block_sq = norm_sq(block.values());
    Ok(StepOutcome::Advanced {
        stats: StepStats {
            block_size: block.len(),
            step_length: None,
            eta_dot_s: block.dot_full(s),
            block_s_norm_sq: block_sq,
            s_norm_sq: norm_sq(s),
        },
        block,
    })
}

fn oracle_to_solver(e: OracleError, block: &BlockIndexSet) -> SolverError {
    match e {
        OracleError::RankDeficient { magnitude, .. } => SolverError::SubproblemRankDeficient {
            block: block.indices().to_vec(),
            magnitude,
        },
        OracleError::NotOverdetermined { rows, cols } => SolverError::SubproblemRankDeficient {
            block: block.indices().to_vec(),
            magnitude: if rows < cols { 0.0 } else { f64::NAN },
        },
        OracleError::Matrix(m) => SolverError::Matrix(m),
        other => SolverError::RankDeficiency(other.to_string()),
    }
}

/// `x⁺ = x + cη + β(x - x_prev)` with `c = η^T s / ||Aη||²`, and the
/// matching incremental updates `w⁺ = cAη + βw`, `r⁺ = r - w⁺`.
fn directional_update(
    state: &mut SolverState,
    a: &Matrix,
    s: &[f64],
    block: BlockIndexSet,
    beta: f64,
) -> Result<StepOutcome, SolverError> {
    let eta_dot_s = block.dot_full(s);
    let block_s_norm_sq: f64 = block.indices().iter().map(|&j| s[j] * s[j]).sum();
    let mut a_eta = vec![0.0; a.rows()];
    a.restricted_matvec_into(&block, &mut a_eta)?;
    let denom = norm_sq(&a_eta);
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(SolverError::RankDeficiency(format!(
            "||A eta||^2 = {denom:e} on block of size {}",
            block.len()
        )));
    }
    let c = eta_dot_s / denom;

    if beta == 0.0 {
        state.x_prev.copy_from_slice(&state.x);
        for w in state.diff_image.iter_mut() {
            *w = 0.0;
        }
    } else {
        for (x, xp) in state.x.iter_mut().zip(state.x_prev.iter_mut()) {
            let old = *x;
            *x += beta * (old - *xp);
            *xp = old;
        }
        for w in state.diff_image.iter_mut() {
            *w *= beta;
        }
    }
    for (&j, &e) in block.indices().iter().zip(block.values()) {
        state.x[j] += c * e;
    }
    axpy(c, &a_eta, &mut state.diff_image);
    for (r, w) in state.residual.iter_mut().zip(&state.diff_image) {
        *r -= w;
    }
    state.k += 1;
    Ok(StepOutcome::Advanced {
        stats: StepStats {
            block_size: block.len(),
            step_length: Some(c),
            eta_dot_s,
            block_s_norm_sq,
            s_norm_sq: norm_sq(s),
        },
        block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{norm2, DenseMatrix};

    fn identity(n: usize) -> Matrix {
        DenseMatrix::identity(n).unwrap().into()
    }

    fn dense(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        DenseMatrix::from_row_major(rows, cols, v).unwrap().into()
    }

    #[test]
    fn madbcd_two_step_trace_on_identity() {
        let a = identity(2);
        let b = [1.0, 2.0];
        let mut st = SolverState::new(&a, &b, None).unwrap();
        madbcd_step(&mut st, &a, 0.0).unwrap();
        assert_eq!(st.x, vec![0.0, 2.0]);
        madbcd_step(&mut st, &a, 0.0).unwrap();
        assert_eq!(st.x, vec![1.0, 2.0]);
        assert_eq!(
            madbcd_step(&mut st, &a, 0.0).unwrap(),
            StepOutcome::Stationary
        );
        assert_eq!(st.x, vec![1.0, 2.0]);
        assert_eq!(st.k, 2);
    }

    #[test]
    fn momentum_arithmetic() {
        let a = identity(2);
        // b chosen so that r = (1, 0) at x = (0, 2)
        let b = [1.0, 2.0];
        let mut st = SolverState::from_iterates(&a, &b, vec![0.0, 2.0], vec![0.0, 0.0], 1).unwrap();
        madbcd_step(&mut st, &a, 0.5).unwrap();
        assert_eq!(st.x, vec![1.0, 3.0]);
        assert_eq!(st.x_prev, vec![0.0, 2.0]);
        let fresh = SolverState::from_iterates(&a, &b, st.x.clone(), st.x_prev.clone(), 2).unwrap();
        assert_eq!(st.residual, fresh.residual);
        assert_eq!(st.diff_image, fresh.diff_image);
    }

    #[test]
    fn fbcd_one_step_on_identity() {
        let a = identity(2);
        let mut st = SolverState::new(&a, &[1.0, 0.0], None).unwrap();
        fbcd_step(&mut st, &a).unwrap();
        assert_eq!(st.x, vec![1.0, 0.0]);
        assert_eq!(fbcd_step(&mut st, &a).unwrap(), StepOutcome::Stationary);
    }

    #[test]
    fn fbcd_uniform_case_selects_all_and_reduces_energy() {
        // columns of equal norm √3, b picked so s = A^T b is uniform
        let a = dense(
            6,
            3,
            &[
                1.0, 1.0, 1.0, //
                1.0, -1.0, 0.0, //
                1.0, 0.0, -1.0, //
                0.0, 1.0, 1.0, //
                0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0,
            ],
        );
        let norms = a.column_norms();
        assert!(norms.iter().all(|&c| (c - 3f64.sqrt()).abs() < 1e-15));
        let x_star = crate::oracle::reference_lsq_solve(&a, &[3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let b = [3.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let s = a.transpose_matvec(&b).unwrap();
        assert_eq!(s, vec![3.0, 3.0, 3.0]);
        let x_star = x_star.unwrap();
        let energy = |x: &[f64]| {
            let d: Vec<f64> = x.iter().zip(&x_star).map(|(p, q)| p - q).collect();
            norm2(&a.matvec(&d).unwrap())
        };
        let mut st = SolverState::new(&a, &b, None).unwrap();
        let before = energy(&st.x);
        match fbcd_step(&mut st, &a).unwrap() {
            StepOutcome::Advanced { block, .. } => assert_eq!(block.indices(), &[0, 1, 2]),
            StepOutcome::Stationary => panic!("unexpected stationary"),
        }
        assert!(energy(&st.x) < before);
    }

    #[test]
    fn cd_examples() {
        let a = identity(2);
        let mut st = SolverState::new(&a, &[1.0, 2.0], None).unwrap();
        cd_step(&mut st, &a, 1).unwrap();
        assert_eq!(st.x, vec![0.0, 2.0]);

        let a = dense(2, 1, &[1.0, 1.0]);
        let mut st = SolverState::new(&a, &[0.0, 2.0], None).unwrap();
        cd_step(&mut st, &a, 0).unwrap();
        assert_eq!(st.x, vec![1.0]);
    }

    #[test]
    fn mrbgs_identity_steps() {
        let a = identity(2);
        // s = (1, 2): cutoff 0.3 * 4 = 1.2 keeps only the second entry
        let mut st = SolverState::new(&a, &[1.0, 2.0], None).unwrap();
        match mrbgs_step(&mut st, &a, 0.3).unwrap() {
            StepOutcome::Advanced { block, .. } => assert_eq!(block.indices(), &[1]),
            StepOutcome::Stationary => panic!("unexpected stationary"),
        }
        mrbgs_step(&mut st, &a, 0.3).unwrap();
        assert!((st.x[0] - 1.0).abs() < 1e-15 && (st.x[1] - 2.0).abs() < 1e-15);

        // s = (2, 3): cutoff 2.7 keeps both, and the block solve is exact
        let mut st = SolverState::new(&a, &[2.0, 3.0], None).unwrap();
        match mrbgs_step(&mut st, &a, 0.3).unwrap() {
            StepOutcome::Advanced { block, .. } => assert_eq!(block.indices(), &[0, 1]),
            StepOutcome::Stationary => panic!("unexpected stationary"),
        }
        assert!((st.x[0] - 2.0).abs() < 1e-15 && (st.x[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn mrbgs_singleton_matches_cd() {
        let a = dense(3, 2, &[1.0, 0.5, 2.0, 0.0, 0.0, 1.0]);
        let b = [1.0, 3.0, 0.2];
        let s = a.transpose_matvec(&b).unwrap();
        // fraction 1 keeps only the argmax
        let mut p = SolverState::new(&a, &b, None).unwrap();
        let mut q = p.clone();
        mrbgs_step(&mut p, &a, 1.0).unwrap();
        cd_step(&mut q, &a, greedy_index(&s)).unwrap();
        for (u, v) in p.x.iter().zip(&q.x) {
            assert!((u - v).abs() <= 1e-15 * v.abs().max(1.0));
        }
    }

    #[test]
    fn rank_deficient_block_is_reported() {
        let a = dense(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let mut st = SolverState::new(&a, &[1.0, 1.0, 1.0], None).unwrap();
        match mrbgs_step(&mut st, &a, 0.1) {
            Err(SolverError::SubproblemRankDeficient { block, .. }) => {
                assert_eq!(block, vec![0, 1])
            }
            other => panic!("expected subproblem rank deficiency, got {other:?}"),
        }
    }
}
