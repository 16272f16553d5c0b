//! Block control index rules.
//!
//! Each rule returns `None` when `s = A^T r` is exactly zero, meaning the
//! current iterate already solves the normal equations. Comparisons are
//! inclusive and ties are all kept. The argmax of the rule's score always
//! qualifies mathematically; it is added explicitly so rounding in the
//! squared norm can never produce an empty block.

use crate::block::BlockIndexSet;

fn squared_norm(s: &[f64]) -> f64 {
    s.iter().map(|v| v * v).sum()
}

fn argmax_by(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, v) in values.enumerate() {
        if v > best.1 {
            best = (j, v);
        }
    }
    best
}

fn collect_with_argmax(
    n: usize,
    keep: impl Fn(usize) -> bool,
    argmax: usize,
    s: &[f64],
) -> BlockIndexSet {
    let indices: Vec<usize> = (0..n).filter(|&j| keep(j) || j == argmax).collect();
    BlockIndexSet::gather(indices, s)
}

/// `τ = { j : s_j² ≥ ||s||² / n }` with direction values `s_j`.
pub fn select_block_madbcd(s: &[f64]) -> Option<BlockIndexSet> {
    let n = s.len();
    let total = squared_norm(s);
    if total == 0.0 {
        return None;
    }
    let threshold = total / n as f64;
    let (jmax, _) = argmax_by(s.iter().map(|v| v * v));
    Some(collect_with_argmax(
        n,
        |j| s[j] * s[j] >= threshold,
        jmax,
        s,
    ))
}

/// Fast block rule: returns `δ` and `τ = { j : s_j² ≥ δ ||s||² ||A_(j)||² }`
/// where `δ = ½ (max_j (s_j² / ||A_(j)||²) / ||s||² + 1 / ||A||_F²)`.
///
/// `column_norms` are Euclidean norms (not squared) and must be positive.
pub fn select_block_fbcd(
    s: &[f64],
    column_norms: &[f64],
    frobenius: f64,
) -> Option<(f64, BlockIndexSet)> {
    assert_eq!(
        s.len(),
        column_norms.len(),
        "gradient/column-norm length mismatch"
    );
    let total = squared_norm(s);
    if total == 0.0 {
        return None;
    }
    let (jmax, max_ratio) = argmax_by(s.iter().zip(column_norms).map(|(v, c)| v * v / (c * c)));
    let delta = 0.5 * (max_ratio / total + 1.0 / (frobenius * frobenius));
    let block = collect_with_argmax(
        s.len(),
        |j| s[j] * s[j] >= delta * total * column_norms[j] * column_norms[j],
        jmax,
        s,
    );
    Some((delta, block))
}

/// Maximal-residual rule: `τ = { j : s_j² ≥ fraction · max_j s_j² }`.
pub fn select_block_mrbgs(s: &[f64], fraction: f64) -> Option<BlockIndexSet> {
    assert!(
        fraction > 0.0 && fraction <= 1.0,
        "fraction must lie in (0, 1]"
    );
    let (jmax, max_sq) = argmax_by(s.iter().map(|v| v * v));
    if max_sq == 0.0 {
        return None;
    }
    let cutoff = fraction * max_sq;
    Some(collect_with_argmax(
        s.len(),
        |j| s[j] * s[j] >= cutoff,
        jmax,
        s,
    ))
}
