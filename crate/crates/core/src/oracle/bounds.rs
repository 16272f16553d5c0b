use super::jacobi::{dense_extremal_singular_values, gram_extremal_singular_values};
use super::OracleError;
use crate::block::BlockIndexSet;
use crate::matrix::Matrix;

/// Length of the worst-case recurrence run by [`q_from_recurrence`].
pub const RECURRENCE_STEPS: usize = 200;

/// Rate constants for one iteration of the momentum method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremBounds {
    /// `|τ| σ²_min(A) / (n σ²_max(A_τ))`.
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub q: f64,
    /// `q - γ₁`.
    pub tau: f64,
    /// `γ₁ + γ₂ < 1`.
    pub feasible: bool,
}

fn q_closed_form(gamma1: f64, gamma2: f64) -> f64 {
    if gamma2 > 0.0 {
        (gamma1 + (gamma1 * gamma1 + 4.0 * gamma2).sqrt()) / 2.0
    } else {
        gamma1
    }
}

/// `γ₁ = (1+3β+2β²)κ - (3β+1)α`, `γ₂ = (2β²+β)κ`; `κ = 1` unsketched.
fn assemble(alpha: f64, beta: f64, kappa: f64) -> TheoremBounds {
    let gamma1 = (1.0 + 3.0 * beta + 2.0 * beta * beta) * kappa - (3.0 * beta + 1.0) * alpha;
    let gamma2 = (2.0 * beta * beta + beta) * kappa;
    let q = q_closed_form(gamma1, gamma2);
    TheoremBounds {
        alpha,
        gamma1,
        gamma2,
        q,
        tau: q - gamma1,
        feasible: gamma1 + gamma2 < 1.0,
    }
}

impl TheoremBounds {
    pub fn from_alpha(alpha: f64, beta: f64) -> Self {
        assemble(alpha, beta, 1.0)
    }

    /// `q^k (1+τ)`: the bound on `F^(k) / F^(0)` after `k` steps.
    pub fn global_factor(&self, k: usize) -> f64 {
        self.q.powi(k as i32) * (1.0 + self.tau)
    }
}

/// `q` for `F^(k+1) ≤ γ₁F^(k) + γ₂F^(k-1)`, after checking the hypothesis
/// and iterating the worst case (equality, `F^(1) = F^(0) = 1`) to confirm
/// `F^(k+1) ≤ q^k (1+τ) F^(0)`.
pub fn q_from_recurrence(gamma1: f64, gamma2: f64) -> Result<f64, OracleError> {
    if !(gamma1 >= 0.0 && gamma2 >= 0.0) {
        return Err(OracleError::InvalidParameter(format!(
            "gamma1 = {gamma1}, gamma2 = {gamma2} must be nonnegative"
        )));
    }
    if gamma1 + gamma2 >= 1.0 {
        return Err(OracleError::ContractionViolated { gamma1, gamma2 });
    }
    let q = q_closed_form(gamma1, gamma2);
    let tau = q - gamma1;
    let (mut prev, mut cur) = (1.0f64, 1.0f64);
    let mut bound = 1.0 + tau;
    for step in 0..=RECURRENCE_STEPS {
        // cur = F^(step+1); bound = q^step (1+τ)
        if cur > bound * (1.0 + 1e-12) + f64::MIN_POSITIVE {
            return Err(OracleError::RecurrenceBound { step });
        }
        let next = gamma1 * cur + gamma2 * prev;
        prev = cur;
        cur = next;
        bound *= q;
    }
    Ok(q)
}

/// Positive root of `4β² + (4-3α)β - α = 0`. Momentum below this keeps
/// `γ₁ + γ₂ < 1`.
pub fn beta_feasible_max(alpha: f64) -> f64 {
    let p = 4.0 - 3.0 * alpha;
    let disc = p * p + 16.0 * alpha;
    // rationalized form of (-p + √disc) / 8, stable as α → 0
    2.0 * alpha / (p + disc.sqrt())
}

/// Caches `σ_min(A)` so per-iteration bounds cost one small Jacobi solve.
#[derive(Clone, Debug)]
pub struct SpectralOracle {
    pub sigma_min: f64,
    pub sigma_max: f64,
    n: usize,
}

impl SpectralOracle {
    pub fn new(a: &Matrix) -> Self {
        let (sigma_min, sigma_max) = gram_extremal_singular_values(a);
        Self {
            sigma_min,
            sigma_max,
            n: a.cols(),
        }
    }

    /// `σ_max(A_τ)`.
    pub fn block_sigma_max(&self, a: &Matrix, block: &BlockIndexSet) -> Result<f64, OracleError> {
        let sub = a.gather_columns(block.indices())?;
        Ok(dense_extremal_singular_values(&sub).1)
    }

    pub fn alpha(&self, a: &Matrix, block: &BlockIndexSet) -> Result<f64, OracleError> {
        if block.is_empty() {
            return Err(OracleError::InvalidParameter("empty block".into()));
        }
        let smax = self.block_sigma_max(a, block)?;
        Ok(block.len() as f64 * self.sigma_min * self.sigma_min / (self.n as f64 * smax * smax))
    }

    pub fn bounds(
        &self,
        a: &Matrix,
        block: &BlockIndexSet,
        beta: f64,
    ) -> Result<TheoremBounds, OracleError> {
        Ok(TheoremBounds::from_alpha(self.alpha(a, block)?, beta))
    }
}

/// Per-iteration constants for block `τ` and momentum `β`.
pub fn theorem31_bounds(
    a: &Matrix,
    block: &BlockIndexSet,
    beta: f64,
) -> Result<TheoremBounds, OracleError> {
    SpectralOracle::new(a).bounds(a, block, beta)
}

/// Constants for the sketched iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsBounds {
    pub epsilon: f64,
    pub delta: f64,
    /// `γ̃₁`, `γ̃₂`, `q̃` and feasibility, in the same layout as the
    /// unsketched bounds.
    pub bounds: TheoremBounds,
    /// `(n² + n) / (δ ε²)`.
    pub d_theory: f64,
}

impl CsBounds {
    pub fn from_alpha(
        alpha: f64,
        beta: f64,
        epsilon: f64,
        delta: f64,
        n: usize,
    ) -> Result<Self, OracleError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(OracleError::InvalidParameter(format!(
                "epsilon = {epsilon} outside [0, 1)"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(OracleError::InvalidParameter(format!(
                "delta = {delta} outside (0, 1)"
            )));
        }
        let kappa = ((1.0 + epsilon) * (1.0 + epsilon)) / ((1.0 - epsilon) * (1.0 - epsilon));
        let nf = n as f64;
        Ok(Self {
            epsilon,
            delta,
            bounds: assemble(alpha, beta, kappa),
            d_theory: (nf * nf + nf) / (delta * epsilon * epsilon),
        })
    }
}

pub fn theorem41_bounds(
    a: &Matrix,
    block: &BlockIndexSet,
    beta: f64,
    epsilon: f64,
    delta: f64,
) -> Result<CsBounds, OracleError> {
    let alpha = SpectralOracle::new(a).alpha(a, block)?;
    CsBounds::from_alpha(alpha, beta, epsilon, delta, a.cols())
}
