//! The urn-2 occupancy chain `S_t` on `{0, …, M}`.
//!
//! ```text
//! p(k, k−1) = k/M
//! p(k, k)   = (n−2)(M−k) / ((n−1)M)
//! p(k, k+1) = (M−k) / ((n−1)M)
//! ```

use num_traits::{One, Zero};

use crate::formulas::binomial;
use crate::matrix::TransitionMatrix;
use crate::model::{ModelParams, StateSpace, TARGET_URN};
use crate::scalar::{from_int, ratio, zero, ExactScalar};
use crate::{model, Result};

/// Default state budget for [`occupancy_lumping_check`].
pub const LUMPING_CHECK_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyChain {
    params: ModelParams,
    kernel: TransitionMatrix,
}

impl OccupancyChain {
    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn kernel(&self) -> &TransitionMatrix {
        &self.kernel
    }

    pub fn down(&self, k: usize) -> &ExactScalar {
        self.kernel.get(k, k - 1)
    }

    pub fn stay(&self, k: usize) -> &ExactScalar {
        self.kernel.get(k, k)
    }

    pub fn up(&self, k: usize) -> &ExactScalar {
        self.kernel.get(k, k + 1)
    }

    /// Normalized `π_k ∝ C(M, k) (n−1)^{M−k}`, the binomial law of the urn-2
    /// count under the uniform distribution on configurations.
    pub fn reversible_measure(&self) -> Vec<ExactScalar> {
        let m = self.params.balls() as u64;
        let n1 = num_bigint::BigInt::from(self.params.urns() - 1);
        let weights: Vec<ExactScalar> = (0..=m)
            .map(|k| {
                let c = num_bigint::BigInt::from(binomial(m, k).expect("k <= M"));
                from_int(c * n1.pow((m - k) as u32))
            })
            .collect();
        let total: ExactScalar = weights.iter().sum();
        weights.into_iter().map(|w| w / &total).collect()
    }

    /// `π_k p(k, k+1) = π_{k+1} p(k+1, k)` for every `k`, exactly.
    pub fn satisfies_detailed_balance(&self) -> bool {
        let pi = self.reversible_measure();
        (0..self.params.balls() as usize).all(|k| &pi[k] * self.up(k) == &pi[k + 1] * self.down(k + 1))
    }
}

pub fn build_occupancy_chain(params: ModelParams) -> OccupancyChain {
    let m = params.balls() as u64;
    let n1 = params.urns() as u64 - 1;
    let n2 = params.urns() as u64 - 2;
    let dim = m as usize + 1;
    let mut rows = vec![vec![zero(); dim]; dim];
    for k in 0..=m {
        let row = &mut rows[k as usize];
        if k >= 1 {
            row[k as usize - 1] = ratio(k, m);
        }
        row[k as usize] = ratio(n2 * (m - k), n1 * m);
        if k < m {
            row[k as usize + 1] = ratio(m - k, n1 * m);
        }
    }
    let kernel = TransitionMatrix::new(rows).expect("occupancy kernel is stochastic by construction");
    OccupancyChain { params, kernel }
}

/// `e_k = E_0(τ_{k+1} − τ_k)` by first-step analysis on the chain's own
/// kernel entries.
///
/// Conditioning on the first move out of level `k` gives
/// `e_k = p↓(e_{k−1} + e_k + 1) + p→(e_k + 1) + p↑`, i.e.
/// `e_k = (1 + p↓ e_{k−1}) / p↑`, so the system is solved by forward
/// substitution.
pub fn passage_increments_by_solve(chain: &OccupancyChain) -> Vec<ExactScalar> {
    let m = chain.params.balls() as usize;
    let mut out: Vec<ExactScalar> = Vec::with_capacity(m);
    for k in 0..m {
        let down = if k == 0 { zero() } else { chain.down(k).clone() };
        let prev = out.last().cloned().unwrap_or_else(zero);
        debug_assert!(!chain.up(k).is_zero());
        out.push((ExactScalar::one() + down * prev) / chain.up(k));
    }
    out
}

/// Aggregates the full walk by the number of balls in urn 2 and checks that
/// every state reproduces the occupancy kernel exactly.
///
/// Fails with [`crate::Error::TooLarge`] when `n^M > budget`.
pub fn occupancy_lumping_check(params: ModelParams, budget: u64) -> Result<bool> {
    let space = StateSpace::new(params, budget)?;
    let chain = build_occupancy_chain(params);
    let counts: Vec<usize> = (0..space.len()).map(|s| space.count_in_urn(s, TARGET_URN)).collect();
    Ok(model::lumping_mismatch(&space, |s| counts[s], chain.kernel()).is_none())
}

/// Same as [`occupancy_lumping_check`] with the default budget.
pub fn occupancy_lumping_check_default(params: ModelParams) -> Result<bool> {
    occupancy_lumping_check(params, LUMPING_CHECK_BUDGET)
}
