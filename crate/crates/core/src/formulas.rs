//! Closed forms and recursions for the expected hitting times, evaluated in
//! exact rational arithmetic.
//!
//! Notation: `n` urns, `M` balls, `s_M` the expected time to go from
//! `(1,…,1)` to `(2,…,2)`, and `e_k` the expected time the urn-2 occupancy
//! chain needs to climb from `k` to `k + 1`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::model::{Configuration, ModelParams};
use crate::oracle;
use crate::scalar::{from_int, ratio, ExactScalar};
use crate::{Error, Result};

/// Binomial coefficient `C(n, m)`.
pub fn binomial(n: u64, m: u64) -> Result<BigUint> {
    if m > n {
        return Err(Error::Domain(format!("C({n}, {m}) needs m <= n")));
    }
    let m = m.min(n - m);
    // each partial product C(n - m + j, j) is an integer
    let mut acc = BigUint::one();
    for j in 1..=m {
        acc *= n - m + j;
        acc /= j;
    }
    Ok(acc)
}

fn binomial_q(n: u64, m: u64) -> ExactScalar {
    from_int(BigInt::from(binomial(n, m).expect("caller keeps m <= n")))
}

fn pow_q(base: u64, exp: u64) -> ExactScalar {
    from_int(BigInt::from(base).pow(exp as u32))
}

/// `s_M = ((n−1)M/n) Σ_{k=1}^{M} n^k / k`.
pub fn s_closed_form(params: ModelParams) -> ExactScalar {
    let n = params.urns() as u64;
    let m = params.balls() as u64;
    let mut sum = ExactScalar::zero();
    let mut power = BigInt::one();
    for k in 1..=m {
        power *= n;
        sum += ratio(power.clone(), k);
    }
    ratio((n - 1) * m, n) * sum
}

/// `e_k = ((n−1)^{k+1} / C(M−1, k)) Σ_{ℓ=0}^{k} C(M, ℓ) / (n−1)^ℓ`, for
/// `0 <= k <= M − 1`.
pub fn e_k(params: ModelParams, k: u64) -> Result<ExactScalar> {
    let m = params.balls() as u64;
    if k >= m {
        return Err(Error::Domain(format!("e_k needs 0 <= k <= M-1 = {}, got k = {k}", m - 1)));
    }
    let n1 = params.urns() as u64 - 1;
    let inner: ExactScalar = (0..=k).map(|l| binomial_q(m, l) / pow_q(n1, l)).sum();
    Ok(pow_q(n1, k + 1) / binomial_q(m - 1, k) * inner)
}

/// All of `e_0, …, e_{M−1}` from the closed form.
pub fn e_k_all(params: ModelParams) -> Vec<ExactScalar> {
    (0..params.balls() as u64).map(|k| e_k(params, k).expect("k in range")).collect()
}

/// `e_0 = n − 1`, `e_k = ((n−1)k/(M−k)) e_{k−1} + (n−1)M/(M−k)`.
pub fn e_k_by_recursion(params: ModelParams) -> Vec<ExactScalar> {
    let n1 = params.urns() as u64 - 1;
    let m = params.balls() as u64;
    let mut out = Vec::with_capacity(m as usize);
    let mut prev = from_int(n1);
    out.push(prev.clone());
    for k in 1..m {
        prev = ratio(n1 * k, m - k) * &prev + ratio(n1 * m, m - k);
        out.push(prev.clone());
    }
    out
}

/// `s_1 = n − 1`, `s_k = (k/(k−1)) s_{k−1} + (n−1) n^{k−1}`, run up to `k = M`.
pub fn s_by_induction(params: ModelParams) -> ExactScalar {
    let n = params.urns() as u64;
    let mut s = from_int(n - 1);
    let mut power = BigInt::one();
    for k in 2..=params.balls() as u64 {
        power *= n;
        s = ratio(k, k - 1) * s + from_int(BigInt::from(n - 1) * &power);
    }
    s
}

/// A request for the expected time between two configurations that differ
/// in exactly `hamming_distance` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HittingQuery {
    pub params: ModelParams,
    pub hamming_distance: u32,
}

impl HittingQuery {
    /// `L = 0` is refused with [`Error::IdenticalConfigurations`]; `L > M`
    /// is a domain error.
    pub fn new(params: ModelParams, hamming_distance: u32) -> Result<Self> {
        if hamming_distance == 0 {
            return Err(Error::IdenticalConfigurations);
        }
        if hamming_distance > params.balls() {
            return Err(Error::Domain(format!(
                "Hamming distance {hamming_distance} exceeds the number of balls {}",
                params.balls()
            )));
        }
        Ok(Self { params, hamming_distance })
    }

    pub fn from_pair(params: ModelParams, from: &Configuration, to: &Configuration) -> Result<Self> {
        from.validate(params)?;
        to.validate(params)?;
        Self::new(params, from.hamming(to) as u32)
    }

    /// `(1,…,1)` and the configuration with its last `L` balls in urn 2.
    pub fn canonical_pair(&self) -> (Configuration, Configuration) {
        let start = Configuration::all_ones(self.params);
        let m = self.params.balls() as usize;
        let target = (m - self.hamming_distance as usize..m).fold(start.clone(), |c, ball| c.with_ball_in(ball, 2));
        (start, target)
    }
}

/// `Σ_{k=M−L}^{M−1} e_k`: the expected time between two configurations at
/// Hamming distance `L`.
pub fn general_hitting_time(query: HittingQuery) -> ExactScalar {
    let m = query.params.balls() as u64;
    let l = query.hamming_distance as u64;
    (m - l..m).map(|k| e_k(query.params, k).expect("k in range")).sum()
}

/// Both sides of `Σ_k e_k = s_M`, with their per-`k` terms.
///
/// The right-hand terms are `((n−1)M/n) · n^{k+1}/(k+1)`; the totals agree
/// while individual terms in general do not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumIdentity {
    pub lhs: ExactScalar,
    pub rhs: ExactScalar,
    pub lhs_terms: Vec<ExactScalar>,
    pub rhs_terms: Vec<ExactScalar>,
}

impl SumIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn termwise_equal(&self) -> bool {
        self.lhs_terms == self.rhs_terms
    }
}

pub fn verify_identity_eq3(params: ModelParams) -> SumIdentity {
    let n = params.urns() as u64;
    let m = params.balls() as u64;
    let lhs_terms = e_k_all(params);
    let scale = ratio((n - 1) * m, n);
    let rhs_terms: Vec<_> = (0..m).map(|k| &scale * pow_q(n, k + 1) / from_int(k + 1)).collect();
    SumIdentity {
        lhs: lhs_terms.iter().sum(),
        rhs: s_closed_form(params),
        lhs_terms,
        rhs_terms,
    }
}

/// `(n^{k−1} − 1)/(n^k − 1)` with `k` = number of balls: the chance that the
/// walk from `(1,…,1)` enters the fiber `{(2,…,2,x)}` at `(2,…,2)`.
pub fn corollary_first_visit_prob(params: ModelParams) -> ExactScalar {
    let n = BigInt::from(params.urns());
    let k = params.balls();
    ratio(n.pow(k - 1) - 1, n.pow(k) - 1)
}

/// `p = P_{(1,…,1)}(T > τ_1)`, `q = P(T > τ_2 | T > τ_1)` and `p/(1−q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscapeRatio {
    pub p_escape: ExactScalar,
    pub q_escape: ExactScalar,
    pub ratio: ExactScalar,
}

/// `p` comes from the closed form for the first-visit probability and `q`
/// from the lumped-chain solve (`1 − q` is the first-visit probability from
/// the class of `(2,…,2,x)`, `x ≠ 2`). Fails with
/// [`Error::InvariantViolation`] unless `p/(1−q) = n − 1` exactly.
pub fn lemma34_ratio(params: ModelParams) -> Result<EscapeRatio> {
    if params.balls() < 2 {
        return Err(Error::Domain("escape ratio needs at least 2 balls".into()));
    }
    let p_escape = ExactScalar::one() - corollary_first_visit_prob(params);
    let lumped = oracle::lumped_first_visit_probs(params)?;
    let from_fiber_off_target = &lumped[lumped.len() - 2];
    let q_escape = ExactScalar::one() - from_fiber_off_target;
    if from_fiber_off_target.is_zero() {
        return Err(Error::InvariantViolation("1 - q vanished".into()));
    }
    let ratio = &p_escape / from_fiber_off_target;
    if ratio != from_int(params.urns() - 1) {
        return Err(Error::InvariantViolation(format!(
            "p/(1-q) = {ratio} for {params}, expected {}",
            params.urns() - 1
        )));
    }
    Ok(EscapeRatio { p_escape, q_escape, ratio })
}
