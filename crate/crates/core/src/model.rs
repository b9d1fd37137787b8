//! The walk itself: parameters, configurations, the state space
//! `{1,…,n}^M`, its transition kernel, the label-swapping automorphisms and
//! the `2k`-class lumped chain.
//!
//! Urn labels are 1-based wherever a caller can see them. Internally a
//! configuration is a base-`n` number whose least significant digit is the
//! urn of ball 1 (digit = urn − 1).

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::matrix::TransitionMatrix;
use crate::scalar::{ratio, zero, ExactScalar};
use crate::{Error, Result};

/// Urn holding the target configuration `(2,…,2)`.
pub const TARGET_URN: u32 = 2;

/// Number of urns `n` and balls `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    urns: u32,
    balls: u32,
}

impl ModelParams {
    pub fn new(urns: u32, balls: u32) -> Result<Self> {
        if urns < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 urns, got {urns}")));
        }
        if balls < 1 {
            return Err(Error::InvalidParams("need at least 1 ball".into()));
        }
        Ok(Self { urns, balls })
    }

    pub fn urns(&self) -> u32 {
        self.urns
    }

    pub fn balls(&self) -> u32 {
        self.balls
    }

    /// Same urn count, different number of balls.
    pub fn with_balls(&self, balls: u32) -> Result<Self> {
        Self::new(self.urns, balls)
    }

    /// Common degree `(n−1)·M` of the walk's graph.
    pub fn degree(&self) -> u64 {
        u64::from(self.urns - 1) * u64::from(self.balls)
    }

    /// `n^M`, exactly.
    pub fn state_count(&self) -> BigUint {
        BigUint::from(self.urns).pow(self.balls)
    }

    /// `n^M` if it fits in a `usize`.
    pub fn state_count_usize(&self) -> Option<usize> {
        (self.urns as usize).checked_pow(self.balls)
    }

    /// `n^M`, or [`Error::TooLarge`] when it exceeds `budget`.
    pub fn states_within(&self, budget: u64) -> Result<usize> {
        match self.state_count_usize() {
            Some(count) if count as u64 <= budget => Ok(count),
            _ => Err(Error::TooLarge { states: self.state_count(), budget }),
        }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, M={}", self.urns, self.balls)
    }
}

/// Placement of the `M` labeled balls; entry `i` is the (1-based) urn of
/// ball `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    placement: Vec<u32>,
}

impl Configuration {
    pub fn new(placement: Vec<u32>, params: ModelParams) -> Result<Self> {
        let config = Self { placement };
        config.validate(params)?;
        Ok(config)
    }

    /// Every ball in `urn`.
    pub fn uniform(urn: u32, params: ModelParams) -> Result<Self> {
        Self::new(vec![urn; params.balls as usize], params)
    }

    /// `(1,…,1)`.
    pub fn all_ones(params: ModelParams) -> Self {
        Self { placement: vec![1; params.balls as usize] }
    }

    /// `(2,…,2)`.
    pub fn all_target(params: ModelParams) -> Self {
        Self { placement: vec![TARGET_URN; params.balls as usize] }
    }

    /// Parses comma-separated 1-based urn indices, e.g. `"1, 1,2"`.
    pub fn parse(text: &str, params: ModelParams) -> Result<Self> {
        let placement = text
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidConfiguration(format!("cannot parse urn index {part:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(placement, params)
    }

    pub fn validate(&self, params: ModelParams) -> Result<()> {
        if self.placement.len() != params.balls as usize {
            return Err(Error::InvalidConfiguration(format!(
                "expected {} entries, got {}",
                params.balls,
                self.placement.len()
            )));
        }
        if let Some(&bad) = self.placement.iter().find(|&&u| u < 1 || u > params.urns) {
            return Err(Error::InvalidConfiguration(format!(
                "urn index {bad} outside 1..={}",
                params.urns
            )));
        }
        Ok(())
    }

    pub fn placement(&self) -> &[u32] {
        &self.placement
    }

    pub fn len(&self) -> usize {
        self.placement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placement.is_empty()
    }

    /// Number of coordinates where `self` and `other` differ.
    pub fn hamming(&self, other: &Self) -> usize {
        self.placement.iter().zip(&other.placement).filter(|(a, b)| a != b).count()
    }

    /// Copy with ball `ball` (0-based) moved to `urn`.
    pub fn with_ball_in(&self, ball: usize, urn: u32) -> Self {
        let mut placement = self.placement.clone();
        placement[ball] = urn;
        Self { placement }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, urn) in self.placement.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{urn}")?;
        }
        Ok(())
    }
}

/// Position of a configuration in the canonical enumeration of `{1,…,n}^M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateIndex(pub usize);

/// The enumerated vertex set `{1,…,n}^M` with base-`n` index arithmetic.
#[derive(Debug, Clone)]
pub struct StateSpace {
    params: ModelParams,
    len: usize,
    strides: Vec<usize>,
}

impl StateSpace {
    /// Fails with [`Error::TooLarge`] if `n^M > budget`.
    pub fn new(params: ModelParams, budget: u64) -> Result<Self> {
        let len = params.states_within(budget)?;
        let n = params.urns as usize;
        let strides = (0..params.balls).map(|i| n.pow(i)).collect();
        Ok(Self { params, len, strides })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn encode(&self, config: &Configuration) -> StateIndex {
        StateIndex(
            config
                .placement
                .iter()
                .zip(&self.strides)
                .map(|(&urn, &stride)| (urn as usize - 1) * stride)
                .sum(),
        )
    }

    pub fn decode(&self, index: StateIndex) -> Configuration {
        let placement = (0..self.strides.len()).map(|i| self.urn_of(index.0, i)).collect();
        Configuration { placement }
    }

    /// 1-based urn of ball `ball` (0-based) in state `state`.
    pub fn urn_of(&self, state: usize, ball: usize) -> u32 {
        ((state / self.strides[ball]) % self.params.urns as usize) as u32 + 1
    }

    /// The `(n−1)·M` neighbours of `state`, ordered by ball then urn.
    pub fn neighbors_of(&self, state: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.params.urns as usize;
        self.strides.iter().flat_map(move |&stride| {
            let digit = (state / stride) % n;
            let base = state - digit * stride;
            (0..n).filter(move |&d| d != digit).map(move |d| base + d * stride)
        })
    }

    /// Number of balls of `state` sitting in `urn`.
    pub fn count_in_urn(&self, state: usize, urn: u32) -> usize {
        (0..self.strides.len()).filter(|&i| self.urn_of(state, i) == urn).count()
    }
}

/// All configurations adjacent to `c`: exactly one ball in a different urn.
pub fn neighbors(c: &Configuration, params: ModelParams) -> Result<Vec<Configuration>> {
    c.validate(params)?;
    let mut out = Vec::with_capacity(params.degree() as usize);
    for (ball, &current) in c.placement.iter().enumerate() {
        for urn in (1..=params.urns).filter(|&u| u != current) {
            out.push(c.with_ball_in(ball, urn));
        }
    }
    Ok(out)
}

/// One-step probability of the walk: `1/((n−1)M)` between neighbours, else 0.
pub fn transition_probability(from: &Configuration, to: &Configuration, params: ModelParams) -> Result<ExactScalar> {
    from.validate(params)?;
    to.validate(params)?;
    Ok(if from.hamming(to) == 1 { ratio(1, params.degree()) } else { zero() })
}

/// Dense kernel of the full walk. Only sensible for a few hundred states.
pub fn full_kernel(space: &StateSpace) -> Result<TransitionMatrix> {
    let p = ratio(1, space.params().degree());
    let rows = (0..space.len())
        .map(|s| {
            let mut row = vec![zero(); space.len()];
            for t in space.neighbors_of(s) {
                row[t] = p.clone();
            }
            row
        })
        .collect();
    TransitionMatrix::new(rows)
}

/// Coordinatewise relabelling `c ↦ (f_1(c_1), …, f_M(c_M))` where `f_i`
/// swaps urns `1` and `a_i` and fixes everything else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    // maps[i][u - 1] = f_i(u)
    maps: Vec<Vec<u32>>,
}

/// Builds the automorphism sending `(1,…,1)` to `target` while fixing
/// `(2,…,2)`. No entry of `target` may be urn 2.
pub fn build_automorphism(target: &Configuration, params: ModelParams) -> Result<Automorphism> {
    target.validate(params)?;
    if let Some(pos) = target.placement.iter().position(|&u| u == TARGET_URN) {
        return Err(Error::Precondition(format!(
            "automorphism target must avoid urn {TARGET_URN}, but ball {} is there",
            pos + 1
        )));
    }
    let maps = target
        .placement
        .iter()
        .map(|&a| {
            (1..=params.urns)
                .map(|u| match u {
                    1 => a,
                    u if u == a => 1,
                    u => u,
                })
                .collect()
        })
        .collect();
    Ok(Automorphism { maps })
}

impl Automorphism {
    pub fn apply(&self, c: &Configuration) -> Configuration {
        let placement = c.placement.iter().zip(&self.maps).map(|(&u, f)| f[u as usize - 1]).collect();
        Configuration { placement }
    }

    pub fn apply_index(&self, space: &StateSpace, index: StateIndex) -> StateIndex {
        space.encode(&self.apply(&space.decode(index)))
    }

    /// The induced permutation of state indices.
    pub fn as_permutation(&self, space: &StateSpace) -> Vec<StateIndex> {
        (0..space.len()).map(|s| self.apply_index(space, StateIndex(s))).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|f| f.iter().zip(1..).all(|(&x, u)| x == u))
    }
}

/// Class `B_m` of the lumped partition: `i − 1` of the first `k − 1`
/// balls sit in urn 2, and `last_is_target` says whether ball `k` does too.
/// `m = 2i − 1` when it does not, `m = 2i` when it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LumpClass {
    pub m: u32,
    pub i: u32,
    pub last_is_target: bool,
}

impl LumpClass {
    pub fn new(i: u32, last_is_target: bool) -> Self {
        let m = if last_is_target { 2 * i } else { 2 * i - 1 };
        Self { m, i, last_is_target }
    }

    /// 0-based row/column in [`lumped_kernel`].
    pub fn index(&self) -> usize {
        self.m as usize - 1
    }
}

pub fn lump_class_of(c: &Configuration, params: ModelParams) -> Result<LumpClass> {
    c.validate(params)?;
    let (last, prefix) = c.placement.split_last().expect("at least one ball");
    let in_target = prefix.iter().filter(|&&u| u == TARGET_URN).count() as u32;
    Ok(LumpClass::new(in_target + 1, *last == TARGET_URN))
}

/// Kernel `q` of the lumped chain on `B_1, …, B_{2k}`, with `k` = number of
/// balls.
///
/// From `B_{2i}` the last ball leaves urn 2 with probability `1/k`; one of
/// the other `i − 1` balls in urn 2 leaves with `(i−1)/k`; one of the `k − i`
/// balls outside urn 2 enters it with `(k−i)/(k(n−1))` or moves elsewhere
/// with `(k−i)(n−2)/(k(n−1))`. Rows of `B_{2i−1}` are analogous.
///
/// The partition is a strong lumping of the full walk (every state in a
/// class has the same class-to-class probabilities), so this chain can be
/// compared with the full walk from any starting state; the comparisons in
/// this crate start from `(1,…,1)` and `(2,…,2)`.
pub fn lumped_kernel(params: ModelParams) -> TransitionMatrix {
    let k = params.balls as u64;
    let n1 = params.urns as u64 - 1;
    let n2 = params.urns as u64 - 2;
    let dim = 2 * k as usize;
    let mut q = vec![vec![zero(); dim]; dim];
    // 1-based class labels, as in B_m
    let mut set = |from: u64, to: u64, value: ExactScalar| {
        q[from as usize - 1][to as usize - 1] += value;
    };
    for i in 1..=k {
        let (even, odd) = (2 * i, 2 * i - 1);
        set(even, odd, ratio(1, k));
        if i >= 2 {
            set(even, even - 2, ratio(i - 1, k));
            set(odd, odd - 2, ratio(i - 1, k));
        }
        if i < k {
            set(even, even + 2, ratio(k - i, k * n1));
            set(odd, odd + 2, ratio(k - i, k * n1));
        }
        set(even, even, ratio((k - i) * n2, k * n1));
        set(odd, even, ratio(1, k * n1));
        set(odd, odd, ratio((k - i + 1) * n2, k * n1));
    }
    TransitionMatrix::new(q).expect("lumped kernel rows are stochastic by construction")
}

/// A state whose class-to-class probabilities disagree with a reference
/// kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LumpingMismatch {
    pub state: StateIndex,
    pub to_class: usize,
    pub observed: ExactScalar,
    pub expected: ExactScalar,
}

/// Aggregates the full walk by `class_of` and compares every state's
/// class-transition probabilities with `reference`. `None` means the
/// partition is a strong lumping with kernel `reference`.
pub fn lumping_mismatch(
    space: &StateSpace,
    class_of: impl Fn(usize) -> usize,
    reference: &TransitionMatrix,
) -> Option<LumpingMismatch> {
    let degree = space.params().degree();
    let classes = reference.dim();
    let mut counts = vec![0u64; classes];
    for s in 0..space.len() {
        counts.iter_mut().for_each(|c| *c = 0);
        for t in space.neighbors_of(s) {
            counts[class_of(t)] += 1;
        }
        let from = class_of(s);
        for (to, &count) in counts.iter().enumerate() {
            let observed = ratio(count, degree);
            if &observed != reference.get(from, to) {
                return Some(LumpingMismatch {
                    state: StateIndex(s),
                    to_class: to,
                    observed,
                    expected: reference.get(from, to).clone(),
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn params(n: u32, m: u32) -> ModelParams {
        ModelParams::new(n, m).unwrap()
    }

    fn cfg(p: &[u32], params: ModelParams) -> Configuration {
        Configuration::new(p.to_vec(), params).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 3).is_err());
        assert!(ModelParams::new(3, 0).is_err());
        assert!(matches!(params(10, 10).states_within(4096), Err(Error::TooLarge { .. })));
        assert_eq!(params(5, 3).states_within(125).unwrap(), 125);
    }

    #[test]
    fn parse_is_whitespace_tolerant_and_validates() {
        let p = params(3, 3);
        assert_eq!(Configuration::parse(" 1, 2 ,3", p).unwrap().placement(), &[1, 2, 3]);
        assert!(Configuration::parse("1,2", p).is_err());
        assert!(Configuration::parse("1,2,4", p).is_err());
        assert!(Configuration::parse("1,x,2", p).is_err());
        assert!(Configuration::parse("0,1,1", p).is_err());
    }

    #[test]
    fn neighbors_two_urns_one_ball() {
        let p = params(2, 1);
        assert_eq!(neighbors(&cfg(&[1], p), p).unwrap(), vec![cfg(&[2], p)]);
    }

    #[test]
    fn neighbors_three_urns_two_balls() {
        let p = params(3, 2);
        let got: BTreeSet<_> = neighbors(&cfg(&[1, 1], p), p).unwrap().into_iter().collect();
        let want: BTreeSet<_> = [[2, 1], [3, 1], [1, 2], [1, 3]].iter().map(|c| cfg(c, p)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn neighbors_rejects_invalid_configuration() {
        let p = params(3, 2);
        let bad = Configuration { placement: vec![1, 4] };
        assert!(matches!(neighbors(&bad, p), Err(Error::InvalidConfiguration(_))));
        let short = Configuration { placement: vec![1] };
        assert!(neighbors(&short, p).is_err());
    }

    #[test]
    fn degree_matches_exhaustive_enumeration_n5_m3() {
        // independent count: every (ball, other urn) pair, deduplicated
        let p = params(5, 3);
        let space = StateSpace::new(p, 1000).unwrap();
        for s in 0..space.len() {
            let c = space.decode(StateIndex(s));
            let mut brute = BTreeSet::new();
            for t in 0..space.len() {
                let d = space.decode(StateIndex(t));
                if c.hamming(&d) == 1 {
                    brute.insert(d);
                }
            }
            let listed: BTreeSet<_> = neighbors(&c, p).unwrap().into_iter().collect();
            assert_eq!(listed.len(), 12);
            assert_eq!(listed, brute);
            let by_index: BTreeSet<_> = space.neighbors_of(s).map(|t| space.decode(StateIndex(t))).collect();
            assert_eq!(by_index, brute);
        }
    }

    #[test]
    fn transition_probability_examples() {
        let p = params(3, 2);
        assert_eq!(transition_probability(&cfg(&[1, 1], p), &cfg(&[2, 1], p), p).unwrap(), ratio(1, 4));
        assert!(transition_probability(&cfg(&[1, 1], p), &cfg(&[1, 1], p), p).unwrap().is_zero());
        let p5 = params(5, 3);
        assert!(transition_probability(&cfg(&[1, 1, 1], p5), &cfg(&[2, 2, 1], p5), p5).unwrap().is_zero());
        assert!(transition_probability(&cfg(&[1, 1, 1], p5), &cfg(&[1, 1], p), p5).is_err());
    }

    #[test]
    fn full_kernel_is_symmetric_and_stochastic() {
        for (n, m) in [(2, 3), (3, 2), (4, 2), (3, 3)] {
            let space = StateSpace::new(params(n, m), 100).unwrap();
            let kernel = full_kernel(&space).unwrap();
            for a in 0..space.len() {
                for b in 0..space.len() {
                    assert_eq!(kernel.get(a, b), kernel.get(b, a));
                }
            }
        }
    }

    #[test]
    fn encoding_uses_ball_one_as_least_significant_digit() {
        let p = params(3, 2);
        let space = StateSpace::new(p, 100).unwrap();
        assert_eq!(space.encode(&cfg(&[1, 1], p)), StateIndex(0));
        assert_eq!(space.encode(&cfg(&[2, 1], p)), StateIndex(1));
        assert_eq!(space.encode(&cfg(&[1, 2], p)), StateIndex(3));
        assert_eq!(space.encode(&cfg(&[3, 3], p)), StateIndex(8));
    }

    #[test]
    fn automorphism_identity_for_all_ones() {
        let p = params(4, 3);
        assert!(build_automorphism(&Configuration::all_ones(p), p).unwrap().is_identity());
    }

    #[test]
    fn automorphism_swaps_labels() {
        let p = params(3, 2);
        let phi = build_automorphism(&cfg(&[3, 3], p), p).unwrap();
        assert_eq!(phi.apply(&cfg(&[1, 3], p)), cfg(&[3, 1], p));
        assert_eq!(phi.apply(&cfg(&[1, 1], p)), cfg(&[3, 3], p));
        assert_eq!(phi.apply(&cfg(&[2, 2], p)), cfg(&[2, 2], p));
    }

    #[test]
    fn automorphism_rejects_urn_two() {
        let p = params(3, 2);
        assert!(matches!(build_automorphism(&cfg(&[1, 2], p), p), Err(Error::Precondition(_))));
    }

    #[test]
    fn automorphism_n5_m3_is_self_inverse_and_preserves_edges() {
        let p = params(5, 3);
        let space = StateSpace::new(p, 1000).unwrap();
        let phi = build_automorphism(&cfg(&[3, 4, 5], p), p).unwrap();
        let perm = phi.as_permutation(&space);
        for s in 0..space.len() {
            assert_eq!(perm[perm[s].0], StateIndex(s));
        }
        assert_eq!(phi.apply(&Configuration::all_ones(p)), cfg(&[3, 4, 5], p));
        assert_eq!(phi.apply(&Configuration::all_target(p)), Configuration::all_target(p));
        for s in 0..space.len() {
            let mapped: BTreeSet<_> = space.neighbors_of(s).map(|t| perm[t].0).collect();
            let expected: BTreeSet<_> = space.neighbors_of(perm[s].0).collect();
            assert_eq!(mapped, expected);
        }
    }

    #[test]
    fn lump_class_examples() {
        let p = params(4, 3);
        assert_eq!(lump_class_of(&cfg(&[1, 1, 1], p), p).unwrap(), LumpClass { m: 1, i: 1, last_is_target: false });
        assert_eq!(lump_class_of(&cfg(&[2, 2, 2], p), p).unwrap(), LumpClass { m: 6, i: 3, last_is_target: true });
        assert_eq!(lump_class_of(&cfg(&[2, 1, 2], p), p).unwrap(), LumpClass { m: 4, i: 2, last_is_target: true });
    }

    #[test]
    fn lumped_kernel_rows_and_named_rate() {
        let kernel = lumped_kernel(params(4, 4));
        for row in kernel.rows() {
            assert!(row.iter().sum::<ExactScalar>().is_one());
        }
        for (n, k) in [(2u32, 2u32), (3, 5), (7, 3), (2, 1)] {
            let q = lumped_kernel(params(n, k));
            if k >= 2 {
                let m = 2 * k as usize;
                assert_eq!(q.get(m - 1, m - 3), &ratio(k - 1, k));
            }
        }
    }

    #[test]
    fn lumped_kernel_n3_k2_matches_aggregated_full_kernel() {
        // aggregate the dense 9x9 kernel by class, row by row
        let p = params(3, 2);
        let space = StateSpace::new(p, 100).unwrap();
        let full = full_kernel(&space).unwrap();
        let classes: Vec<usize> =
            (0..space.len()).map(|s| lump_class_of(&space.decode(StateIndex(s)), p).unwrap().index()).collect();
        let lumped = lumped_kernel(p);
        for s in 0..space.len() {
            let mut agg = vec![zero(); 4];
            for t in 0..space.len() {
                agg[classes[t]] += full.get(s, t);
            }
            assert_eq!(agg.as_slice(), lumped.row(classes[s]));
        }
        let expected = [
            [ratio(1, 2), ratio(1, 4), ratio(1, 4), zero()],
            [ratio(1, 2), ratio(1, 4), zero(), ratio(1, 4)],
            [ratio(1, 2), zero(), ratio(1, 4), ratio(1, 4)],
            [zero(), ratio(1, 2), ratio(1, 2), zero()],
        ];
        for (i, row) in expected.iter().enumerate() {
            assert_eq!(lumped.row(i), row.as_slice());
        }
    }

    #[test]
    fn lumped_partition_is_strong_lumping_small_grid() {
        for n in 2..=5u32 {
            for k in 1..=5u32 {
                let p = params(n, k);
                let Ok(space) = StateSpace::new(p, 3125) else { continue };
                let kernel = lumped_kernel(p);
                let mismatch = lumping_mismatch(
                    &space,
                    |s| lump_class_of(&space.decode(StateIndex(s)), p).unwrap().index(),
                    &kernel,
                );
                assert_eq!(mismatch, None, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn lumping_mismatch_detects_wrong_kernel() {
        let p = params(3, 2);
        let space = StateSpace::new(p, 100).unwrap();
        let mut rows = lumped_kernel(p).rows().to_vec();
        rows.swap(0, 1);
        let wrong = TransitionMatrix::new(rows).unwrap();
        assert!(lumping_mismatch(&space, |s| lump_class_of(&space.decode(StateIndex(s)), p).unwrap().index(), &wrong)
            .is_some());
    }

    proptest! {
        #[test]
        fn encode_decode_bijective(n in 2u32..7, m in 1u32..6, seed in any::<u64>()) {
            let p = params(n, m);
            let space = StateSpace::new(p, 100_000).unwrap();
            let s = (seed % space.len() as u64) as usize;
            let c = space.decode(StateIndex(s));
            prop_assert!(c.validate(p).is_ok());
            prop_assert_eq!(space.encode(&c), StateIndex(s));
        }

        #[test]
        fn kernel_symmetric_with_regular_degree(n in 2u32..6, m in 1u32..5, a in any::<u64>(), b in any::<u64>()) {
            let p = params(n, m);
            let space = StateSpace::new(p, 100_000).unwrap();
            let ca = space.decode(StateIndex((a % space.len() as u64) as usize));
            let cb = space.decode(StateIndex((b % space.len() as u64) as usize));
            prop_assert_eq!(
                transition_probability(&ca, &cb, p).unwrap(),
                transition_probability(&cb, &ca, p).unwrap()
            );
            let out = neighbors(&ca, p).unwrap();
            prop_assert_eq!(out.len() as u64, p.degree());
            let row_sum: ExactScalar = out.iter().map(|d| transition_probability(&ca, d, p).unwrap()).sum();
            prop_assert!(row_sum.is_one());
        }

        #[test]
        fn automorphism_properties(n in 2u32..6, m in 1u32..5, picks in proptest::collection::vec(any::<u32>(), 5)) {
            let p = params(n, m);
            let allowed: Vec<u32> = (1..=n).filter(|&u| u != TARGET_URN).collect();
            let target: Vec<u32> = (0..m as usize).map(|i| allowed[picks[i] as usize % allowed.len()]).collect();
            let target = Configuration::new(target, p).unwrap();
            let phi = build_automorphism(&target, p).unwrap();
            let space = StateSpace::new(p, 100_000).unwrap();
            prop_assert_eq!(phi.apply(&Configuration::all_ones(p)), target);
            prop_assert_eq!(phi.apply(&Configuration::all_target(p)), Configuration::all_target(p));
            for s in 0..space.len() {
                let c = space.decode(StateIndex(s));
                let image = phi.apply(&c);
                prop_assert_eq!(phi.apply(&image), c.clone());
                for d in neighbors(&c, p).unwrap() {
                    prop_assert_eq!(phi.apply(&d).hamming(&image), 1);
                }
            }
        }
    }
}
