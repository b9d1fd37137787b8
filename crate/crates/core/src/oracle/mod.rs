//! Ground truth from linear algebra on the full `n^M`-state walk.
//!
//! Nothing in here uses a closed form. Every quantity is the solution of a
//! Dirichlet problem: fix values on an absorbing set, require the one-step
//! averaging identity everywhere else, solve exactly. Scaled by the degree
//! `d = (n−1)M` the system has integer coefficients,
//!
//! ```text
//! d·h(x) − Σ_{y ~ x, y transient} h(y) = d·c + Σ_{y ~ x, y absorbing} g(y)
//! ```
//!
//! with `c = 1, g = 0` for expected hitting times and `c = 0, g ∈ {0, 1}`
//! for hitting probabilities.

pub mod certified;
pub mod gauss;

use std::collections::BTreeMap;

use num_traits::One;

use crate::model::{lumped_kernel, Configuration, ModelParams, StateIndex, StateSpace};
use crate::scalar::{from_int, ratio, zero, ExactScalar};
use crate::{Error, Result};

use certified::IntMatrix;

/// Default state budget for exact solves.
pub const DEFAULT_BUDGET: u64 = 4096;
/// Largest state space the floating-point fallback will attempt.
pub const FLOAT_FALLBACK_LIMIT: u64 = 20_000;
/// Relative residual the floating-point fallback must reach.
pub const FLOAT_FALLBACK_TOLERANCE: f64 = 1e-9;
/// Systems with at most this many transient states go through dense
/// rational elimination; larger ones through the certified sparse solver.
pub const DENSE_SOLVE_LIMIT: usize = 64;

/// Which exact solver to use for a Dirichlet problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Auto,
    DenseRational,
    CertifiedSparse,
}

/// The walk stopped on a set of absorbing states.
#[derive(Debug, Clone)]
pub struct AbsorbingSystem {
    space: StateSpace,
    absorbing: Vec<bool>,
    transient: Vec<StateIndex>,
    // position of each transient state in `transient`
    position: Vec<Option<usize>>,
}

impl AbsorbingSystem {
    /// `absorbing` must be non-empty. The walk's graph is connected, so every
    /// transient state then reaches it; this is still checked.
    pub fn new(space: StateSpace, absorbing: impl IntoIterator<Item = StateIndex>) -> Result<Self> {
        let mut mask = vec![false; space.len()];
        for s in absorbing {
            mask[s.0] = true;
        }
        if !mask.iter().any(|&a| a) {
            return Err(Error::Precondition("absorbing set is empty".into()));
        }
        let mut position = vec![None; space.len()];
        let mut transient = Vec::new();
        for (s, &a) in mask.iter().enumerate() {
            if !a {
                position[s] = Some(transient.len());
                transient.push(StateIndex(s));
            }
        }
        let system = Self { space, absorbing: mask, transient, position };
        system.check_reachability()?;
        Ok(system)
    }

    fn check_reachability(&self) -> Result<()> {
        // backwards search from the absorbing set; the graph is undirected
        let mut seen = self.absorbing.clone();
        let mut stack: Vec<usize> = (0..seen.len()).filter(|&s| seen[s]).collect();
        while let Some(s) = stack.pop() {
            for t in self.space.neighbors_of(s) {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        match seen.iter().position(|&v| !v) {
            Some(s) => Err(Error::Singular(format!("state {s} cannot reach the absorbing set"))),
            None => Ok(()),
        }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn transient_states(&self) -> &[StateIndex] {
        &self.transient
    }

    pub fn is_absorbing(&self, s: StateIndex) -> bool {
        self.absorbing[s.0]
    }

    /// Dense sub-kernel `Q` over the transient states (small systems only).
    pub fn sub_kernel(&self) -> Vec<Vec<ExactScalar>> {
        let p = ratio(1, self.space.params().degree());
        self.transient
            .iter()
            .map(|s| {
                let mut row = vec![zero(); self.transient.len()];
                for t in self.space.neighbors_of(s.0) {
                    if let Some(j) = self.position[t] {
                        row[j] = p.clone();
                    }
                }
                row
            })
            .collect()
    }

    fn integer_system(&self, step_cost: i64, boundary: &dyn Fn(usize) -> i64) -> (IntMatrix, Vec<i64>) {
        let degree = self.space.params().degree() as i64;
        let mut rhs = Vec::with_capacity(self.transient.len());
        let rows: Vec<Vec<(usize, i64)>> = self
            .transient
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut row = vec![(i, degree)];
                let mut b = degree * step_cost;
                for t in self.space.neighbors_of(s.0) {
                    match self.position[t] {
                        Some(j) => row.push((j, -1)),
                        None => b += boundary(t),
                    }
                }
                rhs.push(b);
                row
            })
            .collect();
        (IntMatrix::from_rows(self.transient.len(), rows), rhs)
    }

    fn solve(&self, step_cost: i64, boundary: &dyn Fn(usize) -> i64, solver: SolverKind) -> Result<Vec<ExactScalar>> {
        let (a, b) = self.integer_system(step_cost, boundary);
        let dense = match solver {
            SolverKind::Auto => self.transient.len() <= DENSE_SOLVE_LIMIT,
            SolverKind::DenseRational => true,
            SolverKind::CertifiedSparse => false,
        };
        let interior = if dense {
            gauss::solve(a.to_dense_rational(), b.iter().map(|&v| from_int(v)).collect())?
        } else {
            certified::solve_exact(&a, &b)?
        };
        Ok((0..self.space.len())
            .map(|s| match self.position[s] {
                Some(i) => interior[i].clone(),
                None => from_int(boundary(s)),
            })
            .collect())
    }

    /// Expected number of steps to absorption from every state (0 on the
    /// absorbing set), indexed by state.
    pub fn expected_absorption_times(&self, solver: SolverKind) -> Result<Vec<ExactScalar>> {
        self.solve(1, &|_| 0, solver)
    }

    /// Probability of being absorbed inside `hits` (a subset of the absorbing
    /// set), from every state; on the absorbing set itself this is the
    /// indicator of `hits`.
    pub fn absorption_probabilities(&self, hits: &[StateIndex], solver: SolverKind) -> Result<Vec<ExactScalar>> {
        let mut mask = vec![false; self.space.len()];
        for s in hits {
            if !self.absorbing[s.0] {
                return Err(Error::Precondition(format!("state {} is not absorbing", s.0)));
            }
            mask[s.0] = true;
        }
        self.solve(0, &|s| i64::from(mask[s]), solver)
    }

    /// `Σ_y P(x, y) f(y)`: the average of `f` one step after `x`.
    pub fn one_step_average(&self, x: StateIndex, f: &[ExactScalar]) -> ExactScalar {
        let sum: ExactScalar = self.space.neighbors_of(x.0).map(|t| &f[t]).sum();
        sum / from_int(self.space.params().degree())
    }
}

/// Floating-point hitting time with its relative residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproximateSolution {
    pub value: f64,
    pub relative_residual: f64,
}

/// Exact full-graph solves with a state budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    budget: u64,
    solver: SolverKind,
}

impl Default for Oracle {
    fn default() -> Self {
        Self::new(DEFAULT_BUDGET)
    }
}

impl Oracle {
    pub fn new(budget: u64) -> Self {
        Self { budget, solver: SolverKind::Auto }
    }

    pub fn with_solver(self, solver: SolverKind) -> Self {
        Self { solver, ..self }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn space(&self, params: ModelParams) -> Result<StateSpace> {
        StateSpace::new(params, self.budget)
    }

    /// Expected hitting time of `target` from every state.
    pub fn hitting_times_to(&self, params: ModelParams, target: &Configuration) -> Result<Vec<ExactScalar>> {
        target.validate(params)?;
        let space = self.space(params)?;
        let t = space.encode(target);
        AbsorbingSystem::new(space, [t])?.expected_absorption_times(self.solver)
    }

    /// `E(T_target | X_0 = start)` with `T = inf{t ≥ 0 : X_t = target}`;
    /// zero when `start == target`.
    pub fn expected_hitting_time(
        &self,
        params: ModelParams,
        start: &Configuration,
        target: &Configuration,
    ) -> Result<ExactScalar> {
        start.validate(params)?;
        target.validate(params)?;
        params.states_within(self.budget)?;
        if start == target {
            return Ok(zero());
        }
        let times = self.hitting_times_to(params, target)?;
        let space = self.space(params)?;
        Ok(times[space.encode(start).0].clone())
    }

    /// Conjugate-gradient hitting time for spaces beyond the exact budget,
    /// up to [`FLOAT_FALLBACK_LIMIT`] states.
    pub fn approximate_hitting_time(
        &self,
        params: ModelParams,
        start: &Configuration,
        target: &Configuration,
    ) -> Result<ApproximateSolution> {
        start.validate(params)?;
        target.validate(params)?;
        let space = StateSpace::new(params, FLOAT_FALLBACK_LIMIT)?;
        if start == target {
            return Ok(ApproximateSolution { value: 0.0, relative_residual: 0.0 });
        }
        let t = space.encode(target);
        let system = AbsorbingSystem::new(space, [t])?;
        let (a, b) = system.integer_system(1, &|_| 0);
        let rhs: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        let (x, rel) = certified::conjugate_gradient(&a, &rhs, 1e-12, 10 * a.dim() + 100);
        if rel > FLOAT_FALLBACK_TOLERANCE {
            return Err(Error::Certification(format!(
                "floating-point solve reached relative residual {rel:e} > {FLOAT_FALLBACK_TOLERANCE:e}"
            )));
        }
        let start = system.space.encode(start);
        let i = system.position[start.0].expect("start is transient");
        Ok(ApproximateSolution { value: x[i], relative_residual: rel })
    }

    /// Probability that the walk from `(1,…,1)` first meets the fiber
    /// `A = {(2,…,2,x)}` at `(2,…,2)`.
    ///
    /// Entry is counted from time 0: with one ball the fiber is the whole
    /// space, the walk is already in it at `(1)`, and the result is 0. For
    /// `k ≥ 2` the start lies outside the fiber and the convention is moot.
    pub fn first_visit_success_prob(&self, params: ModelParams) -> Result<ExactScalar> {
        let space = self.space(params)?;
        let start = space.encode(&Configuration::all_ones(params));
        let fiber = target_fiber(&space);
        if fiber.contains(&start) {
            return Ok(zero());
        }
        let probs = self.fiber_entry_probabilities(space, &fiber)?;
        Ok(probs[start.0].clone())
    }

    /// `P_x(X_{τ_1} = (2,…,2))` with `τ_1 = inf{t > 0 : X_t ∈ A}` for an
    /// arbitrary start `x`, including starts inside the fiber.
    pub fn fiber_return_success_prob(&self, params: ModelParams, start: &Configuration) -> Result<ExactScalar> {
        start.validate(params)?;
        let space = self.space(params)?;
        let fiber = target_fiber(&space);
        let x = space.encode(start);
        let system = AbsorbingSystem::new(space.clone(), fiber.iter().copied())?;
        let probs = system.absorption_probabilities(&[space.encode(&Configuration::all_target(params))], self.solver)?;
        Ok(if fiber.contains(&x) { system.one_step_average(x, &probs) } else { probs[x.0].clone() })
    }

    fn fiber_entry_probabilities(&self, space: StateSpace, fiber: &[StateIndex]) -> Result<Vec<ExactScalar>> {
        let goal = space.encode(&Configuration::all_target(space.params()));
        AbsorbingSystem::new(space, fiber.iter().copied())?.absorption_probabilities(&[goal], self.solver)
    }

    /// Mean return time to the fiber `A` when started from the uniform
    /// distribution on `A`.
    pub fn mean_return_gap_to_target_fiber(&self, params: ModelParams) -> Result<ExactScalar> {
        let space = self.space(params)?;
        let fiber = target_fiber(&space);
        let system = AbsorbingSystem::new(space, fiber.iter().copied())?;
        let times = system.expected_absorption_times(self.solver)?;
        let total: ExactScalar = fiber.iter().map(|&a| ExactScalar::one() + system.one_step_average(a, &times)).sum();
        Ok(total / from_int(fiber.len() as u64))
    }

    /// Expected time from `(1,…,1)` until the walk first enters the fiber `A`.
    pub fn lemma31_first_segment(&self, params: ModelParams) -> Result<ExactScalar> {
        if params.balls() < 2 {
            return Err(Error::Domain("first segment needs at least 2 balls".into()));
        }
        let space = self.space(params)?;
        let fiber = target_fiber(&space);
        let start = space.encode(&Configuration::all_ones(params));
        let system = AbsorbingSystem::new(space, fiber)?;
        Ok(system.expected_absorption_times(self.solver)?[start.0].clone())
    }
}

/// `A_{(2,…,2)}`: states whose first `k − 1` balls are all in urn 2.
pub fn target_fiber(space: &StateSpace) -> Vec<StateIndex> {
    let params = space.params();
    let k = params.balls() as usize;
    let base = Configuration::all_target(params);
    (1..=params.urns()).map(|u| space.encode(&base.with_ball_in(k - 1, u))).collect()
}

/// Probabilities `p_m = P_{B_m}(T = τ_1)` for the `2k` lumped classes: the
/// chance that the lumped chain, after at least one step, reaches class
/// `B_{2k} = {(2,…,2)}` before `B_{2k−1}`.
///
/// Solves the `2k` equations
/// `p_m = q(m, 2k) + Σ_{m' ∉ {2k−1, 2k}} q(m, m') p_{m'}` exactly, then checks
/// `p_1 = p_{2k}` and `(n−1) p_{2j−1} + p_{2j} = 1` for `j < k`; a failure
/// of either is reported as [`Error::InvariantViolation`].
pub fn lumped_first_visit_probs(params: ModelParams) -> Result<Vec<ExactScalar>> {
    let k = params.balls() as usize;
    if k < 2 {
        return Err(Error::Domain("lumped first-visit system needs at least 2 balls".into()));
    }
    let q = lumped_kernel(params);
    let dim = 2 * k;
    let stopped = |m: usize| m >= dim - 2; // 0-based indices of B_{2k-1}, B_{2k}
    let mut a = vec![vec![zero(); dim]; dim];
    let mut b = vec![zero(); dim];
    for m in 0..dim {
        a[m][m] += ExactScalar::one();
        for (to, prob) in q.support(m) {
            if !stopped(to) {
                a[m][to] -= prob;
            }
        }
        b[m] = q.get(m, dim - 1).clone();
    }
    let probs = gauss::solve(a, b)?;

    if probs[0] != probs[dim - 1] {
        return Err(Error::InvariantViolation(format!(
            "p_1 = {} differs from p_2k = {} for {params}",
            probs[0],
            probs[dim - 1]
        )));
    }
    let n1 = from_int(params.urns() - 1);
    for j in 1..k {
        let value = &n1 * &probs[2 * j - 2] + &probs[2 * j - 1];
        if !value.is_one() {
            return Err(Error::InvariantViolation(format!(
                "(n-1)p_{} + p_{} = {value}, not 1, for {params}",
                2 * j - 1,
                2 * j
            )));
        }
    }
    Ok(probs)
}

/// Deterministic sample of `(start, target)` pairs grouped by Hamming
/// distance: targets in state-index order, and for each target the starts
/// in state-index order, until every distance `1..=M` has `per_distance`
/// pairs or the space is exhausted.
pub fn representative_pairs(space: &StateSpace, per_distance: usize) -> BTreeMap<u32, Vec<(StateIndex, StateIndex)>> {
    let m = space.params().balls();
    let mut out: BTreeMap<u32, Vec<(StateIndex, StateIndex)>> = (1..=m).map(|l| (l, Vec::new())).collect();
    'targets: for target in 0..space.len() {
        let t = space.decode(StateIndex(target));
        for start in 0..space.len() {
            let l = space.decode(StateIndex(start)).hamming(&t) as u32;
            if l == 0 {
                continue;
            }
            let bucket = out.get_mut(&l).expect("distance in range");
            if bucket.len() < per_distance {
                bucket.push((StateIndex(start), StateIndex(target)));
            }
            if out.values().all(|v| v.len() >= per_distance) {
                break 'targets;
            }
        }
    }
    out
}
