//! The cross-check suite behind `ehrenfest verify`.
//!
//! Every cell `(n, M)` of the grid gets the formula-level checks. Cells whose
//! state space fits the oracle budget also get the full-graph comparisons.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::birth_death::{self, build_occupancy_chain, passage_increments_by_solve};
use crate::formulas::{self, HittingQuery};
use crate::model::{self, build_automorphism, lump_class_of, lumped_kernel, Configuration, ModelParams, StateIndex, StateSpace};
use crate::oracle::{self, Oracle};
use crate::scalar::{from_int, ratio, to_exact_string, ExactScalar};
use crate::Result;

/// Pairs per Hamming distance in the general-configuration check.
pub const PAIRS_PER_DISTANCE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub urns: u32,
    pub balls: u32,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub max_urns: u32,
    pub max_balls: u32,
    pub oracle_budget: u64,
    /// Corrupts one value so the harness can be seen to fail.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { max_urns: 6, max_balls: 8, oracle_budget: oracle::DEFAULT_BUDGET, inject_fault: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn run_suite(options: VerifyOptions) -> Result<VerifyReport> {
    if options.max_urns < 2 || options.max_balls < 1 {
        return Err(crate::Error::InvalidParams("the grid needs max urns >= 2 and max balls >= 1".into()));
    }
    let mut checks = Vec::new();
    for n in 2..=options.max_urns {
        for m in 1..=options.max_balls {
            let params = ModelParams::new(n, m)?;
            checks.extend(check_cell(params, options));
        }
    }
    Ok(VerifyReport { checks })
}

/// All checks for one grid cell.
pub fn check_cell(params: ModelParams, options: VerifyOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut record = |name: &'static str, result: Result<(bool, String)>| {
        let (passed, detail) = result.unwrap_or_else(|e| (false, e.to_string()));
        out.push(CheckOutcome { name, urns: params.urns(), balls: params.balls(), passed, detail });
    };
    let fault = options.inject_fault;

    record("identity", Ok(identity(params, fault)));
    record("recursion", Ok(recursion(params)));
    record("induction", Ok(equal(&formulas::s_by_induction(params), &formulas::s_closed_form(params))));
    record("full_distance", full_distance(params));
    record("monotone_in_distance", monotone(params));
    record("detailed_balance", Ok((build_occupancy_chain(params).satisfies_detailed_balance(), String::new())));
    if params.balls() >= 2 {
        record("lumped_first_visit", lumped_first_visit(params));
        record("escape_ratio", formulas::lemma34_ratio(params).map(|r| (true, to_exact_string(&r.ratio))));
    }
    if params.states_within(birth_death::LUMPING_CHECK_BUDGET).is_ok() {
        record("occupancy_lumping", birth_death::occupancy_lumping_check_default(params).map(|ok| (ok, String::new())));
    }

    if params.states_within(options.oracle_budget).is_err() {
        return out;
    }
    let oracle = Oracle::new(options.oracle_budget);
    let space = match oracle.space(params) {
        Ok(space) => space,
        Err(e) => {
            record("oracle", Err(e));
            return out;
        }
    };
    record("automorphism", automorphism(&space));
    record("lumped_partition", Ok(lumped_partition(&space)));
    record("oracle_closed_form", oracle_closed_form(&oracle, params));
    record("general_pairs", general_pairs(&oracle, &space));
    record("first_visit_triple", first_visit_triple(&oracle, params));
    record("return_gap", return_gap(&oracle, params));
    if params.balls() >= 2 {
        record("first_segment", first_segment(&oracle, params));
    }
    out
}

fn equal(a: &ExactScalar, b: &ExactScalar) -> (bool, String) {
    if a == b {
        (true, to_exact_string(a))
    } else {
        (false, format!("{} != {}", to_exact_string(a), to_exact_string(b)))
    }
}

fn identity(params: ModelParams, fault: bool) -> (bool, String) {
    let mut id = formulas::verify_identity_eq3(params);
    if fault {
        id.lhs += ExactScalar::one();
    }
    equal(&id.lhs, &id.rhs)
}

fn recursion(params: ModelParams) -> (bool, String) {
    let closed = formulas::e_k_all(params);
    let recursive = formulas::e_k_by_recursion(params);
    let solved = passage_increments_by_solve(&build_occupancy_chain(params));
    if closed == recursive && closed == solved {
        (true, format!("{} increments", closed.len()))
    } else {
        (false, "closed form, recursion and first-step solve disagree".into())
    }
}

fn full_distance(params: ModelParams) -> Result<(bool, String)> {
    let general = formulas::general_hitting_time(HittingQuery::new(params, params.balls())?);
    Ok(equal(&general, &formulas::s_closed_form(params)))
}

fn monotone(params: ModelParams) -> Result<(bool, String)> {
    let values = (1..=params.balls())
        .map(|l| HittingQuery::new(params, l).map(formulas::general_hitting_time))
        .collect::<Result<Vec<_>>>()?;
    Ok((values.windows(2).all(|w| w[0] < w[1]), String::new()))
}

fn lumped_first_visit(params: ModelParams) -> Result<(bool, String)> {
    let lumped = oracle::lumped_first_visit_probs(params)?;
    Ok(equal(&lumped[0], &formulas::corollary_first_visit_prob(params)))
}

// f sends (1,…,1) to the target, fixes (2,…,2), is an involution and
// preserves adjacency
fn automorphism(space: &StateSpace) -> Result<(bool, String)> {
    let params = space.params();
    // urns 1 and n alternating; with two urns only (1,…,1) avoids urn 2
    let other = if params.urns() > 2 { params.urns() } else { 1 };
    let target = Configuration::new((0..params.balls()).map(|i| if i % 2 == 0 { 1 } else { other }).collect(), params)?;
    let f = build_automorphism(&target, params)?;
    let twos = Configuration::all_target(params);
    if f.apply(&Configuration::all_ones(params)) != target || f.apply(&twos) != twos {
        return Ok((false, format!("f misplaces (1,…,1) or (2,…,2) for target {target}")));
    }
    let perm = f.as_permutation(space);
    if (0..space.len()).any(|s| perm[perm[s].0].0 != s) {
        return Ok((false, "f is not an involution".into()));
    }
    let mut seen = vec![false; space.len()];
    for s in 0..space.len() {
        let image = perm[s].0;
        if std::mem::replace(&mut seen[image], true) {
            return Ok((false, format!("f is not injective at state {s}")));
        }
        let mut mapped: Vec<usize> = space.neighbors_of(s).map(|t| perm[t].0).collect();
        let mut direct: Vec<usize> = space.neighbors_of(image).collect();
        mapped.sort_unstable();
        direct.sort_unstable();
        if mapped != direct {
            return Ok((false, format!("adjacency not preserved at state {s}")));
        }
    }
    Ok((true, format!("target {target}")))
}

fn lumped_partition(space: &StateSpace) -> (bool, String) {
    let params = space.params();
    let classes: Vec<usize> = (0..space.len())
        .map(|s| lump_class_of(&space.decode(StateIndex(s)), params).expect("decoded states are valid").index())
        .collect();
    match model::lumping_mismatch(space, |s| classes[s], &lumped_kernel(params)) {
        None => (true, String::new()),
        Some(m) => (
            false,
            format!(
                "state {} to class {}: {} != {}",
                m.state.0,
                m.to_class + 1,
                to_exact_string(&m.observed),
                to_exact_string(&m.expected)
            ),
        ),
    }
}

fn oracle_closed_form(oracle: &Oracle, params: ModelParams) -> Result<(bool, String)> {
    let h = oracle.expected_hitting_time(params, &Configuration::all_ones(params), &Configuration::all_target(params))?;
    Ok(equal(&h, &formulas::s_closed_form(params)))
}

/// Checks `PAIRS_PER_DISTANCE` oracle pairs per Hamming distance against the
/// general formula. Pairs sharing a target share one solve.
pub fn general_pairs(oracle: &Oracle, space: &StateSpace) -> Result<(bool, String)> {
    let params = space.params();
    let mut by_target: BTreeMap<usize, Vec<(usize, u32)>> = BTreeMap::new();
    for (l, pairs) in oracle::representative_pairs(space, PAIRS_PER_DISTANCE) {
        for (s, t) in pairs {
            by_target.entry(t.0).or_default().push((s.0, l));
        }
    }
    let mut checked = 0;
    for (target, starts) in by_target {
        let times = oracle.hitting_times_to(params, &space.decode(StateIndex(target)))?;
        for (start, l) in starts {
            let expected = formulas::general_hitting_time(HittingQuery::new(params, l)?);
            if times[start] != expected {
                return Ok((
                    false,
                    format!(
                        "{} -> {} (L={l}): oracle {} != formula {}",
                        space.decode(StateIndex(start)),
                        space.decode(StateIndex(target)),
                        to_exact_string(&times[start]),
                        to_exact_string(&expected)
                    ),
                ));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} pairs")))
}

fn first_visit_triple(oracle: &Oracle, params: ModelParams) -> Result<(bool, String)> {
    let full = oracle.first_visit_success_prob(params)?;
    let closed = formulas::corollary_first_visit_prob(params);
    if params.balls() < 2 {
        return Ok(equal(&full, &closed));
    }
    let lumped = oracle::lumped_first_visit_probs(params)?;
    if full == closed && lumped[0] == closed {
        Ok((true, to_exact_string(&closed)))
    } else {
        Ok((
            false,
            format!(
                "full {} lumped {} closed {}",
                to_exact_string(&full),
                to_exact_string(&lumped[0]),
                to_exact_string(&closed)
            ),
        ))
    }
}

fn return_gap(oracle: &Oracle, params: ModelParams) -> Result<(bool, String)> {
    let gap = oracle.mean_return_gap_to_target_fiber(params)?;
    Ok(equal(&gap, &from_int(BigInt::from(params.urns()).pow(params.balls() - 1))))
}

fn first_segment(oracle: &Oracle, params: ModelParams) -> Result<(bool, String)> {
    let k = params.balls();
    let segment = oracle.lemma31_first_segment(params)?;
    let expected = ratio(k, k - 1) * formulas::s_closed_form(params.with_balls(k - 1)?);
    Ok(equal(&segment, &expected))
}
