//! Acceptance criteria, one line each. Run with
//! `cargo test -p ehrenfest --test acceptance`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ehrenfest::birth_death::{self, build_occupancy_chain, passage_increments_by_solve};
use ehrenfest::formulas::{self, HittingQuery};
use ehrenfest::oracle::{self, Oracle};
use ehrenfest::scalar::{from_int, ratio, to_exact_string, to_f64};
use ehrenfest::simulator::{self, SimulationPlan};
use ehrenfest::{Configuration, ExactScalar, ModelParams, StateIndex};
use num_bigint::BigInt;
use num_traits::One;

type Outcome = Result<String, String>;

fn params(n: u32, m: u32) -> ModelParams {
    ModelParams::new(n, m).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `(n, M)` with `n ≥ 2`, `M ≥ min_balls` and `n^M ≤ limit`.
fn cells(limit: u64, min_balls: u32) -> Vec<ModelParams> {
    let mut out = Vec::new();
    for n in 2..=limit as u32 {
        for m in min_balls.. {
            if (n as u64).checked_pow(m).is_none_or(|s| s > limit) {
                break;
            }
            out.push(params(n, m));
        }
    }
    out
}

fn four_routes(n: u32, m: u32, expected: i64) -> Outcome {
    let p = params(n, m);
    let expected = from_int(expected);
    let closed = formulas::s_closed_form(p);
    let induction = formulas::s_by_induction(p);
    let increments = formulas::e_k_all(p);
    let sum: ExactScalar = increments.iter().sum();
    let oracle = Oracle::default()
        .expected_hitting_time(p, &Configuration::all_ones(p), &Configuration::all_target(p))
        .map_err(|e| e.to_string())?;
    for (route, value) in [("closed form", &closed), ("induction", &induction), ("sum of e_k", &sum), ("oracle", &oracle)] {
        ensure(*value == expected, || format!("{route} gave {}", to_exact_string(value)))?;
    }
    let terms: Vec<String> = increments.iter().map(to_exact_string).collect();
    Ok(format!("{} = {} by all four routes", terms.join("+"), to_exact_string(&expected)))
}

fn criterion_3() -> Outcome {
    for m in 1..=10u32 {
        let p = params(3, m);
        // (2M/3) Σ 3^k/k, written out independently of the library
        let direct: ExactScalar =
            ratio(2 * m, 3) * (1..=m).map(|k| ratio(BigInt::from(3).pow(k), k)).sum::<ExactScalar>();
        ensure(formulas::s_closed_form(p) == direct, || format!("M={m}: closed form differs"))?;
        ensure(formulas::s_by_induction(p) == direct, || format!("M={m}: induction differs"))?;
    }
    Ok("M = 1..10".into())
}

fn criterion_4() -> Outcome {
    let mut count = 0;
    for n in 2..=8 {
        for m in 1..=12 {
            let id = formulas::verify_identity_eq3(params(n, m));
            ensure(id.holds(), || format!("n={n} M={m}: {} != {}", id.lhs, id.rhs))?;
            count += 1;
        }
    }
    let witness = formulas::verify_identity_eq3(params(5, 3));
    ensure(witness.holds() && !witness.termwise_equal(), || "no termwise witness at (5,3)".into())?;
    Ok(format!(
        "{count} cells; at (5,3) e_0 = {} but the first right-hand term is {}",
        to_exact_string(&witness.lhs_terms[0]),
        to_exact_string(&witness.rhs_terms[0])
    ))
}

/// Ordered pairs at Hamming distance `L`: `n^M · C(M, L) · (n−1)^L`.
fn pairs_available(p: ModelParams, l: u32) -> u64 {
    let n = p.urns() as u64;
    let c = formulas::binomial(p.balls() as u64, l as u64).unwrap();
    let total = BigInt::from(n.pow(p.balls())) * BigInt::from(c) * BigInt::from(n - 1).pow(l);
    u64::try_from(total).unwrap_or(u64::MAX)
}

fn criterion_5() -> Outcome {
    let oracle = Oracle::new(1024);
    let (mut pairs, mut grid) = (0, 0);
    for p in cells(1024, 1) {
        let space = oracle.space(p).map_err(|e| e.to_string())?;
        let sample = oracle::representative_pairs(&space, 3);
        let mut by_target: BTreeMap<usize, Vec<(usize, u32)>> = BTreeMap::new();
        for (&l, list) in &sample {
            let needed = 3.min(pairs_available(p, l)) as usize;
            ensure(list.len() >= needed, || format!("{p}: only {} pairs at L={l}", list.len()))?;
            for (s, t) in list {
                by_target.entry(t.0).or_default().push((s.0, l));
            }
        }
        for (target, starts) in by_target {
            let times = oracle.hitting_times_to(p, &space.decode(StateIndex(target))).map_err(|e| e.to_string())?;
            for (start, l) in starts {
                let formula = formulas::general_hitting_time(HittingQuery::new(p, l).unwrap());
                ensure(times[start] == formula, || {
                    format!("{p} L={l}: oracle {} formula {}", to_exact_string(&times[start]), to_exact_string(&formula))
                })?;
                pairs += 1;
            }
        }
        grid += 1;
    }
    Ok(format!("{grid} cells with n^M <= 1024, {pairs} pairs"))
}

fn criterion_6() -> Outcome {
    let oracle = Oracle::new(1024);
    let grid = cells(1024, 2);
    for &p in &grid {
        let closed = formulas::corollary_first_visit_prob(p);
        let lumped = oracle::lumped_first_visit_probs(p).map_err(|e| e.to_string())?;
        let full = oracle.first_visit_success_prob(p).map_err(|e| e.to_string())?;
        ensure(lumped[0] == closed && full == closed, || {
            format!("{p}: closed {closed} lumped {} full {full}", lumped[0])
        })?;
    }
    Ok(format!("{} cells with k >= 2, n^k <= 1024", grid.len()))
}

fn criterion_7() -> Outcome {
    let oracle = Oracle::new(1024);
    let grid = cells(1024, 2);
    for &p in &grid {
        let (n, k) = (p.urns(), p.balls());
        let err = |e: ehrenfest::Error| format!("{p}: {e}");

        let segment = oracle.lemma31_first_segment(p).map_err(err)?;
        let expected = ratio(k, k - 1) * formulas::s_closed_form(p.with_balls(k - 1).unwrap());
        ensure(segment == expected, || format!("{p}: first segment {segment} != {expected}"))?;

        let gap = oracle.mean_return_gap_to_target_fiber(p).map_err(err)?;
        ensure(gap == from_int(BigInt::from(n).pow(k - 1)), || format!("{p}: return gap {gap}"))?;

        let lumped = formulas::lemma34_ratio(p).map_err(err)?;
        ensure(lumped.ratio == from_int(n - 1), || format!("{p}: lumped ratio {}", lumped.ratio))?;

        // the same ratio from two full-graph solves
        let p_escape = ExactScalar::one() - oracle.first_visit_success_prob(p).map_err(err)?;
        let off_target = Configuration::all_target(p).with_ball_in(k as usize - 1, 1);
        let one_minus_q = oracle.fiber_return_success_prob(p, &off_target).map_err(err)?;
        ensure(p_escape == lumped.p_escape && one_minus_q == ExactScalar::one() - &lumped.q_escape, || {
            format!("{p}: full-graph p = {p_escape}, 1-q = {one_minus_q}")
        })?;
    }
    Ok(format!("{} cells: first segment, return gap n^(k-1), p/(1-q) = n-1", grid.len()))
}

fn criterion_8() -> Outcome {
    let mut lines = Vec::new();
    for (n, m, seed) in [(5, 3, 42u64), (4, 4, 7)] {
        let p = params(n, m);
        let exact = to_f64(&formulas::s_closed_form(p));
        let plan = SimulationPlan::new(p, Configuration::all_ones(p), Configuration::all_target(p), 100_000, seed)
            .map_err(|e| e.to_string())?;
        let single = simulator::run(&plan).map_err(|e| e.to_string())?;
        let parallel = simulator::run(&plan.clone().with_workers(8).unwrap()).map_err(|e| e.to_string())?;
        let z = single.standardized_error(exact);
        ensure(single == parallel, || format!("{p}: 1 vs 8 workers differ"))?;
        ensure(single.truncated_count == 0, || format!("{p}: {} truncated", single.truncated_count))?;
        ensure(z.abs() < 4.0, || format!("{p}: z = {z:.2}"))?;
        lines.push(format!("{p}: mean {:.2} vs {exact}, z = {z:+.2}", single.mean));
    }
    Ok(lines.join("; "))
}

fn criterion_9() -> Outcome {
    let mut count = 0;
    for n in 2..=8 {
        for m in 1..=12 {
            let p = params(n, m);
            if p.states_within(10_000).is_err() {
                continue;
            }
            let ok = birth_death::occupancy_lumping_check(p, 10_000).map_err(|e| e.to_string())?;
            ensure(ok, || format!("{p}: aggregation does not reproduce the occupancy kernel"))?;
            let chain = build_occupancy_chain(p);
            ensure(passage_increments_by_solve(&chain) == formulas::e_k_all(p), || format!("{p}: increments"))?;
            count += 1;
        }
    }
    Ok(format!("{count} cells of the 2<=n<=8, 1<=M<=12 grid with n^M <= 10^4"))
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        (1, "s(5,3) = 142 four ways", 1, || four_routes(5, 3, 142)),
        (2, "s(4,4) = 292 four ways", 1, || four_routes(4, 4, 292)),
        (3, "three urns, M = 1..10", 1, criterion_3),
        (4, "sum identity sweep", 5, criterion_4),
        (5, "general pairs vs oracle", 60, criterion_5),
        (6, "first-visit probability, three routes", 30, criterion_6),
        (7, "first segment, return gap, escape ratio", 30, criterion_7),
        (8, "Monte Carlo consistency", 60, criterion_8),
        (9, "occupancy lumping", 30, criterion_9),
    ];
    let mut all = true;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let passed = outcome.is_ok() && in_time;
        all &= passed;
        let detail = match outcome {
            Ok(d) => d,
            Err(e) => e,
        };
        println!(
            "criterion {id} [{}] {name}: {detail} ({:.3} s, limit {limit} s{})",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
