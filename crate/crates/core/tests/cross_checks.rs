//! Properties that tie the modules together, on random small instances.

use ehrenfest::birth_death::{build_occupancy_chain, passage_increments_by_solve};
use ehrenfest::formulas::{self, HittingQuery};
use ehrenfest::oracle::{self, Oracle, SolverKind};
use ehrenfest::scalar::{parse_exact, to_exact_string};
use ehrenfest::simulator::{self, SimulationPlan};
use ehrenfest::verify::{self, VerifyOptions};
use ehrenfest::{Configuration, ModelParams};
use proptest::prelude::*;

fn small_model(max_states: u32) -> impl Strategy<Value = ModelParams> {
    (2u32..=5, 1u32..=4)
        .prop_filter("state budget", move |&(n, m)| n.pow(m) <= max_states)
        .prop_map(|(n, m)| ModelParams::new(n, m).unwrap())
}

fn model_and_pair(max_states: u32) -> impl Strategy<Value = (ModelParams, Configuration, Configuration)> {
    small_model(max_states).prop_flat_map(|p| {
        let n = p.urns();
        let m = p.balls() as usize;
        let config = proptest::collection::vec(1..=n, m);
        (Just(p), config.clone(), config)
            .prop_filter("distinct", |(_, a, b)| a != b)
            .prop_map(|(p, a, b)| (p, Configuration::new(a, p).unwrap(), Configuration::new(b, p).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_depends_only_on_hamming_distance((p, start, target) in model_and_pair(256)) {
        let exact = Oracle::default().expected_hitting_time(p, &start, &target).unwrap();
        let formula = formulas::general_hitting_time(HittingQuery::from_pair(p, &start, &target).unwrap());
        prop_assert_eq!(exact, formula);
    }

    #[test]
    fn hitting_time_is_symmetric((p, start, target) in model_and_pair(256)) {
        let oracle = Oracle::default();
        prop_assert_eq!(
            oracle.expected_hitting_time(p, &start, &target).unwrap(),
            oracle.expected_hitting_time(p, &target, &start).unwrap()
        );
    }

    // dense elimination is cubic in the state count, so stay small
    #[test]
    fn solvers_agree_on_random_targets((p, _, target) in model_and_pair(64)) {
        let dense = Oracle::default().with_solver(SolverKind::DenseRational).hitting_times_to(p, &target).unwrap();
        let sparse = Oracle::default().with_solver(SolverKind::CertifiedSparse).hitting_times_to(p, &target).unwrap();
        prop_assert_eq!(dense, sparse);
    }

    #[test]
    fn rendered_values_round_trip(n in 2u32..20, m in 1u32..20) {
        let p = ModelParams::new(n, m).unwrap();
        for value in formulas::e_k_all(p).iter().chain([&formulas::s_closed_form(p)]) {
            prop_assert_eq!(&parse_exact(&to_exact_string(value)).unwrap(), value);
        }
    }

    #[test]
    fn occupancy_solve_matches_closed_form(n in 2u32..30, m in 1u32..30) {
        let p = ModelParams::new(n, m).unwrap();
        prop_assert_eq!(passage_increments_by_solve(&build_occupancy_chain(p)), formulas::e_k_all(p));
    }

    #[test]
    fn lumped_and_closed_first_visit_agree(n in 2u32..12, k in 2u32..12) {
        let p = ModelParams::new(n, k).unwrap();
        prop_assert_eq!(&oracle::lumped_first_visit_probs(p).unwrap()[0], &formulas::corollary_first_visit_prob(p));
    }
}

#[test]
fn simulation_is_reproducible_and_worker_independent() {
    let p = ModelParams::new(4, 4).unwrap();
    let plan = SimulationPlan::for_hamming(p, 2, 3_000, 123).unwrap();
    let reference = simulator::run(&plan).unwrap();
    assert_eq!(simulator::run(&plan).unwrap(), reference);
    assert_eq!(simulator::run(&plan.clone().with_workers(8).unwrap()).unwrap(), reference);
    let other_seed = SimulationPlan { seed: 124, ..plan };
    assert_ne!(simulator::run(&other_seed).unwrap().mean, reference.mean);
}

#[test]
fn default_verify_grid_passes() {
    let report = verify::run_suite(VerifyOptions::default()).unwrap();
    let failures: Vec<_> = report.failures().collect();
    assert!(failures.is_empty(), "{failures:?}");
}
