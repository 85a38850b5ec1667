//! Invariant suites over randomized instances. Generation is seeded, so
//! failures reproduce exactly.

use expost_core::birkhoff::birkhoff_decompose;
use expost_core::expost::{
    is_ex_post_efficient, lp_membership, HullMembershipResult, DEFAULT_ENUMERATION_GUARD,
};
use expost_core::format::{parse_instance, serialize_instance};
use expost_core::gen::{
    random_bistochastic, random_bistochastic_with_terms, random_permutation, random_profile,
    random_profile_with_types, random_support_equal_pair, seeded_rng,
};
use expost_core::instance::{sd_prefers, SdComparison};
use expost_core::pareto::{
    find_trading_cycle, is_pareto_optimal, serial_dictatorship, AgentPermutation,
};
use expost_core::rational::Rational;
use expost_core::robust::{
    compute_agent_types, is_robust_by_types, is_robust_ex_post_efficient, uniform_is_robust,
};
use expost_core::sdeff::{execute_cycle, find_consistent_cycle, is_sd_efficient};
use expost_core::{DeterministicAssignment, RandomAssignment};
use itertools::Itertools;
use num::{BigInt, Zero};
use proptest::prelude::*;

proptest! {
    #[test]
    fn parse_serialize_round_trip(n in 1usize..7, seed in 0u64..1000, with_matrix in any::<bool>()) {
        let mut rng = seeded_rng(seed);
        let profile = random_profile(n, &mut rng);
        let matrix = with_matrix.then(|| random_bistochastic(n, &mut rng));
        let text = serialize_instance(&profile, matrix.as_ref());
        let (profile2, matrix2) = parse_instance(&text).unwrap();
        prop_assert_eq!(profile, profile2);
        prop_assert_eq!(matrix, matrix2);
    }

    #[test]
    fn sd_relation_is_reflexive_and_antisymmetric(
        n in 2usize..6,
        seed in 0u64..500,
        weights_a in proptest::collection::vec(1u64..9, 2..6),
        weights_b in proptest::collection::vec(1u64..9, 2..6),
    ) {
        let mut rng = seeded_rng(seed);
        let profile = random_profile(n, &mut rng);
        let a = random_allocation_row(n, &weights_a);
        let b = random_allocation_row(n, &weights_b);
        prop_assert_eq!(sd_prefers(&profile, 0, &a, &a).unwrap(), SdComparison::Equal);
        let ab = sd_prefers(&profile, 0, &a, &b).unwrap();
        let ba = sd_prefers(&profile, 0, &b, &a).unwrap();
        if ab == SdComparison::StrictlyPrefers {
            prop_assert_ne!(ba, SdComparison::StrictlyPrefers);
        }
    }
}

/// Exact probability row: weights spread over the first `w.len()` cells
/// (wrapping), normalized to total 1.
fn random_allocation_row(n: usize, weights: &[u64]) -> Vec<Rational> {
    let total: u64 = weights.iter().sum();
    let mut row = vec![Rational::zero(); n];
    for (i, &w) in weights.iter().enumerate() {
        row[i % n] += Rational::new(BigInt::from(w), BigInt::from(total));
    }
    row
}

#[test]
fn serial_dictatorship_outcomes_are_cycle_free_on_random_profiles() {
    let mut rng = seeded_rng(101);
    for _ in 0..30 {
        for n in 2..=6 {
            let profile = random_profile(n, &mut rng);
            for order in (0..n).permutations(n).take(24) {
                let d = serial_dictatorship(&profile, &AgentPermutation::new(order).unwrap());
                assert!(find_trading_cycle(&profile, &d).is_none());
            }
        }
    }
}

#[test]
fn fact1_serial_dictatorship_reaches_exactly_the_cycle_free_assignments() {
    let mut rng = seeded_rng(202);
    for _ in 0..20 {
        for n in 2..=4 {
            let profile = random_profile(n, &mut rng);
            let mut sd_outcomes: Vec<DeterministicAssignment> = (0..n)
                .permutations(n)
                .map(|order| {
                    serial_dictatorship(&profile, &AgentPermutation::new(order).unwrap())
                })
                .collect();
            sd_outcomes.sort();
            sd_outcomes.dedup();
            let mut cycle_free: Vec<DeterministicAssignment> = (0..n)
                .permutations(n)
                .map(|objs| DeterministicAssignment::new(objs).unwrap())
                .filter(|d| find_trading_cycle(&profile, d).is_none())
                .collect();
            cycle_free.sort();
            assert_eq!(sd_outcomes, cycle_free);
        }
    }
}

#[test]
fn birkhoff_reconstructs_random_matrices() {
    let mut rng = seeded_rng(303);
    for round in 0..60 {
        let n = 1 + round % 8;
        let p = random_bistochastic(n, &mut rng);
        let dec = birkhoff_decompose(&p);
        dec.verify_against(&p).unwrap();
        assert!(dec.len() <= n * n - n + 1);
    }
}

#[test]
fn sd_efficient_matrices_decompose_into_pareto_optimal_terms() {
    let mut rng = seeded_rng(404);
    let mut seen_efficient = 0;
    for _ in 0..200 {
        let n = 2 + rng.gen_range(0..4usize);
        let profile = random_profile(n, &mut rng);
        let p = random_bistochastic(n, &mut rng);
        if !is_sd_efficient(&profile, &p) {
            continue;
        }
        seen_efficient += 1;
        for (_, d) in birkhoff_decompose(&p).terms() {
            assert!(is_pareto_optimal(&profile, d));
        }
    }
    assert!(seen_efficient > 0, "corpus never produced an SD-efficient matrix");
}

use rand::Rng;

#[test]
fn executing_a_consistent_cycle_improves_every_agent_weakly() {
    let mut rng = seeded_rng(505);
    let mut seen_cycles = 0;
    for _ in 0..120 {
        let n = 2 + rng.gen_range(0..4usize);
        let profile = random_profile(n, &mut rng);
        let p = random_bistochastic(n, &mut rng);
        let Some(cycle) = find_consistent_cycle(&profile, &p) else {
            continue;
        };
        seen_cycles += 1;
        cycle.validate(&profile, &p).unwrap();
        let q = execute_cycle(&p, &cycle);
        let cycle_agents: Vec<usize> = cycle.agents().collect();
        for agent in 0..n {
            let cmp = sd_prefers(&profile, agent, q.row(agent), p.row(agent)).unwrap();
            assert!(cmp.weakly_dominates());
            if cycle_agents.contains(&agent) {
                assert_eq!(cmp, SdComparison::StrictlyPrefers);
            }
        }
    }
    assert!(seen_cycles > 10, "corpus never produced inefficient matrices");
}

#[test]
fn sd_efficiency_and_robustness_are_combinatorial() {
    let mut rng = seeded_rng(606);
    for _ in 0..60 {
        let n = 2 + rng.gen_range(0..4usize);
        let profile = random_profile(n, &mut rng);
        let (p, q) = random_support_equal_pair(n, &mut rng);
        assert_eq!(is_sd_efficient(&profile, &p), is_sd_efficient(&profile, &q));
        let (rp, _) = is_robust_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        let (rq, _) = is_robust_ex_post_efficient(&profile, &q, DEFAULT_ENUMERATION_GUARD).unwrap();
        assert_eq!(rp, rq);
    }
}

#[test]
fn efficiency_chain_never_breaks() {
    let mut rng = seeded_rng(707);
    for round in 0..80 {
        let n = 2 + round % 4;
        let profile = random_profile(n, &mut rng);
        let p = match round % 3 {
            0 => random_bistochastic(n, &mut rng),
            1 => expost_core::pareto::rsd_assignment(&profile).unwrap(),
            _ => RandomAssignment::from_deterministic(&random_permutation(n, &mut rng)),
        };
        let sd = is_sd_efficient(&profile, &p);
        let (robust, _) =
            is_robust_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        let member = is_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD)
            .unwrap()
            .is_member();
        if sd {
            assert!(robust, "SD-efficient but not robust");
        }
        if robust {
            assert!(member, "robust but not ex post efficient");
        }
    }
}

#[test]
fn type_bounded_robustness_matches_exhaustive_oracle() {
    let mut rng = seeded_rng(808);
    for round in 0..60 {
        let n = 3 + round % 4;
        let k = 1 + round % 3;
        let profile = random_profile_with_types(n, k, &mut rng);
        let p = random_bistochastic(n, &mut rng);
        let (exhaustive, _) =
            is_robust_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        let (by_types, cycle) = is_robust_by_types(&profile, &p);
        assert_eq!(exhaustive, by_types);
        if let Some(cycle) = cycle {
            cycle.validate(&profile, &p).unwrap();
        }
    }
}

#[test]
fn duplicate_type_cycles_are_still_caught_by_type_bounded_search() {
    // Lemma: a consistent cycle with repeated types implies one with at
    // most one agent per type, so the restricted search cannot miss.
    let mut rng = seeded_rng(909);
    let mut seen = 0;
    for _ in 0..80 {
        let n = 4 + rng.gen_range(0..3usize);
        let k = 1 + rng.gen_range(0..2usize);
        let profile = random_profile_with_types(n, k, &mut rng);
        let p = random_bistochastic(n, &mut rng);
        let (robust, witness) =
            is_robust_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        if robust {
            continue;
        }
        let witness = witness.unwrap();
        let types = compute_agent_types(&profile);
        let cycle = find_trading_cycle(&profile, &witness).unwrap();
        let type_ids: Vec<usize> = cycle.agents().map(|a| types.type_of(a)).collect();
        let has_duplicate = type_ids.iter().duplicates().next().is_some();
        if has_duplicate {
            seen += 1;
            let (by_types, _) = is_robust_by_types(&profile, &p);
            assert!(!by_types, "restricted search missed a duplicate-type cycle");
        }
    }
    assert!(seen > 0, "corpus never produced duplicate-type cycles");
}

#[test]
fn uniform_robustness_shortcut_matches_exhaustive_check() {
    let mut rng = seeded_rng(1010);
    for _ in 0..40 {
        let n = 2 + rng.gen_range(0..4usize);
        let profile = random_profile(n, &mut rng);
        let uniform = expost_core::pareto::uniform_assignment(n);
        let (exhaustive, _) =
            is_robust_ex_post_efficient(&profile, &uniform, DEFAULT_ENUMERATION_GUARD).unwrap();
        assert_eq!(uniform_is_robust(&profile), exhaustive);
    }
}

#[test]
fn membership_is_complete_for_pareto_optimal_mixtures() {
    let mut rng = seeded_rng(1111);
    for _ in 0..40 {
        let n = 2 + rng.gen_range(0..4usize);
        let profile = random_profile(n, &mut rng);
        // convex combination of serial dictatorship outcomes: ex post
        // efficient by construction
        let terms = 2 + rng.gen_range(0..3usize);
        let perms: Vec<DeterministicAssignment> = (0..terms)
            .map(|_| {
                let mut order: Vec<usize> = (0..n).collect();
                use rand::seq::SliceRandom;
                order.shuffle(&mut rng);
                serial_dictatorship(&profile, &AgentPermutation::new(order).unwrap())
            })
            .collect();
        let weights: Vec<u64> = (0..terms).map(|_| rng.gen_range(1..=9)).collect();
        let total: u64 = weights.iter().sum();
        let mut rows = vec![vec![Rational::zero(); n]; n];
        for (d, &w) in perms.iter().zip(&weights) {
            let coeff = Rational::new(BigInt::from(w), BigInt::from(total));
            for (i, o) in d.pairs() {
                rows[i][o] += &coeff;
            }
        }
        let p = RandomAssignment::new(rows).unwrap();
        let result = is_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        let dec = result.decomposition().expect("mixture of PO terms is a member");
        dec.verify_against(&p).unwrap();
        for (_, d) in dec.terms() {
            assert!(is_pareto_optimal(&profile, d));
        }
        assert!(dec.len() <= n * n - 2 * n + 2);
    }
}

#[test]
fn infeasible_membership_is_generator_order_invariant() {
    let mut rng = seeded_rng(1212);
    let mut seen_infeasible = 0;
    for _ in 0..60 {
        let n = 3 + rng.gen_range(0..3usize);
        let profile = random_profile(n, &mut rng);
        let p = random_bistochastic_with_terms(n, 3, &mut rng);
        let result = is_ex_post_efficient(&profile, &p, DEFAULT_ENUMERATION_GUARD).unwrap();
        if let HullMembershipResult::NotMember { .. } = result {
            seen_infeasible += 1;
            let mask = expost_core::support(&p);
            let mut generators: Vec<DeterministicAssignment> =
                expost_core::expost::enumerate_consistent_assignments(
                    &mask,
                    DEFAULT_ENUMERATION_GUARD,
                )
                .unwrap()
                .into_iter()
                .filter(|d| is_pareto_optimal(&profile, d))
                .collect();
            if generators.is_empty() {
                continue;
            }
            let flat: Vec<Rational> = p.rows().iter().flatten().cloned().collect();
            assert!(lp_membership(&flat, &generators).is_none());
            generators.reverse();
            assert!(lp_membership(&flat, &generators).is_none());
        }
    }
    assert!(seen_infeasible > 0, "corpus never produced non-members");
}
