#![allow(clippy::needless_range_loop)]

//! Random-instance agreement between the fast paths and the exhaustive
//! oracles. Every run is seeded; failures print the seed context via
//! the iteration index.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drsubmod_core::bruteforce::{
    max_violation_over_permutations, min_over_extreme_points, random_dr_quadratic,
    random_hull_point, random_instance, random_objective, EnumerationBudget, GeneratorConfig,
};
use drsubmod_core::cuts::{chain_tightness, separate, validate_cut_on_extremes};
use drsubmod_core::forest::{check_dr_submodularity, normalize_property1, ValueOracle};
use drsubmod_core::hull::{canonical_point_key, extreme_point, is_feasible, is_member_cz};
use drsubmod_core::linopt::{objective_selecting, solve_forest, verify_certificate};
use drsubmod_core::perm::{
    d_matrix, decompose, enumerate_valid_permutations, is_valid_permutation, t_matrix,
};
use drsubmod_core::set::VertexSet;
use drsubmod_core::{lp, tol};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn combinatorial_solver_agrees_with_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let config = GeneratorConfig::default();
    for round in 0..150 {
        let inst = random_instance(&mut rng, 12, &config);
        let a = random_objective(&inst, &mut rng, true);
        let solve = solve_forest(&inst, &a).expect("solve");
        let oracle = ValueOracle::new(inst.vertex_count(), {
            let a = a.clone();
            move |z| dot(&a[1..], z)
        });
        let (_, best) =
            min_over_extreme_points(&inst, &oracle, &EnumerationBudget::default()).unwrap();
        assert!(
            (best - solve.objective).abs() <= 1e-9,
            "round {round}: enumeration {best} vs solve {}",
            solve.objective
        );
        let (ok, residual) = verify_certificate(
            &inst,
            &a,
            &solve.point,
            &solve.certificate,
            tol::DUALITY_GAP,
        );
        assert!(ok, "round {round}: certificate residual {residual:e}");
    }
}

#[test]
fn combinatorial_solver_agrees_with_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let config = GeneratorConfig::default();
    for round in 0..150 {
        let inst = random_instance(&mut rng, 12, &config);
        let a = random_objective(&inst, &mut rng, true);
        let solve = solve_forest(&inst, &a).expect("solve");
        let (_, lp_obj, lp_cert) = lp::solve_over_cz(&inst, &a).expect("simplex");
        assert!(
            (lp_obj - solve.objective).abs() <= tol::DUALITY_GAP * (1.0 + lp_obj.abs()),
            "round {round}: simplex {lp_obj} vs solve {}",
            solve.objective
        );
        // The simplex duals are a certificate in their own right.
        let (ok, residual) = verify_certificate(&inst, &a, &solve.point, &lp_cert, 1e-7);
        assert!(
            ok,
            "round {round}: simplex certificate residual {residual:e}"
        );
    }
}

#[test]
fn simplex_vertices_are_generated_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let config = GeneratorConfig::default();
    for _ in 0..40 {
        let inst = random_instance(&mut rng, 10, &config);
        let n = inst.vertex_count();
        let mut known = std::collections::HashSet::new();
        for mask in 0u64..(1u64 << n) {
            let p = extreme_point(&inst, &VertexSet::from_mask(n, mask)).unwrap();
            known.insert(canonical_point_key(&p));
        }
        for _ in 0..10 {
            let a = random_objective(&inst, &mut rng, false);
            let (z, _, _) = lp::solve_over_cz(&inst, &a).unwrap();
            assert!(
                known.contains(&canonical_point_key(&z)),
                "basic solution {z:?} is not a generated extreme point"
            );
        }
    }
}

#[test]
fn every_generated_point_is_selectable() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let config = GeneratorConfig::default();
    for _ in 0..60 {
        let inst = random_instance(&mut rng, 10, &config);
        let n = inst.vertex_count();
        let mask = rng.next_u64() & ((1u64 << n) - 1);
        let target = VertexSet::from_mask(n, mask);
        let a = objective_selecting(&inst, &target);
        let solve = solve_forest(&inst, &a).unwrap();
        let want = extreme_point(&inst, &target).unwrap();
        for v in 1..=n {
            assert!(
                (solve.point[v] - want[v]).abs() < 1e-9,
                "target {target:?} produced {:?}",
                solve.point
            );
        }
    }
}

#[test]
fn inversion_identity_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let config = GeneratorConfig::default();
    for _ in 0..60 {
        let inst = random_instance(&mut rng, 8, &config);
        let n = inst.vertex_count();
        for perm in enumerate_valid_permutations(&inst, 8).unwrap().take(20) {
            let t = t_matrix(&inst, &perm).unwrap();
            let d = d_matrix(&inst, &perm).unwrap();
            for row in 0..n {
                for col in 0..n {
                    let td: f64 = (1..=n).map(|v| t[row][v] * d[col][v]).sum();
                    let want = if row == col { 1.0 } else { 0.0 };
                    assert!(
                        (td - want).abs() < 1e-9,
                        "T D mismatch at ({row},{col}): {td}"
                    );
                }
            }
        }
    }
}

#[test]
fn decomposition_reconstructs_random_hull_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let config = GeneratorConfig::default();
    for round in 0..120 {
        let inst = random_instance(&mut rng, 12, &config);
        let z = random_hull_point(&inst, &mut rng, 4);
        let (member, _) = is_member_cz(&inst, &z, tol::MEMBERSHIP);
        assert!(member, "round {round}: convex combination left the hull");
        let dec = decompose(&inst, &z).expect("decompose");
        assert!(dec.weights.iter().all(|&w| w >= 0.0));
        let total: f64 = dec.weights.iter().sum();
        assert!((total - 1.0).abs() <= 1e-9);
        assert!(dec.t.first().map(|&t| t <= 1.0 + 1e-9).unwrap_or(true));
        assert!(dec.t.last().map(|&t| t >= -1e-9).unwrap_or(true));
        assert!(
            dec.t.windows(2).all(|w| w[0] >= w[1] - 1e-9),
            "round {round}: t not monotone"
        );
    }
}

#[test]
fn separation_is_exact_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let config = GeneratorConfig::default();
    let budget = EnumerationBudget::default();
    for round in 0..60 {
        let inst = random_instance(&mut rng, 6, &config);
        let quad = random_dr_quadratic(&inst, &mut rng);
        let oracle = quad.oracle();
        let z = random_hull_point(&inst, &mut rng, 3);
        let w = oracle.value(&z) + rng.gen_range(-5.0..5.0);
        let fast = separate(&inst, &oracle, &z, w).expect("separate");
        let (_, best) =
            max_violation_over_permutations(&inst, &oracle, &z, w, &budget).expect("enumerate");
        let got = fast.violation(&z, w);
        assert!(
            (got - best).abs() <= 1e-9,
            "round {round}: greedy violation {got} vs exhaustive {best}"
        );
    }
}

#[test]
fn cuts_are_valid_and_tight() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let config = GeneratorConfig::default();
    for round in 0..40 {
        let inst = random_instance(&mut rng, 9, &config);
        let quad = random_dr_quadratic(&inst, &mut rng);
        let oracle = quad.oracle();
        let z = random_hull_point(&inst, &mut rng, 3);
        let cut = separate(&inst, &oracle, &z, 0.0).unwrap();
        let validation = validate_cut_on_extremes(&inst, &oracle, &cut, 20).unwrap();
        assert!(
            validation.valid,
            "round {round}: slack {} at {:?}",
            validation.worst_slack, validation.worst_set
        );
        assert!(chain_tightness(&inst, &cut) < 1e-8, "round {round}");
        // At a feasible epigraph point the violation is non-positive.
        let w = oracle.value(&z);
        assert!(cut.violation(&z, w) <= 1e-9);
    }
}

#[test]
fn lifted_oracles_stay_dr_submodular() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for _ in 0..20 {
        // Raw instances that need the single-child insertion.
        let inst = drsubmod_core::forest::build_instance(
            6,
            &[(1, 2), (1, 3), (3, 4), (3, 5), (3, 6)],
            &[0.2, 1.0, 8.0, 8.0, 11.75, 9.0],
            &[2, 3, 4],
        )
        .unwrap();
        let quad = random_dr_quadratic(&inst, &mut rng);
        let oracle = quad.oracle();
        let base = check_dr_submodularity(&inst, &oracle, 100, 1e-7, &mut rng).unwrap();
        assert!(base.passes);
        let ext = normalize_property1(&inst).unwrap();
        let lifted = ext.lift_oracle(&oracle);
        let report = check_dr_submodularity(&ext.instance, &lifted, 100, 1e-7, &mut rng).unwrap();
        assert!(report.passes, "lifted margin {}", report.worst_margin);
    }
}

#[test]
fn candidate_enumeration_matches_definition_filter() {
    // The backtracking enumerator builds permutations through the
    // candidate filter; the definition checks the three conditions on a
    // complete ordering. Both must carve out the same set.
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let config = GeneratorConfig::default();
    for round in 0..30 {
        let inst = random_instance(&mut rng, 6, &config);
        let n = inst.vertex_count();
        let mut via_enumerator: Vec<Vec<usize>> = enumerate_valid_permutations(&inst, 8)
            .unwrap()
            .map(|p| p.order().to_vec())
            .collect();
        via_enumerator.sort();
        let mut via_definition = Vec::new();
        let mut order: Vec<usize> = (1..=n).collect();
        loop {
            let perm = drsubmod_core::perm::Permutation::new(n, order.clone()).unwrap();
            if is_valid_permutation(&inst, &perm).unwrap().is_empty() {
                via_definition.push(order.clone());
            }
            if !next_permutation(&mut order) {
                break;
            }
        }
        via_definition.sort();
        assert_eq!(via_enumerator, via_definition, "round {round}");
    }
}

fn next_permutation(arr: &mut [usize]) -> bool {
    let n = arr.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && arr[i - 1] >= arr[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while arr[j] <= arr[i - 1] {
        j -= 1;
    }
    arr.swap(i - 1, j);
    arr[i..].reverse();
    true
}

#[test]
fn set_function_solver_matches_exhaustive_search() {
    // Coverage-cost functions: pay the weight of everything a pick
    // touches (submodular through the union), earn a per-pick bonus.
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    for round in 0..15 {
        let n = rng.gen_range(4..=9usize);
        let items = 8usize;
        let weights: Vec<f64> = (0..items).map(|_| rng.gen_range(0.0..3.0)).collect();
        let covers: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..items).filter(|_| rng.gen_bool(0.4)).collect())
            .collect();
        let bonuses: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let value_of = {
            let weights = weights.clone();
            let covers = covers.clone();
            let bonuses = bonuses.clone();
            move |s: &VertexSet| -> f64 {
                let mut covered = vec![false; items];
                let mut bonus = 0.0;
                for v in s.iter() {
                    for &j in &covers[v - 1] {
                        covered[j] = true;
                    }
                    bonus += bonuses[v - 1];
                }
                let cost: f64 = covered
                    .iter()
                    .zip(&weights)
                    .filter(|(c, _)| **c)
                    .map(|(_, w)| w)
                    .sum();
                cost - bonus
            }
        };
        let (set, value) =
            drsubmod_core::solver::minimize_unconstrained_submodular(value_of.clone(), n).unwrap();
        let mut best = f64::INFINITY;
        for mask in 0u64..(1u64 << n) {
            let s = VertexSet::from_mask(n, mask);
            best = best.min(value_of(&s));
        }
        assert!(
            (value - best).abs() <= 1e-9,
            "round {round}: solver {value} vs exhaustive {best}"
        );
        assert!((value_of(&set) - value).abs() <= 1e-9);
    }
}

#[test]
fn end_to_end_solver_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let config = GeneratorConfig::default();
    let budget = EnumerationBudget::default();
    for round in 0..40 {
        let inst = random_instance(&mut rng, 9, &config);
        let quad = random_dr_quadratic(&inst, &mut rng);
        let oracle = quad.oracle();
        let report = drsubmod_core::solver::minimize(
            &inst,
            &oracle,
            &drsubmod_core::solver::SolveOptions::default(),
        )
        .expect("minimize");
        let (_, best) = min_over_extreme_points(&inst, &oracle, &budget).unwrap();
        assert!(
            (report.value - best).abs() <= 1e-6,
            "round {round}: solver {} vs enumeration {best}",
            report.value
        );
        assert!(
            is_feasible(&inst, &report.point, tol::MEMBERSHIP),
            "round {round}"
        );
        assert!(report.value <= report.master_bound + 1e-6);
    }
}
