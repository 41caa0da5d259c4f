#![allow(clippy::needless_range_loop)]

//! Heavier seed sweeps of the oracle cross-checks, ignored in routine
//! runs. Execute with `cargo test --test stress -- --ignored`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drsubmod_core::bruteforce::{
    max_violation_over_permutations, min_over_extreme_points, random_dr_quadratic,
    random_hull_point, random_instance, random_objective, EnumerationBudget, GeneratorConfig,
};
use drsubmod_core::cuts::separate;
use drsubmod_core::hull::is_feasible;
use drsubmod_core::linopt::{solve_forest, verify_certificate};
use drsubmod_core::lp::solve_over_cz;
use drsubmod_core::solver::{minimize, SolveOptions};
use drsubmod_core::tol;

#[test]
#[ignore = "heavy seed sweep"]
fn separation_exactness_wide() {
    let config = GeneratorConfig::default();
    let budget = EnumerationBudget::default();
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15));
        for round in 0..25 {
            let inst = random_instance(&mut rng, 7, &config);
            let oracle = random_dr_quadratic(&inst, &mut rng).oracle();
            let z = random_hull_point(&inst, &mut rng, 4);
            let w = oracle.value(&z) + rng.gen_range(-8.0..8.0);
            let fast = separate(&inst, &oracle, &z, w).unwrap();
            let (_, best) =
                max_violation_over_permutations(&inst, &oracle, &z, w, &budget).unwrap();
            assert!(
                (fast.violation(&z, w) - best).abs() <= 1e-9,
                "seed {seed}, round {round}"
            );
        }
    }
}

#[test]
#[ignore = "heavy seed sweep"]
fn duality_and_end_to_end_wide() {
    let config = GeneratorConfig::default();
    let budget = EnumerationBudget::default();
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0xd1b54a32d192ed03));
        for round in 0..25 {
            let inst = random_instance(&mut rng, 11, &config);
            let a = random_objective(&inst, &mut rng, true);
            let solve = solve_forest(&inst, &a).unwrap();
            let (_, lp_obj, _) = solve_over_cz(&inst, &a).unwrap();
            assert!(
                (lp_obj - solve.objective).abs() <= 1e-8 * (1.0 + lp_obj.abs()),
                "seed {seed}, round {round}"
            );
            let (ok, residual) = verify_certificate(
                &inst,
                &a,
                &solve.point,
                &solve.certificate,
                tol::DUALITY_GAP,
            );
            assert!(ok, "seed {seed}, round {round}: residual {residual:e}");

            let oracle = random_dr_quadratic(&inst, &mut rng).oracle();
            let report = minimize(&inst, &oracle, &SolveOptions::default()).unwrap();
            let (_, best) = min_over_extreme_points(&inst, &oracle, &budget).unwrap();
            assert!(
                (report.value - best).abs() <= 1e-6,
                "seed {seed}, round {round}: {} vs {best}",
                report.value
            );
            assert!(is_feasible(&inst, &report.point, 0.0));
        }
    }
}
