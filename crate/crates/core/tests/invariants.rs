#![allow(clippy::needless_range_loop)]

//! Property tests for the structural invariants, driven by seeded
//! random instances.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drsubmod_core::bruteforce::{random_hull_point, random_instance, GeneratorConfig};
use drsubmod_core::forest::normalize_property1;
use drsubmod_core::hull::{extreme_point, is_feasible, is_member_cz};
use drsubmod_core::perm::{
    d_matrix, enumerate_valid_permutations, prefix_points, t_matrix, t_vector,
};
use drsubmod_core::set::VertexSet;
use drsubmod_core::tol;

fn instance_from_seed(seed: u64, max_vertices: usize) -> drsubmod_core::ForestInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance(&mut rng, max_vertices, &GeneratorConfig::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arcs_order_bounds_and_depths(seed in any::<u64>()) {
        let inst = instance_from_seed(seed, 14);
        for (i, j) in inst.arcs() {
            prop_assert!(inst.bound(i) <= inst.bound(j));
            prop_assert_eq!(inst.depth(j), inst.depth(i) + 1);
        }
        for &root in inst.roots() {
            prop_assert_eq!(inst.depth(root), 0);
        }
    }

    #[test]
    fn single_child_normalization_is_idempotent(seed in any::<u64>()) {
        let inst = instance_from_seed(seed, 14);
        let ext = normalize_property1(&inst).unwrap();
        prop_assert!(ext.is_identity(), "generator output is already normalized");
        let again = normalize_property1(&ext.instance).unwrap();
        prop_assert!(again.is_identity());
    }

    #[test]
    fn lift_then_project_is_identity(seed in any::<u64>()) {
        // Build a raw (non-normalized) instance by hand so the lift is
        // non-trivial, then push random feasible points through it.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = drsubmod_core::forest::build_instance(
            6,
            &[(1, 2), (1, 3), (3, 4), (3, 5), (3, 6)],
            &[0.2, 1.0, 8.0, 8.0, 11.75, 9.0],
            &[2, 3, 4],
        ).unwrap();
        let ext = normalize_property1(&inst).unwrap();
        let z = {
            let mut z = inst.zero_point();
            // Respect monotonicity by cumulative sampling.
            z[1] = rng.gen_range(0.0..=0.2);
            z[2] = rng.gen_range(z[1]..=1.0).ceil();
            z[3] = rng.gen_range(z[2]..=8.0).ceil();
            z[4] = rng.gen_range(z[3]..=8.0).ceil();
            z[5] = rng.gen_range(z[3]..=11.75);
            z[6] = rng.gen_range(z[3]..=9.0);
            z
        };
        let lifted = ext.lift_solution(&z).unwrap();
        prop_assert!(is_feasible(&ext.instance, &lifted, tol::MEMBERSHIP));
        let back = ext.map_solution_back(&lifted).unwrap();
        prop_assert_eq!(back, z);
    }

    #[test]
    fn extreme_points_feasible_and_monotone(seed in any::<u64>(), small in any::<u64>(), extra in any::<u64>()) {
        let inst = instance_from_seed(seed, 10);
        let n = inst.vertex_count();
        let mask_small = small & ((1u64 << n) - 1);
        let mask_large = mask_small | (extra & ((1u64 << n) - 1));
        let s_small = VertexSet::from_mask(n, mask_small);
        let s_large = VertexSet::from_mask(n, mask_large);
        let p_small = extreme_point(&inst, &s_small).unwrap();
        let p_large = extreme_point(&inst, &s_large).unwrap();
        prop_assert!(is_feasible(&inst, &p_small, tol::MEMBERSHIP));
        prop_assert!(is_member_cz(&inst, &p_small, tol::MEMBERSHIP).0);
        for v in 1..=n {
            prop_assert!(p_small[v] <= p_large[v] + 1e-12);
        }
    }

    #[test]
    fn prefix_chains_strictly_increase(seed in any::<u64>()) {
        let inst = instance_from_seed(seed, 8);
        let n = inst.vertex_count();
        for perm in enumerate_valid_permutations(&inst, 8).unwrap().take(30) {
            let points = prefix_points(&inst, &perm);
            for k in 1..=n {
                let mut strictly_up = false;
                for v in 1..=n {
                    let diff = points[k][v] - points[k - 1][v];
                    prop_assert!(diff >= -1e-12, "chain decreased at step {k}");
                    if diff > 1e-12 {
                        strictly_up = true;
                    }
                }
                prop_assert!(strictly_up, "chain stalled at step {k}");
            }
        }
    }

    #[test]
    fn affine_identity_holds_for_arbitrary_vectors(seed in any::<u64>(), scale in 0.1f64..10.0) {
        let inst = instance_from_seed(seed, 8);
        let n = inst.vertex_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
        if let Some(perm) = enumerate_valid_permutations(&inst, 8).unwrap().next() {
            let t_m = t_matrix(&inst, &perm).unwrap();
            let d_m = d_matrix(&inst, &perm).unwrap();
            let mut z = inst.zero_point();
            for v in 1..=n {
                z[v] = rng.gen_range(-1.0..1.0) * scale;
            }
            let t: Vec<f64> = (0..n)
                .map(|k| t_m[k].iter().zip(&z).map(|(c, v)| c * v).sum())
                .collect();
            for v in 1..=n {
                let rebuilt: f64 = (0..n).map(|k| d_m[k][v] * t[k]).sum();
                prop_assert!((rebuilt - z[v]).abs() < 1e-8 * (1.0 + scale));
            }
        }
    }

    #[test]
    fn greedy_t_is_monotone_in_unit_range(seed in any::<u64>()) {
        let inst = instance_from_seed(seed, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let z = random_hull_point(&inst, &mut rng, 4);
        let perm = drsubmod_core::perm::permutation_finder(&inst, &z).unwrap();
        let t = t_vector(&inst, &perm, &z).unwrap();
        prop_assert!(t[0] <= 1.0 + 1e-9);
        prop_assert!(*t.last().unwrap() >= -1e-9);
        for w in t.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-9);
        }
    }
}
