//! Epigraph inequalities `w >= pi^T z` built from valid permutations,
//! and their exact separation.
//!
//! For a valid permutation the coefficient vector is `pi = T^T d`, where
//! `d_k` is the objective increment between consecutive chain points.
//! Separation is a single greedy permutation construction: the cut it
//! yields is the most violated one over all valid permutations.

use crate::error::{Error, Result};
use crate::forest::{ForestInstance, ValueOracle};
use crate::hull::extreme_point;
use crate::perm::{
    permutation_finder, permutation_finder_unchecked, prefix_points, t_matrix, Permutation,
};
use crate::set::VertexSet;
use crate::{tol, Point, Vertex};

/// An epigraph row `w >= pi^T z`, kept with its generating permutation
/// for audit.
#[derive(Clone, Debug)]
pub struct DrCut {
    pub permutation: Permutation,
    /// Coefficients indexed by vertex, entry 0 unused.
    pub pi: Vec<f64>,
    /// Objective values along the chain, `f(P(delta, k))` for
    /// `k = 0 ..= n` (entry 0 is always zero for a normalized oracle).
    pub chain_values: Vec<f64>,
}

impl DrCut {
    /// `pi^T z`.
    pub fn rhs_at(&self, z: &Point) -> f64 {
        self.pi.iter().zip(z).map(|(c, v)| c * v).sum()
    }

    /// Positive when `(z, w)` violates the cut.
    pub fn violation(&self, z: &Point, w: f64) -> f64 {
        self.rhs_at(z) - w
    }

    /// Coefficient-wise duplicate test for pool management.
    pub fn same_coefficients(&self, other: &DrCut, tolerance: f64) -> bool {
        self.pi.len() == other.pi.len()
            && self
                .pi
                .iter()
                .zip(&other.pi)
                .all(|(a, b)| (a - b).abs() <= tolerance)
    }
}

/// Build the cut of a valid permutation: `n + 1` oracle evaluations at
/// the chain points, then one pass through the inversion matrix.
pub fn dr_cut(inst: &ForestInstance, oracle: &ValueOracle, perm: &Permutation) -> Result<DrCut> {
    let n = inst.vertex_count();
    let matrix = t_matrix(inst, perm)?; // also validates the permutation
    let points = prefix_points(inst, perm);
    let mut chain_values = Vec::with_capacity(n + 1);
    for p in &points {
        let v = oracle.value(p);
        if !v.is_finite() {
            return Err(Error::OracleEvaluationFailure(
                "non-finite chain value".into(),
            ));
        }
        chain_values.push(v);
    }
    let mut pi = vec![0.0; n + 1];
    for k in 0..n {
        let d_k = chain_values[k + 1] - chain_values[k];
        if d_k == 0.0 {
            continue;
        }
        for v in 1..=n {
            pi[v] += d_k * matrix[k][v];
        }
    }
    Ok(DrCut {
        permutation: perm.clone(),
        pi,
        chain_values,
    })
}

/// The most violated cut at `(z, w)`: the greedy permutation's cut.
/// A non-positive violation certifies `(z, w)` as hull-feasible.
pub fn separate(inst: &ForestInstance, oracle: &ValueOracle, z: &Point, _w: f64) -> Result<DrCut> {
    let perm = permutation_finder(inst, z)?;
    dr_cut(inst, oracle, &perm)
}

/// [`separate`] without the hull membership pre-check.
pub fn separate_unchecked(inst: &ForestInstance, oracle: &ValueOracle, z: &Point) -> Result<DrCut> {
    let perm = permutation_finder_unchecked(inst, z)?;
    dr_cut(inst, oracle, &perm)
}

/// Exhaustively verify a cut against every extreme point: valid cuts
/// satisfy `f(P(S)) >= pi^T P(S)` for all `S`. Returns the worst slack
/// and the subset attaining it.
pub fn validate_cut_on_extremes(
    inst: &ForestInstance,
    oracle: &ValueOracle,
    cut: &DrCut,
    max_vertices: usize,
) -> Result<CutValidation> {
    let n = inst.vertex_count();
    if n > max_vertices || n > 63 {
        return Err(Error::TooLarge {
            size: n,
            limit: max_vertices,
        });
    }
    let mut worst_slack = f64::INFINITY;
    let mut worst_set = VertexSet::empty(n);
    for mask in 0u64..(1u64 << n) {
        let s = VertexSet::from_mask(n, mask);
        let p = extreme_point(inst, &s)?;
        let slack = oracle.value(&p) - cut.rhs_at(&p);
        if slack < worst_slack {
            worst_slack = slack;
            worst_set = s;
        }
    }
    Ok(CutValidation {
        valid: worst_slack >= -tol::MEMBERSHIP,
        worst_slack,
        worst_set,
    })
}

#[derive(Clone, Debug)]
pub struct CutValidation {
    pub valid: bool,
    pub worst_slack: f64,
    pub worst_set: VertexSet,
}

/// Tightness of a cut along its own chain: `pi^T P(delta, j)` must
/// reproduce `f(P(delta, j))` at every prefix. Returns the worst gap.
pub fn chain_tightness(inst: &ForestInstance, cut: &DrCut) -> f64 {
    let points = prefix_points(inst, &cut.permutation);
    points
        .iter()
        .zip(&cut.chain_values)
        .map(|(p, &fp)| (cut.rhs_at(p) - fp).abs())
        .fold(0.0, f64::max)
}

/// Greedy order specialization on all-binary boxes: separation must
/// rank coordinates by decreasing value (ties to the smaller vertex).
pub fn descending_order(inst: &ForestInstance, z: &Point) -> Vec<Vertex> {
    let mut order: Vec<Vertex> = (1..=inst.vertex_count()).collect();
    order.sort_by(|&a, &b| z[b].partial_cmp(&z[a]).unwrap().then_with(|| a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::build_instance;

    fn fig5() -> ForestInstance {
        build_instance(
            12,
            &[(1, 2), (2, 3), (3, 4), (7, 12), (8, 9), (9, 10), (10, 11)],
            &[
                0.1, 1.0, 8.0, 8.0, 11.75, 9.0, 12.0, 10.0, 10.5, 11.0, 11.0, 19.9,
            ],
            &[2, 3, 4, 10, 11],
        )
        .unwrap()
    }

    fn fig5_delta() -> Permutation {
        Permutation::new(12, vec![6, 4, 7, 5, 2, 3, 9, 1, 11, 8, 10, 12]).unwrap()
    }

    #[test]
    fn cut_matches_symbolic_shape() {
        let inst = fig5();
        let oracle = ValueOracle::new(12, |z| -z.iter().sum::<f64>());
        let perm = fig5_delta();
        let cut = dr_cut(&inst, &oracle, &perm).unwrap();
        // The coefficient vector is sum_k d_k row_k with the closed
        // forms of the twelve rows; spot-check against a hand expansion
        // at a few vertices. d_k = f(P(k)) - f(P(k-1)).
        let points = prefix_points(&inst, &perm);
        let d: Vec<f64> = (1..=12)
            .map(|k| oracle.value(&points[k]) - oracle.value(&points[k - 1]))
            .collect();
        // Vertex 6 appears only in row 1 as z6/9.
        assert!((cut.pi[6] - d[0] / 9.0).abs() < 1e-12);
        // Vertex 4 appears only in row 2 as z4/8.
        assert!((cut.pi[4] - d[1] / 8.0).abs() < 1e-12);
        // Vertex 1 appears only in row 8 as 10 z1.
        assert!((cut.pi[1] - 10.0 * d[7]).abs() < 1e-12);
        // Vertex 12 appears only in row 12 as (z12 - z7)/7.9.
        assert!((cut.pi[12] - d[11] / 7.9).abs() < 1e-12);
        // Vertex 9 collects rows 7, 9, 11: d7/5 - 2 d9 - 2 d11 with
        // eta9 = 2 z9 - z10 and t7 = eta9/10.
        let want9 = d[6] * (2.0 / 10.0) + d[8] * (-2.0) + d[10] * (-2.0);
        assert!((cut.pi[9] - want9).abs() < 1e-12);
    }

    #[test]
    fn cut_is_tight_along_its_chain() {
        let inst = fig5();
        let oracle = ValueOracle::new(12, |z| {
            -z.iter()
                .enumerate()
                .map(|(i, &v)| (i as f64 + 1.0) * v * v * 0.1)
                .sum::<f64>()
        });
        let cut = dr_cut(&inst, &oracle, &fig5_delta()).unwrap();
        assert!(chain_tightness(&inst, &cut) < 1e-9);
        // In particular the ninth chain point evaluates exactly.
        let points = prefix_points(&inst, &cut.permutation);
        assert!((cut.rhs_at(&points[9]) - oracle.value(&points[9])).abs() < 1e-9);
    }

    #[test]
    fn zero_objective_gives_zero_cut() {
        let inst = fig5();
        let oracle = ValueOracle::new(12, |_| 0.0);
        let cut = dr_cut(&inst, &oracle, &fig5_delta()).unwrap();
        assert!(cut.pi.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn violation_sign_convention() {
        let inst = build_instance(2, &[], &[1.0, 1.0], &[1, 2]).unwrap();
        let oracle = ValueOracle::new(2, |z| -z[0] - z[1]);
        let z = vec![0.0, 1.0, 0.5];
        let cut = separate(&inst, &oracle, &z, 0.0).unwrap();
        let rhs = cut.rhs_at(&z);
        assert!((cut.violation(&z, rhs) - 0.0).abs() < 1e-12);
        assert!((cut.violation(&z, rhs - 1.0) - 1.0).abs() < 1e-12);
        assert!(cut.violation(&z, rhs + 100.0) < 0.0);
    }

    #[test]
    fn separation_at_extreme_points_is_non_positive() {
        let inst = fig5();
        let oracle = ValueOracle::new(12, |z| {
            -0.3 * z[0] * z[2] - z[4] * z[8] * 0.05 - z.iter().sum::<f64>()
        });
        for mask in [0u64, 0x15a, 0xfff, 0x802] {
            let s = VertexSet::from_mask(12, mask);
            let z = extreme_point(&inst, &s).unwrap();
            let w = oracle.value(&z);
            let cut = separate(&inst, &oracle, &z, w).unwrap();
            assert!(cut.violation(&z, w) <= 1e-9, "mask {mask:x}");
        }
    }

    #[test]
    fn binary_box_ranks_by_value() {
        let inst = build_instance(4, &[], &[1.0; 4], &[1, 2, 3, 4]).unwrap();
        let z = vec![0.0, 0.25, 0.9, 0.25, 0.6];
        let perm = permutation_finder(&inst, &z).unwrap();
        assert_eq!(perm.order(), descending_order(&inst, &z).as_slice());
        assert_eq!(perm.order(), &[2, 4, 1, 3]);
    }

    #[test]
    fn validity_over_all_extremes_for_dr_oracle() {
        let inst = build_instance(3, &[(1, 2)], &[1.5, 2.0, 3.0], &[2]).unwrap();
        // Entrywise non-positive quadratic: DR-submodular.
        let oracle = ValueOracle::new(3, |z| {
            -z[0] * z[0] - 0.5 * z[0] * z[1] - 0.2 * z[1] * z[2] + z[0] + 2.0 * z[1] - z[2]
        });
        for perm in crate::perm::enumerate_valid_permutations(&inst, 8).unwrap() {
            let cut = dr_cut(&inst, &oracle, &perm).unwrap();
            let check = validate_cut_on_extremes(&inst, &oracle, &cut, 20).unwrap();
            assert!(
                check.valid,
                "worst slack {} at {:?}",
                check.worst_slack, check.worst_set
            );
        }
    }

    #[test]
    fn invalid_permutations_are_refused() {
        // Ordering the reference instance by vertex id breaks all three
        // validity conditions; cut construction must reject it rather
        // than emit a potentially invalid row.
        let inst = fig5();
        let oracle = ValueOracle::new(12, |z| -z.iter().sum::<f64>());
        let tau = Permutation::new(12, (1..=12).collect()).unwrap();
        assert!(matches!(
            dr_cut(&inst, &oracle, &tau),
            Err(crate::error::Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn size_guard_on_exhaustive_validation() {
        let inst = build_instance(3, &[], &[1.0, 1.0, 1.0], &[1, 2, 3]).unwrap();
        let oracle = ValueOracle::new(3, |_| 0.0);
        let cut = separate(&inst, &oracle, &inst.zero_point(), 0.0).unwrap();
        assert!(matches!(
            validate_cut_on_extremes(&inst, &oracle, &cut, 2),
            Err(Error::TooLarge { .. })
        ));
    }
}
