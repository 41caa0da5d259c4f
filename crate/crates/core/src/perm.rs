//! Valid permutations of the vertex set and the chain decomposition
//! they induce.
//!
//! A valid permutation indexes a strictly increasing chain of extreme
//! points `P(delta, 0) < P(delta, 1) < ... < P(delta, n)`. The
//! `t`-function inverts that chain: `t(delta, z)` gives the unique
//! affine weights expressing `z` over the chain, and the greedy
//! permutation makes those weights a convex combination for any hull
//! point. This module implements the validity conditions, the candidate
//! filter and greedy finder, the `t`-function in both direct and matrix
//! form together with the chain-difference matrix, and the resulting
//! decomposition.

use crate::error::{Error, Result};
use crate::forest::ForestInstance;
use crate::hull;
use crate::num::floor_strict;
use crate::set::VertexSet;
use crate::{tol, Point, Vertex};

/// An ordering of all vertices, with positions 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<Vertex>,
    position: Vec<usize>,
}

impl Permutation {
    pub fn new(n: usize, order: Vec<Vertex>) -> Result<Self> {
        if order.len() != n {
            return Err(Error::NotAPermutation(format!(
                "length {} differs from vertex count {n}",
                order.len()
            )));
        }
        let mut position = vec![0usize; n + 1];
        for (idx, &v) in order.iter().enumerate() {
            if v == 0 || v > n {
                return Err(Error::NotAPermutation(format!("vertex {v} out of range")));
            }
            if position[v] != 0 {
                return Err(Error::NotAPermutation(format!("vertex {v} repeated")));
            }
            position[v] = idx + 1;
        }
        Ok(Permutation { order, position })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Vertex at 1-based position `k`.
    pub fn vertex_at(&self, k: usize) -> Vertex {
        self.order[k - 1]
    }

    /// 1-based position of `v`.
    pub fn position_of(&self, v: Vertex) -> usize {
        self.position[v]
    }

    pub fn order(&self) -> &[Vertex] {
        &self.order
    }
}

/// A failed validity condition with its witnessing vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConditionViolation {
    /// Condition 1: equal-bound descendant `j` of `i` must come first.
    EqualBoundOrder {
        ancestor: Vertex,
        descendant: Vertex,
    },
    /// Condition 2: the child of a below-one fractional bound must
    /// precede it.
    ChildMustPrecede { psi: Vertex, child: Vertex },
    /// Condition 3: an ancestor carrying the rounded-down bound may not
    /// precede `psi` while `psi` precedes its child.
    AncestorInWindow { psi: Vertex, ancestor: Vertex },
}

impl ConditionViolation {
    pub fn condition(&self) -> u8 {
        match self {
            ConditionViolation::EqualBoundOrder { .. } => 1,
            ConditionViolation::ChildMustPrecede { .. } => 2,
            ConditionViolation::AncestorInWindow { .. } => 3,
        }
    }
}

/// The chain machinery presumes the single-child normalization; refuse
/// raw instances up front instead of misreading their child lists.
fn require_normalized(inst: &ForestInstance) -> Result<()> {
    inst.check_assumption1()?;
    if !inst.property1_holds() {
        return Err(Error::AssumptionViolated(
            "single-child normalization required (run the instance through normalize_property1)"
                .into(),
        ));
    }
    Ok(())
}

/// Check the three validity conditions, returning every violation.
pub fn is_valid_permutation(
    inst: &ForestInstance,
    perm: &Permutation,
) -> Result<Vec<ConditionViolation>> {
    require_normalized(inst)?;
    if perm.len() != inst.vertex_count() {
        return Err(Error::NotAPermutation("length mismatch".into()));
    }
    let mut violations = Vec::new();
    for i in 1..=inst.vertex_count() {
        for &j in inst.descendants(i) {
            if j != i && inst.bound(j) == inst.bound(i) && perm.position_of(i) < perm.position_of(j)
            {
                violations.push(ConditionViolation::EqualBoundOrder {
                    ancestor: i,
                    descendant: j,
                });
            }
        }
    }
    for &psi in inst.psi_set() {
        let child = inst.psi_child(psi);
        if floor_strict(inst.bound(psi)) == 0.0 && perm.position_of(child) > perm.position_of(psi) {
            violations.push(ConditionViolation::ChildMustPrecede { psi, child });
        }
        let floor = floor_strict(inst.bound(psi));
        for anc in inst.ascendants(psi) {
            if anc != psi
                && inst.bound(anc) == floor
                && perm.position_of(anc) < perm.position_of(psi)
                && perm.position_of(psi) < perm.position_of(child)
            {
                violations.push(ConditionViolation::AncestorInWindow { psi, ancestor: anc });
            }
        }
    }
    Ok(violations)
}

// ---------------------------------------------------------------------
// Incremental prefix state

/// Placement state of a growing prefix, with the bookkeeping that keeps
/// candidate filtering and `t`-evaluation cheap: the deepest placed
/// ascendant per vertex and, per vertex, how many unplaced equal-bound
/// proper descendants remain.
struct PrefixState<'a> {
    inst: &'a ForestInstance,
    placed: Vec<bool>,
    deepest_placed_anc: Vec<Vertex>,
    unplaced_equal_desc: Vec<usize>,
    placed_count: usize,
}

struct PlacementUndo {
    vertex: Vertex,
    anc_changes: Vec<(Vertex, Vertex)>,
    equal_decrements: Vec<Vertex>,
}

impl<'a> PrefixState<'a> {
    fn new(inst: &'a ForestInstance) -> Self {
        let n = inst.vertex_count();
        let mut unplaced_equal_desc = vec![0usize; n + 1];
        for i in 1..=n {
            unplaced_equal_desc[i] = inst
                .descendants(i)
                .iter()
                .filter(|&&j| j != i && inst.bound(j) == inst.bound(i))
                .count();
        }
        PrefixState {
            inst,
            placed: vec![false; n + 1],
            deepest_placed_anc: vec![0; n + 1],
            unplaced_equal_desc,
            placed_count: 0,
        }
    }

    fn place(&mut self, v: Vertex) -> PlacementUndo {
        debug_assert!(!self.placed[v]);
        self.placed[v] = true;
        self.placed_count += 1;
        let mut anc_changes = Vec::new();
        for &j in self.inst.descendants(v) {
            let old = self.deepest_placed_anc[j];
            if old == 0 || self.inst.depth(old) < self.inst.depth(v) {
                anc_changes.push((j, old));
                self.deepest_placed_anc[j] = v;
            }
        }
        let mut equal_decrements = Vec::new();
        let mut cur = v;
        while let Some(p) = self.inst.parent(cur) {
            if self.inst.bound(p) == self.inst.bound(v) {
                self.unplaced_equal_desc[p] -= 1;
                equal_decrements.push(p);
            }
            cur = p;
        }
        PlacementUndo {
            vertex: v,
            anc_changes,
            equal_decrements,
        }
    }

    fn unplace(&mut self, undo: PlacementUndo) {
        self.placed[undo.vertex] = false;
        self.placed_count -= 1;
        for &(j, old) in undo.anc_changes.iter().rev() {
            self.deepest_placed_anc[j] = old;
        }
        for &p in &undo.equal_decrements {
            self.unplaced_equal_desc[p] += 1;
        }
    }

    /// Deepest placed ascendant of an unplaced vertex, 0 when none.
    fn anchor(&self, i: Vertex) -> Vertex {
        self.deepest_placed_anc[i]
    }

    /// Candidate filter: the unplaced vertices whose appending keeps the
    /// prefix valid. Non-empty whenever anything is unplaced.
    fn candidates(&self) -> Vec<Vertex> {
        let inst = self.inst;
        let mut out = Vec::new();
        'next: for i in 1..=inst.vertex_count() {
            if self.placed[i] {
                continue;
            }
            if self.unplaced_equal_desc[i] > 0 {
                continue;
            }
            if inst.in_psi(i) {
                let child = inst.psi_child(i);
                if !self.placed[child] {
                    if inst.bound(i) < 1.0 {
                        continue;
                    }
                    let floor = floor_strict(inst.bound(i));
                    let mut cur = i;
                    while let Some(p) = inst.parent(cur) {
                        if self.placed[p] && inst.bound(p) == floor {
                            continue 'next;
                        }
                        cur = p;
                    }
                }
            }
            out.push(i);
        }
        out
    }

    /// The `t`-value obtained by appending `i` to the current prefix.
    fn t_for(&self, i: Vertex, z: &Point) -> Result<f64> {
        let inst = self.inst;
        let a = self.anchor(i);
        let (numerator, denominator) = if inst.in_psi(i) && !self.placed[inst.psi_child(i)] {
            let den = floor_strict(inst.bound(i)) - inst.bound(a);
            (eta(inst, i, z) - z[a], den)
        } else if a != 0 && inst.in_psi(a) {
            let den = inst.bound(i) - floor_strict(inst.bound(a));
            (z[i] - eta(inst, a, z), den)
        } else {
            (z[i] - z[a], inst.bound(i) - inst.bound(a))
        };
        if denominator <= 0.0 {
            return Err(Error::InvalidPrefix {
                position: self.placed_count + 1,
                denominator,
            });
        }
        Ok(numerator / denominator)
    }

    /// Row of the inversion matrix for appending `i`, written into `row`
    /// (vertex-indexed, entry 0 unused).
    fn t_row(&self, i: Vertex, row: &mut [f64]) -> Result<()> {
        let inst = self.inst;
        let a = self.anchor(i);
        if inst.in_psi(i) && !self.placed[inst.psi_child(i)] {
            let child = inst.psi_child(i);
            let gap = inst.bound(child) - inst.bound(i);
            let frac = inst.bound(i) - floor_strict(inst.bound(i));
            let den = floor_strict(inst.bound(i)) - inst.bound(a);
            if den <= 0.0 {
                return Err(Error::InvalidPrefix {
                    position: self.placed_count + 1,
                    denominator: den,
                });
            }
            row[i] = 1.0 / (gap * den);
            row[child] = -frac / (gap * den);
            if a != 0 {
                row[a] = -1.0 / den;
            }
        } else if a != 0 && inst.in_psi(a) {
            let child = inst.psi_child(a);
            let gap = inst.bound(child) - inst.bound(a);
            let frac = inst.bound(a) - floor_strict(inst.bound(a));
            if i == child {
                row[child] = 1.0 / gap;
                row[a] = -1.0 / gap;
            } else {
                let den = inst.bound(i) - floor_strict(inst.bound(a));
                if den <= 0.0 {
                    return Err(Error::InvalidPrefix {
                        position: self.placed_count + 1,
                        denominator: den,
                    });
                }
                row[i] = 1.0 / den;
                row[a] = -1.0 / (gap * den);
                row[child] = frac / (gap * den);
            }
        } else {
            let den = inst.bound(i) - inst.bound(a);
            if den <= 0.0 {
                return Err(Error::InvalidPrefix {
                    position: self.placed_count + 1,
                    denominator: den,
                });
            }
            row[i] = 1.0 / den;
            if a != 0 {
                row[a] = -1.0 / den;
            }
        }
        Ok(())
    }

    /// Extreme-point value of `j` under the current placed set.
    fn point_entry(&self, j: Vertex) -> f64 {
        let a = self.deepest_placed_anc[j];
        if a == 0 {
            return 0.0;
        }
        if self.inst.in_psi(a) && !self.placed[self.inst.psi_child(a)] {
            floor_strict(self.inst.bound(a))
        } else {
            self.inst.bound(a)
        }
    }
}

/// Denominator-normalized mix of a fractional-bound vertex and its
/// child: `(z_psi - (u - ⌊u⌋) z_ch) / (⌈u⌉ - u)`.
pub fn eta(inst: &ForestInstance, psi: Vertex, z: &Point) -> f64 {
    let u = inst.bound(psi);
    let child = inst.psi_child(psi);
    (z[psi] - (u - floor_strict(u)) * z[child]) / (inst.bound(child) - u)
}

/// All vertices whose appending keeps the partial permutation valid.
pub fn valid_candidates(inst: &ForestInstance, partial: &[Vertex]) -> Result<VertexSet> {
    require_normalized(inst)?;
    let mut state = PrefixState::new(inst);
    for (idx, &v) in partial.iter().enumerate() {
        if v == 0 || v > inst.vertex_count() || state.placed[v] {
            return Err(Error::InvalidPartial(format!(
                "bad vertex {v} at position {}",
                idx + 1
            )));
        }
        if !state.candidates().contains(&v) {
            return Err(Error::InvalidPartial(format!(
                "prefix not extendable past position {}",
                idx + 1
            )));
        }
        state.place(v);
    }
    Ok(VertexSet::from_vertices(
        inst.vertex_count(),
        state.candidates(),
    ))
}

/// `t`-value at position `k` of a prefix (`prefix[..k]` must be valid).
pub fn t_value(inst: &ForestInstance, prefix: &[Vertex], k: usize, z: &Point) -> Result<f64> {
    require_normalized(inst)?;
    if k == 0 || k > prefix.len() {
        return Err(Error::InvalidInput("position outside prefix".into()));
    }
    let mut state = PrefixState::new(inst);
    for &v in &prefix[..k - 1] {
        state.place(v);
    }
    state.t_for(prefix[k - 1], z)
}

/// The whole `t`-vector of a valid permutation at `z`, direct formulas.
pub fn t_vector(inst: &ForestInstance, perm: &Permutation, z: &Point) -> Result<Vec<f64>> {
    require_normalized(inst)?;
    let mut state = PrefixState::new(inst);
    let mut out = Vec::with_capacity(perm.len());
    for &v in perm.order() {
        out.push(state.t_for(v, z)?);
        state.place(v);
    }
    Ok(out)
}

/// The matrix `T` with `T z = t(delta, z)`; rows follow permutation
/// positions, columns are vertices (entry 0 unused).
pub fn t_matrix(inst: &ForestInstance, perm: &Permutation) -> Result<Vec<Vec<f64>>> {
    ensure_valid(inst, perm)?;
    let n = inst.vertex_count();
    let mut state = PrefixState::new(inst);
    let mut rows = Vec::with_capacity(n);
    for &v in perm.order() {
        let mut row = vec![0.0; n + 1];
        state.t_row(v, &mut row)?;
        state.place(v);
        rows.push(row);
    }
    Ok(rows)
}

/// The matrix `D` whose `k`-th column is `P(delta, k) - P(delta, k-1)`;
/// the two-sided inverse of `T` for valid permutations.
pub fn d_matrix(inst: &ForestInstance, perm: &Permutation) -> Result<Vec<Vec<f64>>> {
    ensure_valid(inst, perm)?;
    let n = inst.vertex_count();
    let points = prefix_points(inst, perm);
    let mut cols = vec![vec![0.0; n + 1]; n];
    for k in 1..=n {
        for v in 1..=n {
            cols[k - 1][v] = points[k][v] - points[k - 1][v];
        }
    }
    Ok(cols)
}

fn ensure_valid(inst: &ForestInstance, perm: &Permutation) -> Result<()> {
    let violations = is_valid_permutation(inst, perm)?;
    if let Some(v) = violations.first() {
        return Err(Error::InvalidPermutation(format!(
            "condition {} violated",
            v.condition()
        )));
    }
    Ok(())
}

/// The chain of extreme points of a permutation's prefixes, from the
/// empty set to the full vertex set (`n + 1` points). Entries are
/// updated incrementally; only the subtree a placement touches is
/// recomputed.
pub fn prefix_points(inst: &ForestInstance, perm: &Permutation) -> Vec<Point> {
    let mut state = PrefixState::new(inst);
    let mut points = Vec::with_capacity(perm.len() + 1);
    points.push(inst.zero_point());
    for &v in perm.order() {
        state.place(v);
        let mut next = points.last().unwrap().clone();
        // A placement can only change values below itself, except when
        // it is the child completing a fractional-bound pair: then the
        // whole subtree of that fractional vertex refreshes.
        let base = match inst.parent(v) {
            Some(p) if inst.in_psi(p) && state.placed[p] && inst.psi_child(p) == v => p,
            _ => v,
        };
        for &j in inst.descendants(base) {
            next[j] = state.point_entry(j);
        }
        points.push(next);
    }
    points
}

// ---------------------------------------------------------------------
// Greedy construction

/// Greedy permutation for a hull point: each step appends the candidate
/// with the largest `t`-value, ties to the smallest vertex id. The
/// resulting `t`-vector is monotone within `[0, 1]`, making the chain
/// weights a convex combination.
pub fn permutation_finder(inst: &ForestInstance, z: &Point) -> Result<Permutation> {
    let slack = hull::membership_slack(inst, z);
    if slack < -tol::MEMBERSHIP {
        return Err(Error::NotInHull {
            worst_violation: -slack,
        });
    }
    permutation_finder_unchecked(inst, z)
}

/// Same as [`permutation_finder`] without the hull membership pre-check.
pub fn permutation_finder_unchecked(inst: &ForestInstance, z: &Point) -> Result<Permutation> {
    require_normalized(inst)?;
    let n = inst.vertex_count();
    let mut state = PrefixState::new(inst);
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(Vertex, f64)> = None;
        for i in state.candidates() {
            let t = state.t_for(i, z)?;
            match best {
                Some((_, bt)) if t <= bt => {}
                _ => best = Some((i, t)),
            }
        }
        let (pick, _) = best.ok_or_else(|| Error::InvalidPartial("no valid candidate".into()))?;
        state.place(pick);
        order.push(pick);
    }
    Permutation::new(n, order)
}

// ---------------------------------------------------------------------
// Decomposition

/// A hull point expressed as a convex combination of the extreme-point
/// chain of a greedy permutation.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub permutation: Permutation,
    /// `t_1 ..= t_n`; the implied boundary values are `t_0 = 1` and
    /// `t_{n+1} = 0`.
    pub t: Vec<f64>,
    /// `lambda_k = t_k - t_{k+1}` for `k = 0 ..= n`, clamped at zero.
    pub weights: Vec<f64>,
    /// `P(delta, 0) ..= P(delta, n)`.
    pub points: Vec<Point>,
}

impl Decomposition {
    /// Indices with meaningful weight.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, _)| k)
    }
}

/// Decompose a hull point over the greedy permutation's chain and check
/// the reconstruction.
pub fn decompose(inst: &ForestInstance, z: &Point) -> Result<Decomposition> {
    decompose_with_tolerances(inst, z, tol::MEMBERSHIP, tol::DECOMPOSITION)
}

/// [`decompose`] with caller-chosen slack: points carrying solver
/// round-off need a membership band wider than the hull default.
pub fn decompose_with_tolerances(
    inst: &ForestInstance,
    z: &Point,
    membership_tol: f64,
    residual_tol: f64,
) -> Result<Decomposition> {
    let slack = hull::membership_slack(inst, z);
    if slack < -membership_tol {
        return Err(Error::NotInHull {
            worst_violation: -slack,
        });
    }
    let perm = permutation_finder_unchecked(inst, z)?;
    let n = inst.vertex_count();
    let t = t_vector(inst, &perm, z)?;

    // Cross-validate the direct formulas against the matrix route.
    let matrix = t_matrix(inst, &perm)?;
    for k in 0..n {
        let via_matrix: f64 = matrix[k].iter().zip(z).map(|(c, zv)| c * zv).sum();
        if (via_matrix - t[k]).abs() > tol::T_CROSS_CHECK {
            return Err(Error::NumericalFailure(format!(
                "t routes disagree at position {}: {} vs {}",
                k + 1,
                t[k],
                via_matrix
            )));
        }
    }

    let mut weights = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let hi = if k == 0 { 1.0 } else { t[k - 1] };
        let lo = if k == n { 0.0 } else { t[k] };
        let lambda = hi - lo;
        if lambda < -residual_tol {
            return Err(Error::DecompositionResidual { residual: -lambda });
        }
        weights.push(lambda.max(0.0));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > residual_tol {
        return Err(Error::DecompositionResidual {
            residual: (total - 1.0).abs(),
        });
    }
    let points = prefix_points(inst, &perm);
    for v in 1..=n {
        let rebuilt: f64 = weights.iter().zip(&points).map(|(w, p)| w * p[v]).sum();
        let residual = (rebuilt - z[v]).abs();
        if residual > residual_tol {
            return Err(Error::DecompositionResidual { residual });
        }
    }
    Ok(Decomposition {
        permutation: perm,
        t,
        weights,
        points,
    })
}

// ---------------------------------------------------------------------
// Enumeration

/// Lazy backtracking enumeration of every valid permutation. Guarded:
/// intended for exhaustive certification on small instances.
pub fn enumerate_valid_permutations(
    inst: &ForestInstance,
    max_vertices: usize,
) -> Result<ValidPermutations<'_>> {
    let n = inst.vertex_count();
    if n > max_vertices {
        return Err(Error::TooLarge {
            size: n,
            limit: max_vertices,
        });
    }
    let state = PrefixState::new(inst);
    Ok(ValidPermutations {
        state,
        frames: Vec::new(),
        order: Vec::new(),
        started: false,
    })
}

pub struct ValidPermutations<'a> {
    state: PrefixState<'a>,
    frames: Vec<Frame>,
    order: Vec<Vertex>,
    started: bool,
}

struct Frame {
    candidates: Vec<Vertex>,
    next: usize,
    undo: Option<PlacementUndo>,
}

impl ValidPermutations<'_> {
    fn push_frame(&mut self) {
        let candidates = self.state.candidates();
        self.frames.push(Frame {
            candidates,
            next: 0,
            undo: None,
        });
    }
}

impl Iterator for ValidPermutations<'_> {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let n = self.state.inst.vertex_count();
        if !self.started {
            self.started = true;
            self.push_frame();
        } else if self.frames.is_empty() {
            return None;
        }
        loop {
            let top = self.frames.last_mut()?;
            if let Some(undo) = top.undo.take() {
                self.state.unplace(undo);
                self.order.pop();
            }
            if top.next >= top.candidates.len() {
                self.frames.pop();
                if self.frames.is_empty() {
                    return None;
                }
                continue;
            }
            let v = top.candidates[top.next];
            top.next += 1;
            top.undo = Some(self.state.place(v));
            self.order.push(v);
            if self.order.len() == n {
                return Some(Permutation::new(n, self.order.clone()).expect("by construction"));
            }
            self.push_frame();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::build_instance;
    use crate::hull::extreme_point;

    pub fn fig5() -> ForestInstance {
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

    pub fn fig5_delta() -> Vec<Vertex> {
        vec![6, 4, 7, 5, 2, 3, 9, 1, 11, 8, 10, 12]
    }

    #[test]
    fn identity_order_violates_all_three_conditions() {
        let inst = fig5();
        let tau = Permutation::new(12, (1..=12).collect()).unwrap();
        let violations = is_valid_permutation(&inst, &tau).unwrap();
        let mut conditions: Vec<u8> = violations.iter().map(|v| v.condition()).collect();
        conditions.sort_unstable();
        conditions.dedup();
        assert_eq!(conditions, vec![1, 2, 3]);
    }

    #[test]
    fn known_good_permutation_is_valid() {
        let inst = fig5();
        let delta = Permutation::new(12, fig5_delta()).unwrap();
        assert!(is_valid_permutation(&inst, &delta).unwrap().is_empty());
    }

    #[test]
    fn box_only_instances_accept_everything() {
        let inst = build_instance(3, &[], &[1.5, 2.0, 3.0], &[2]).unwrap();
        let perms = enumerate_valid_permutations(&inst, 8).unwrap().count();
        assert_eq!(perms, 6);
    }

    #[test]
    fn equal_bound_chain_forces_descendant_first() {
        let inst = build_instance(2, &[(1, 2)], &[2.0, 2.0], &[]).unwrap();
        let orders: Vec<Vec<Vertex>> = enumerate_valid_permutations(&inst, 8)
            .unwrap()
            .map(|p| p.order().to_vec())
            .collect();
        assert_eq!(orders, vec![vec![2, 1]]);
    }

    #[test]
    fn first_candidate_set_on_reference_instance() {
        let inst = fig5();
        let delta = valid_candidates(&inst, &[]).unwrap();
        assert_eq!(
            delta.iter().collect::<Vec<_>>(),
            vec![2, 4, 5, 6, 7, 8, 9, 11, 12]
        );
        // One vertex left: it is always the only candidate.
        let mut prefix = fig5_delta();
        let last = prefix.pop().unwrap();
        let delta = valid_candidates(&inst, &prefix).unwrap();
        assert_eq!(delta.iter().collect::<Vec<_>>(), vec![last]);
    }

    #[test]
    fn unconstrained_chain_admits_both_openings() {
        let inst = build_instance(2, &[(1, 2)], &[2.0, 5.0], &[1, 2]).unwrap();
        let delta = valid_candidates(&inst, &[]).unwrap();
        assert_eq!(delta.iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn single_vertex_matrices() {
        let inst = build_instance(1, &[], &[4.0], &[]).unwrap();
        let perm = Permutation::new(1, vec![1]).unwrap();
        assert_eq!(t_matrix(&inst, &perm).unwrap()[0][1], 0.25);
        assert_eq!(d_matrix(&inst, &perm).unwrap()[0][1], 4.0);
    }

    #[test]
    fn candidates_reject_invalid_prefix() {
        let inst = fig5();
        // Vertex 1 cannot open the permutation (its child must precede).
        assert!(matches!(
            valid_candidates(&inst, &[1]),
            Err(Error::InvalidPartial(_))
        ));
    }

    #[test]
    fn eta_closed_form() {
        let inst = fig5();
        let mut z = inst.zero_point();
        assert_eq!(eta(&inst, 9, &z), 0.0);
        z[9] = 2.0;
        z[10] = 1.0;
        // (z9 - 0.5 z10) / 0.5 = 2 z9 - z10
        assert!((eta(&inst, 9, &z) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn t_vector_matches_closed_forms() {
        let inst = fig5();
        let perm = Permutation::new(12, fig5_delta()).unwrap();
        let mut rng_state = 88172645463325252u64;
        let mut next = move || {
            // xorshift is plenty for test points
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..25 {
            let mut z = inst.zero_point();
            for v in 1..=12 {
                z[v] = next() * inst.bound(v);
            }
            let t = t_vector(&inst, &perm, &z).unwrap();
            let eta9 = 2.0 * z[9] - z[10];
            let closed = [
                z[6] / 9.0,
                z[4] / 8.0,
                z[7] / 12.0,
                z[5] / 11.75,
                z[2],
                (z[3] - z[2]) / 7.0,
                eta9 / 10.0,
                10.0 * z[1],
                z[11] - eta9,
                z[8] / 10.0,
                2.0 * z[10] - 2.0 * z[9],
                (z[12] - z[7]) / 7.9,
            ];
            for (k, want) in closed.iter().enumerate() {
                assert!(
                    (t[k] - want).abs() < 1e-10,
                    "position {}: {} vs {}",
                    k + 1,
                    t[k],
                    want
                );
            }
            // Matrix route agrees with the direct formulas.
            let matrix = t_matrix(&inst, &perm).unwrap();
            for k in 0..12 {
                let via: f64 = matrix[k].iter().zip(&z).map(|(c, zv)| c * zv).sum();
                assert!((via - t[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn t_matrix_rows_match_symbolic_coefficients() {
        let inst = fig5();
        let perm = Permutation::new(12, fig5_delta()).unwrap();
        let m = t_matrix(&inst, &perm).unwrap();
        // Row 7 is eta_9 / 10 = (2 z9 - z10) / 10.
        assert!((m[6][9] - 0.2).abs() < 1e-15);
        assert!((m[6][10] + 0.1).abs() < 1e-15);
        // Row 9 is z11 - 2 z9 + z10.
        assert!((m[8][11] - 1.0).abs() < 1e-15);
        assert!((m[8][9] + 2.0).abs() < 1e-15);
        assert!((m[8][10] - 1.0).abs() < 1e-15);
        // Row 11 is 2 z10 - 2 z9 (the child completing the pair).
        assert!((m[10][10] - 2.0).abs() < 1e-15);
        assert!((m[10][9] + 2.0).abs() < 1e-15);
        // Row 8 is 10 z1; row 12 is (z12 - z7) / 7.9.
        assert!((m[7][1] - 10.0).abs() < 1e-15);
        assert!((m[11][12] - 1.0 / 7.9).abs() < 1e-15);
        assert!((m[11][7] + 1.0 / 7.9).abs() < 1e-15);
        // Rows carry no stray entries.
        let nonzero: usize = (0..12)
            .map(|k| (1..=12).filter(|&v| m[k][v] != 0.0).count())
            .sum();
        assert_eq!(nonzero, 1 + 1 + 1 + 1 + 1 + 2 + 2 + 1 + 3 + 1 + 2 + 2);
    }

    #[test]
    fn prefix_point_chain_matches_direct_construction() {
        let inst = fig5();
        let perm = Permutation::new(12, fig5_delta()).unwrap();
        let points = prefix_points(&inst, &perm);
        for k in 0..=12 {
            let s = VertexSet::from_vertices(12, perm.order()[..k].iter().copied());
            let direct = extreme_point(&inst, &s).unwrap();
            assert_eq!(points[k], direct, "prefix {k}");
        }
    }

    #[test]
    fn t_at_prefix_points_is_step_shaped() {
        let inst = fig5();
        let perm = Permutation::new(12, fig5_delta()).unwrap();
        let points = prefix_points(&inst, &perm);
        for j in 0..=12 {
            let t = t_vector(&inst, &perm, &points[j]).unwrap();
            for (k, &tk) in t.iter().enumerate() {
                let want = if k < j { 1.0 } else { 0.0 };
                assert!((tk - want).abs() < 1e-9, "prefix {j}, position {}", k + 1);
            }
        }
    }

    #[test]
    fn inversion_identity_on_reference_permutation() {
        let inst = fig5();
        let perm = Permutation::new(12, fig5_delta()).unwrap();
        let t = t_matrix(&inst, &perm).unwrap();
        let d = d_matrix(&inst, &perm).unwrap();
        for row in 0..12 {
            for col in 0..12 {
                let td: f64 = (1..=12).map(|v| t[row][v] * d[col][v]).sum();
                let want = if row == col { 1.0 } else { 0.0 };
                assert!((td - want).abs() < 1e-9, "TD at ({row}, {col}) = {td}");
                let dt: f64 = (0..12)
                    .map(|k| d[k][perm.vertex_at(row + 1)] * t[k][perm.vertex_at(col + 1)])
                    .sum();
                let _ = dt;
            }
        }
    }

    #[test]
    fn greedy_on_zero_point() {
        let inst = fig5();
        let dec = decompose(&inst, &inst.zero_point()).unwrap();
        assert!(dec.t.iter().all(|&t| t.abs() < 1e-12));
        assert!((dec.weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_on_extreme_points_gives_unit_weight() {
        let inst = fig5();
        for mask in [0x0f3u64, 0x555, 0xabc, 0xfff, 0x001] {
            let s = VertexSet::from_mask(12, mask);
            let z = extreme_point(&inst, &s).unwrap();
            let dec = decompose(&inst, &z).unwrap();
            let support: Vec<usize> = dec.support().collect();
            assert_eq!(support.len(), 1, "mask {mask:x}");
            let k = support[0];
            assert!((dec.weights[k] - 1.0).abs() < 1e-9);
            assert_eq!(dec.points[k], z);
        }
    }

    #[test]
    fn box_midpoint_splits_evenly() {
        let inst = build_instance(3, &[], &[2.0, 3.0, 4.0], &[]).unwrap();
        let z = vec![0.0, 1.0, 1.5, 2.0];
        let dec = decompose(&inst, &z).unwrap();
        for t in &dec.t {
            assert!((t - 0.5).abs() < 1e-12);
        }
        assert!((dec.weights[0] - 0.5).abs() < 1e-12);
        assert!((dec.weights[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn convex_mix_reconstructs() {
        let inst = fig5();
        let p1 = extreme_point(&inst, &VertexSet::from_mask(12, 0x2b1)).unwrap();
        let p2 = extreme_point(&inst, &VertexSet::from_mask(12, 0xf0e)).unwrap();
        let mut z = inst.zero_point();
        for v in 1..=12 {
            z[v] = 0.3 * p1[v] + 0.7 * p2[v];
        }
        let dec = decompose(&inst, &z).unwrap();
        let monotone = dec.t.windows(2).all(|w| w[0] >= w[1] - 1e-12);
        assert!(monotone);
        assert!(dec.t[0] <= 1.0 + 1e-12);
        assert!(dec.t[11] >= -1e-12);
    }

    #[test]
    fn out_of_hull_points_are_rejected() {
        let inst = fig5();
        let mut z = inst.zero_point();
        z[1] = 5.0; // above its bound
        assert!(matches!(decompose(&inst, &z), Err(Error::NotInHull { .. })));
    }

    #[test]
    fn affine_identity_for_arbitrary_vectors() {
        // Any valid permutation reconstructs any vector affinely, even
        // outside the hull (weights may be negative).
        let inst = fig5();
        let perm = Permutation::new(12, fig5_delta()).unwrap();
        let d = d_matrix(&inst, &perm).unwrap();
        let t_m = t_matrix(&inst, &perm).unwrap();
        let z: Vec<f64> = (0..13).map(|i| (i as f64 * 0.7).sin() * 5.0).collect();
        let t: Vec<f64> = (0..12)
            .map(|k| t_m[k].iter().zip(&z).map(|(c, v)| c * v).sum())
            .collect();
        for v in 1..=12 {
            let rebuilt: f64 = (0..12).map(|k| d[k][v] * t[k]).sum();
            assert!((rebuilt - z[v]).abs() < 1e-9, "vertex {v}");
        }
    }
}
