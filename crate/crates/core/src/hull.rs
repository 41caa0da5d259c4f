//! Extreme points and the linear description of the feasible set's
//! convex hull: box rows, monotonicity rows, and one MIR row per
//! fractional-bound vertex with integer descendants.

use crate::error::{Error, Result};
use crate::forest::ForestInstance;
use crate::num::{ceil_weak, floor_strict, is_integral};
use crate::set::VertexSet;
use crate::{tol, Point, Vertex};

/// One row `pi^T z <= rhs` of the hull description.
#[derive(Clone, Debug)]
pub struct LinearCut {
    /// Coefficients indexed by vertex; entry 0 unused.
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub tag: CutTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutTag {
    /// `z_i <= u_i`
    Box,
    /// `-z_i <= 0`
    NonNeg,
    /// `z_i - z_j <= 0` for an arc `(i, j)`
    Monotone,
    /// The rounding row linking a fractional-bound vertex to its child.
    Mir,
    /// Epigraph row `pi^T z - w <= 0` (carried in the cuts module).
    Dr,
}

impl LinearCut {
    pub fn slack(&self, z: &Point) -> f64 {
        self.rhs - dot(&self.coeffs, z)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deepest member of `S` among the ascendants of `i`, or the sentinel 0
/// when no ascendant is in `S`.
pub fn i_triangle(inst: &ForestInstance, s: &VertexSet, i: Vertex) -> Vertex {
    let mut cur = i;
    loop {
        if s.contains(cur) {
            return cur;
        }
        match inst.parent(cur) {
            Some(p) => cur = p,
            None => return 0,
        }
    }
}

/// Descendants of `i` not cut off by a member of `S` strictly below `i`:
/// `{ j in R+(i) : j not reachable from any k in S ∩ (R+(i) \ {i}) }`.
pub fn sigma(inst: &ForestInstance, s: &VertexSet, i: Vertex) -> VertexSet {
    let mut out = VertexSet::empty(inst.vertex_count());
    let mut stack = vec![i];
    while let Some(v) = stack.pop() {
        if v != i && s.contains(v) {
            continue;
        }
        out.insert(v);
        stack.extend_from_slice(inst.children(v));
    }
    out
}

/// The extreme point generated by `S`: each vertex takes the bound of
/// its deepest selected ascendant, rounded down when that ascendant has
/// a fractional bound whose child is still outside `S`.
pub fn extreme_point(inst: &ForestInstance, s: &VertexSet) -> Result<Point> {
    if !inst.property1_holds() {
        return Err(Error::AssumptionViolated(
            "extreme points need the single-child normalization".into(),
        ));
    }
    inst.check_assumption1()?;
    Ok(extreme_point_unchecked(inst, s))
}

pub(crate) fn extreme_point_unchecked(inst: &ForestInstance, s: &VertexSet) -> Point {
    let mut z = inst.zero_point();
    for i in 1..=inst.vertex_count() {
        let a = i_triangle(inst, s, i);
        if a == 0 {
            continue;
        }
        z[i] = if inst.in_psi(a) && !s.contains(inst.psi_child(a)) {
            floor_strict(inst.bound(a))
        } else {
            inst.bound(a)
        };
    }
    z
}

/// MIR rows, one per fractional-bound vertex `psi` with integer
/// descendants: `-z_ch + z_psi / (u - ⌊u⌋) <= ⌊u⌋ (⌈u⌉ - u) / (u - ⌊u⌋)`.
/// Under the single-child normalization this is one row per `psi`; on
/// raw instances each integer child yields a valid row of the same
/// shape.
pub fn mir_rows(inst: &ForestInstance) -> Vec<LinearCut> {
    let mut rows = Vec::with_capacity(inst.psi_set().len());
    for &psi in inst.psi_set() {
        let u = inst.bound(psi);
        let frac = u - floor_strict(u);
        for &ch in inst.children(psi) {
            if !inst.is_integer(ch) {
                continue;
            }
            let mut coeffs = vec![0.0; inst.vertex_count() + 1];
            coeffs[ch] = -1.0;
            coeffs[psi] = 1.0 / frac;
            rows.push(LinearCut {
                coeffs,
                rhs: floor_strict(u) * (ceil_weak(u) - u) / frac,
                tag: CutTag::Mir,
            });
        }
    }
    rows
}

/// Right-hand side of the MIR row for `psi`, as it appears in the dual
/// objective.
pub fn mir_rhs(inst: &ForestInstance, psi: Vertex) -> f64 {
    let u = inst.bound(psi);
    floor_strict(u) * (ceil_weak(u) - u) / (u - floor_strict(u))
}

/// The complete inequality description of the hull: upper bounds,
/// non-negativity, monotonicity, and MIR rows.
pub fn cz_rows(inst: &ForestInstance) -> Vec<LinearCut> {
    let n = inst.vertex_count();
    let mut rows = Vec::with_capacity(2 * n + inst.psi_set().len());
    for i in 1..=n {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[i] = 1.0;
        rows.push(LinearCut {
            coeffs,
            rhs: inst.bound(i),
            tag: CutTag::Box,
        });
    }
    for i in 1..=n {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[i] = -1.0;
        rows.push(LinearCut {
            coeffs,
            rhs: 0.0,
            tag: CutTag::NonNeg,
        });
    }
    for (i, j) in inst.arcs() {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[i] = 1.0;
        coeffs[j] = -1.0;
        rows.push(LinearCut {
            coeffs,
            rhs: 0.0,
            tag: CutTag::Monotone,
        });
    }
    rows.extend(mir_rows(inst));
    rows
}

/// Row-wise hull membership with absolute slack tolerance; returns the
/// indices of violated rows.
pub fn is_member_cz(inst: &ForestInstance, z: &Point, tolerance: f64) -> (bool, Vec<usize>) {
    let rows = cz_rows(inst);
    let violated: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row.slack(z) < -tolerance)
        .map(|(k, _)| k)
        .collect();
    (violated.is_empty(), violated)
}

/// Worst (most negative) row slack over the hull description.
pub fn membership_slack(inst: &ForestInstance, z: &Point) -> f64 {
    cz_rows(inst)
        .iter()
        .map(|row| row.slack(z))
        .fold(f64::INFINITY, f64::min)
}

/// Membership in the feasible set itself: box, monotonicity, and
/// integrality of the marked coordinates. The rounding rows are implied
/// for such points, so they need not be formed here.
pub fn is_feasible(inst: &ForestInstance, z: &Point, tolerance: f64) -> bool {
    let n = inst.vertex_count();
    let int_tol = tol::COORD_INTEGRALITY.max(tolerance);
    (1..=n).all(|v| z[v] >= -tolerance && z[v] <= inst.bound(v) + tolerance)
        && inst.arcs().all(|(i, j)| z[i] <= z[j] + tolerance)
        && inst
            .integer_vertices()
            .all(|v| (z[v] - z[v].round()).abs() <= int_tol)
}

/// Canonical key for an extreme point, used to deduplicate distinct
/// generating subsets that map to the same point.
pub fn canonical_point_key(z: &Point) -> Vec<i64> {
    crate::num::point_key(z)
}

/// Iterate all `2^n` generating subsets, guarded.
pub fn enumerate_subsets(
    inst: &ForestInstance,
    limit_bits: usize,
) -> Result<impl Iterator<Item = VertexSet> + '_> {
    let n = inst.vertex_count();
    if n > limit_bits || n > 63 {
        return Err(Error::TooLarge {
            size: n,
            limit: limit_bits,
        });
    }
    Ok((0u64..(1u64 << n)).map(move |mask| VertexSet::from_mask(n, mask)))
}

/// Check a point's integrality pattern directly (used in tests).
pub fn integral_on_marked(inst: &ForestInstance, z: &Point) -> bool {
    inst.integer_vertices().all(|v| is_integral(z[v]))
}
