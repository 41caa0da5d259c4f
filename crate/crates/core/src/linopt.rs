//! Combinatorial linear optimization `min a^T z` over the hull of the
//! feasible set, with an explicit optimal extreme point and a
//! closed-form dual certificate.
//!
//! The solve walks each tree bottom-up accumulating `s`-values (the
//! objective mass a vertex would switch on), first over each subtree
//! rooted at a fractional-bound vertex, where one of four closed-form
//! cases applies, then over what remains of the tree after the
//! committed subtrees are deleted.

use crate::error::{Error, Result};
use crate::forest::ForestInstance;
use crate::hull::{extreme_point, membership_slack, mir_rhs};
use crate::num::floor_strict;
use crate::set::VertexSet;
use crate::{tol, Point, Vertex};

/// Multipliers certifying optimality over the hull: `p` per box row,
/// `q` per monotonicity row (keyed by the arc's child), `r` per MIR row
/// (keyed by the fractional-bound vertex). All non-positive at a valid
/// certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub p: Vec<f64>,
    pub q_in: Vec<f64>,
    pub r: Vec<f64>,
}

impl DualCertificate {
    pub fn zero(inst: &ForestInstance) -> Self {
        let len = inst.vertex_count() + 1;
        DualCertificate {
            p: vec![0.0; len],
            q_in: vec![0.0; len],
            r: vec![0.0; len],
        }
    }

    pub fn dual_objective(&self, inst: &ForestInstance) -> f64 {
        let mut obj = 0.0;
        for v in 1..=inst.vertex_count() {
            obj += inst.bound(v) * self.p[v];
        }
        for &psi in inst.psi_set() {
            obj += mir_rhs(inst, psi) * self.r[psi];
        }
        obj
    }

    fn absorb(&mut self, other: &DualCertificate) {
        for v in 0..self.p.len() {
            self.p[v] += other.p[v];
            self.q_in[v] += other.q_in[v];
            self.r[v] += other.r[v];
        }
    }
}

/// Which closed-form dual applied on a fractional-bound subtree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubtreeCase {
    C1,
    C2,
    C3,
    C4,
}

/// Snap tiny values so strict-sign decisions are stable.
fn snap(x: f64) -> f64 {
    if x.abs() <= tol::S_VALUE_TIE {
        0.0
    } else {
        x
    }
}

/// Objective mass attached to `i` against the running set: the sum of
/// `a_j` over descendants of `i` (inside `members`, when given) not cut
/// off by a deeper member of `s_next`.
fn s_value(
    inst: &ForestInstance,
    a: &[f64],
    s_next: &VertexSet,
    i: Vertex,
    members: Option<&VertexSet>,
) -> f64 {
    let mut picked = Vec::new();
    let mut stack = vec![i];
    while let Some(v) = stack.pop() {
        if let Some(m) = members {
            if !m.contains(v) {
                continue;
            }
        }
        if v != i && s_next.contains(v) {
            continue;
        }
        picked.push(v);
        stack.extend_from_slice(inst.children(v));
    }
    picked.sort_unstable();
    picked.iter().map(|&v| a[v]).sum()
}

/// `s`-values for every vertex at the requested depth, against `s_next`.
pub fn s_values(
    inst: &ForestInstance,
    a: &[f64],
    s_next: &VertexSet,
    depth: usize,
) -> Vec<(Vertex, f64)> {
    (1..=inst.vertex_count())
        .filter(|&v| inst.depth(v) == depth)
        .map(|v| (v, s_value(inst, a, s_next, v, None)))
        .collect()
}

/// Fold the level sets from `from_depth` down to `to_depth` inclusive,
/// restricted to `members`; returns the final cumulative set and the
/// `s`-value of every processed vertex.
fn fold_levels(
    inst: &ForestInstance,
    a: &[f64],
    members: &VertexSet,
    depth_of: impl Fn(Vertex) -> usize,
    from_depth: usize,
    to_depth: usize,
    s_out: &mut [f64],
) -> VertexSet {
    debug_assert!(from_depth >= to_depth);
    let mut running = VertexSet::empty(inst.vertex_count());
    let mut d = from_depth;
    loop {
        for v in members.iter() {
            if depth_of(v) == d {
                let s = s_value(inst, a, &running, v, Some(members));
                s_out[v] = s;
                if snap(s) < 0.0 {
                    running.insert(v);
                }
            }
        }
        if d == to_depth {
            break;
        }
        d -= 1;
    }
    running
}

/// Solve the subtree rooted at a fractional-bound vertex, returning the
/// generating set, the matching closed-form dual (entries only on the
/// subtree), and the case that applied.
pub fn solve_subtree_psi(
    inst: &ForestInstance,
    a: &[f64],
    psi: Vertex,
) -> Result<(VertexSet, DualCertificate, SubtreeCase)> {
    if !inst.in_psi(psi) {
        return Err(Error::NotAPsiRoot(psi));
    }
    let n = inst.vertex_count();
    let members = VertexSet::from_vertices(n, inst.descendants(psi).iter().copied());
    let base_depth = inst.depth(psi);
    let rdepth = |v: Vertex| inst.depth(v) - base_depth;
    let height = inst
        .descendants(psi)
        .iter()
        .map(|&v| rdepth(v))
        .max()
        .unwrap();
    let rho = inst.psi_child(psi);

    let mut s = vec![0.0; n + 1];
    let s2 = if height >= 2 {
        fold_levels(inst, a, &members, rdepth, height, 2, &mut s)
    } else {
        VertexSet::empty(n)
    };
    s[rho] = s_value(inst, a, &s2, rho, Some(&members));
    let mut s1 = s2.clone();
    if snap(s[rho]) < 0.0 {
        s1.insert(rho);
    }
    s[psi] = s_value(inst, a, &s1, psi, Some(&members));

    let a_psi = snap(a[psi]);
    let sum_r = if a_psi < 0.0 { a[psi] } else { 0.0 };
    let frac = inst.bound(psi) - floor_strict(inst.bound(psi));
    let minus_s_rho = -snap(s[rho]);

    let mut s_star = s2.clone();
    let case = if minus_s_rho <= snap(sum_r) {
        SubtreeCase::C1
    } else if minus_s_rho <= snap(frac * sum_r) {
        s_star.insert(psi);
        SubtreeCase::C2
    } else if minus_s_rho <= 0.0 {
        s_star.insert(psi);
        s_star.insert(rho);
        SubtreeCase::C3
    } else {
        if a_psi < 0.0 {
            s_star.insert(psi);
        }
        s_star.insert(rho);
        SubtreeCase::C4
    };

    let mut cert = DualCertificate::zero(inst);
    match case {
        SubtreeCase::C1 | SubtreeCase::C4 => {
            for v in s_star.iter() {
                cert.p[v] = s[v];
            }
            for &v in inst.descendants(psi) {
                if v != psi && !s_star.contains(v) {
                    cert.q_in[v] = -s[v];
                }
            }
        }
        SubtreeCase::C2 => {
            // The middle case only arises with non-negative child mass
            // that the root coefficient overwhelms.
            debug_assert!(snap(s[rho]) >= 0.0);
            debug_assert!(snap(a[psi] + s[rho]) < 0.0 || snap(s[rho]) == 0.0);
            for v in s2.iter() {
                cert.p[v] = s[v];
            }
            let ceil_minus = inst.bound(rho) - inst.bound(psi); // ceil(u) - u
            cert.r[psi] = frac / ceil_minus * (a[psi] + s[rho]);
            cert.q_in[rho] = -s[rho] - cert.r[psi];
            for &v in inst.descendants(psi) {
                if v != psi && v != rho && !s_star.contains(v) {
                    cert.q_in[v] = -s[v];
                }
            }
        }
        SubtreeCase::C3 => {
            for v in s2.iter() {
                cert.p[v] = s[v];
            }
            cert.p[rho] = frac * a[psi] + s[rho];
            cert.r[psi] = frac * a[psi];
            for &v in inst.descendants(psi) {
                if v != psi && !s_star.contains(v) {
                    cert.q_in[v] = -s[v];
                }
            }
        }
    }
    Ok((s_star, cert, case))
}

/// Solve one component: commit every fractional-bound subtree, delete
/// what they switched on, and run the level recursion on the remainder.
pub fn solve_tree(
    inst: &ForestInstance,
    a: &[f64],
    root: Vertex,
) -> Result<(VertexSet, DualCertificate, Vec<(Vertex, SubtreeCase)>)> {
    let n = inst.vertex_count();
    if inst.in_psi(root) {
        let (s_star, cert, case) = solve_subtree_psi(inst, a, root)?;
        return Ok((s_star, cert, vec![(root, case)]));
    }
    let component = inst.descendants(root);
    let psis: Vec<Vertex> = component
        .iter()
        .copied()
        .filter(|&v| inst.in_psi(v))
        .collect();

    let mut cert = DualCertificate::zero(inst);
    let mut s_star = VertexSet::empty(n);
    let mut cases = Vec::new();
    let mut removed = VertexSet::empty(n);
    for &psi in &psis {
        let (sub_star, sub_cert, case) = solve_subtree_psi(inst, a, psi)?;
        cases.push((psi, case));
        for v in sub_star.iter() {
            s_star.insert(v);
            for &d in inst.descendants(v) {
                removed.insert(d);
            }
        }
        cert.absorb(&sub_cert);
    }

    let mut remainder = VertexSet::empty(n);
    for &v in component {
        if !removed.contains(v) {
            remainder.insert(v);
        }
    }
    let height = remainder.iter().map(|v| inst.depth(v)).max().unwrap_or(0);
    let mut s = vec![0.0; n + 1];
    let s0 = fold_levels(
        inst,
        a,
        &remainder,
        |v| inst.depth(v),
        height,
        inst.depth(root),
        &mut s,
    );

    for v in remainder.iter() {
        cert.p[v] = if s0.contains(v) { s[v] } else { 0.0 };
        if v != root {
            // The parent of a remaining vertex always remains too.
            cert.q_in[v] = if s0.contains(v) { 0.0 } else { -s[v] };
        }
        if inst.in_psi(v) {
            cert.r[v] = 0.0;
        }
        if s0.contains(v) {
            s_star.insert(v);
        }
    }
    Ok((s_star, cert, cases))
}

/// Outcome of a full forest solve.
#[derive(Clone, Debug)]
pub struct ForestSolve {
    pub generating_set: VertexSet,
    pub point: Point,
    pub objective: f64,
    pub certificate: DualCertificate,
    /// Case taken on each fractional-bound subtree, in vertex order.
    pub cases: Vec<(Vertex, SubtreeCase)>,
}

/// `min a^T z` over the hull: components solve independently and
/// concatenate. The objective is indexed by vertex (entry 0 ignored).
pub fn solve_forest(inst: &ForestInstance, a: &[f64]) -> Result<ForestSolve> {
    if a.len() != inst.vertex_count() + 1 {
        return Err(Error::InvalidInput(
            "objective must use instance indexing".into(),
        ));
    }
    inst.check_assumption1()?;
    if !inst.property1_holds() {
        return Err(Error::AssumptionViolated(
            "single-child normalization required".into(),
        ));
    }
    let mut s_star = VertexSet::empty(inst.vertex_count());
    let mut cert = DualCertificate::zero(inst);
    let mut cases = Vec::new();
    for &root in inst.roots() {
        let (s, c, mut tags) = solve_tree(inst, a, root)?;
        for v in s.iter() {
            s_star.insert(v);
        }
        cert.absorb(&c);
        cases.append(&mut tags);
    }
    cases.sort_by_key(|&(v, _)| v);
    let point = extreme_point(inst, &s_star)?;
    let objective = a.iter().zip(&point).map(|(ai, zi)| ai * zi).sum();
    Ok(ForestSolve {
        generating_set: s_star,
        point,
        objective,
        certificate: cert,
        cases,
    })
}

/// Build an objective whose unique combinatorial solve lands exactly on
/// the generating set `target`: selected vertices get enough negative
/// mass to switch on, everything else pulls upward. Fractional-bound
/// vertices whose child stays off are steered through the narrow middle
/// case.
pub fn objective_selecting(inst: &ForestInstance, target: &VertexSet) -> Vec<f64> {
    let n = inst.vertex_count();
    let mut a = vec![0.0; n + 1];
    let mut order: Vec<Vertex> = (1..=n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(inst.depth(v)));
    for &v in &order {
        if !target.contains(v) {
            a[v] = 1.0;
            continue;
        }
        // Positive mass visible from v: descendants not blocked by a
        // deeper selected vertex.
        let mut blocked_below = VertexSet::empty(n);
        for &d in inst.descendants(v) {
            if d != v && target.contains(d) && inst.depth(d) > inst.depth(v) {
                blocked_below.insert(d);
            }
        }
        let visible = s_value(inst, &a, &blocked_below, v, None); // a[v] still 0
        if inst.in_psi(v) && !target.contains(inst.psi_child(v)) {
            // Middle case: a_psi in [-s_rho / frac, -s_rho).
            let frac = inst.bound(v) - floor_strict(inst.bound(v));
            let s_rho = s_value(inst, &a, &blocked_below, inst.psi_child(v), None);
            a[v] = -(s_rho / frac + s_rho) / 2.0;
        } else {
            a[v] = -visible - 1.0;
        }
    }
    a
}

/// Check a primal-dual pair: hull membership of the point, sign and row
/// feasibility of the multipliers, and agreement of the two objectives.
/// Returns the worst residual alongside the verdict.
pub fn verify_certificate(
    inst: &ForestInstance,
    a: &[f64],
    z: &Point,
    cert: &DualCertificate,
    tolerance: f64,
) -> (bool, f64) {
    let mut residual: f64 = 0.0;

    residual = residual.max(-membership_slack(inst, z));

    for v in 1..=inst.vertex_count() {
        residual = residual.max(cert.p[v]).max(cert.q_in[v]).max(cert.r[v]);
    }

    for i in 1..=inst.vertex_count() {
        let q_out: f64 = inst.children(i).iter().map(|&c| cert.q_in[c]).sum();
        let lhs = if inst.in_psi(i) {
            let rho = inst.psi_child(i);
            let frac = inst.bound(i) - floor_strict(inst.bound(i));
            cert.p[i] + cert.q_in[rho] - cert.q_in[i] + cert.r[i] / frac
        } else if inst.parent(i).map(|p| inst.in_psi(p)).unwrap_or(false) {
            let psi = inst.parent(i).unwrap();
            cert.p[i] + q_out - cert.q_in[i] - cert.r[psi]
        } else {
            cert.p[i] + q_out - cert.q_in[i]
        };
        residual = residual.max(lhs - a[i]);
    }

    let primal: f64 = a.iter().zip(z).map(|(ai, zi)| ai * zi).sum();
    residual = residual.max((primal - cert.dual_objective(inst)).abs());

    (residual <= tolerance, residual)
}
