//! Independent enumeration oracles that certify the fast paths on small
//! instances, and the seeded random instance generator used throughout
//! the test suites. Deliberately simple: no pruning, no cleverness.

use rand::Rng;

use crate::cuts::{dr_cut, DrCut};
use crate::error::{Error, Result};
use crate::forest::{build_instance, normalize_property1, ForestInstance, ValueOracle};
use crate::hull::extreme_point;
use crate::num::{ceil_weak, is_integral};
use crate::perm::enumerate_valid_permutations;
use crate::set::VertexSet;
use crate::{Point, Vertex};

/// Caps on the exhaustive oracles.
#[derive(Clone, Copy, Debug)]
pub struct EnumerationBudget {
    pub max_subsets: u64,
    pub max_permutations: u64,
    pub max_lattice_points: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_subsets: 1 << 20,
            max_permutations: 1_000_000,
            max_lattice_points: 10_000_000,
        }
    }
}

/// Exact minimum of the objective over every extreme point `P(S)`.
pub fn min_over_extreme_points(
    inst: &ForestInstance,
    oracle: &ValueOracle,
    budget: &EnumerationBudget,
) -> Result<(VertexSet, f64)> {
    let n = inst.vertex_count();
    if n >= 63 || (1u64 << n) > budget.max_subsets {
        return Err(Error::BudgetExceeded(format!("2^{n} subsets")));
    }
    let mut best_value = f64::INFINITY;
    let mut best_set = VertexSet::empty(n);
    for mask in 0u64..(1u64 << n) {
        let s = VertexSet::from_mask(n, mask);
        let p = extreme_point(inst, &s)?;
        let v = oracle.value(&p);
        if v < best_value {
            best_value = v;
            best_set = s;
        }
    }
    Ok((best_set, best_value))
}

/// Minimum over the feasible grid: integer coordinates step by one,
/// continuous coordinates by `grid_step` (the upper bound itself is
/// always included). A lower-fidelity sanity net, not an exact oracle.
pub fn min_over_lattice(
    inst: &ForestInstance,
    oracle: &ValueOracle,
    grid_step: f64,
    budget: &EnumerationBudget,
) -> Result<(Point, f64)> {
    if grid_step <= 0.0 {
        return Err(Error::InvalidInput("grid step must be positive".into()));
    }
    let n = inst.vertex_count();
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    levels.push(vec![0.0]);
    let mut total: u64 = 1;
    for v in 1..=n {
        let u = inst.bound(v);
        let mut vals = Vec::new();
        if inst.is_integer(v) {
            let top = u.round() as i64;
            vals.extend((0..=top).map(|k| k as f64));
        } else {
            let mut x = 0.0;
            while x < u - 1e-12 {
                vals.push(x);
                x += grid_step;
            }
            vals.push(u);
        }
        total = total.saturating_mul(vals.len() as u64);
        if total > budget.max_lattice_points {
            return Err(Error::BudgetExceeded(format!("{total} grid points")));
        }
        levels.push(vals);
    }

    let mut index = vec![0usize; n + 1];
    let mut z = inst.zero_point();
    for v in 1..=n {
        z[v] = levels[v][0];
    }
    let mut best_value = f64::INFINITY;
    let mut best_point = z.clone();
    'outer: loop {
        let feasible = inst.arcs().all(|(i, j)| z[i] <= z[j] + 1e-12);
        if feasible {
            let val = oracle.value(&z);
            if val < best_value {
                best_value = val;
                best_point = z.clone();
            }
        }
        // Odometer increment.
        let mut v = n;
        loop {
            if v == 0 {
                break 'outer;
            }
            index[v] += 1;
            if index[v] < levels[v].len() {
                z[v] = levels[v][index[v]];
                break;
            }
            index[v] = 0;
            z[v] = levels[v][0];
            v -= 1;
        }
    }
    Ok((best_point, best_value))
}

/// Exhaustive separation: the most violated cut at `(z, w)` over every
/// valid permutation.
pub fn max_violation_over_permutations(
    inst: &ForestInstance,
    oracle: &ValueOracle,
    z: &Point,
    w: f64,
    budget: &EnumerationBudget,
) -> Result<(DrCut, f64)> {
    let memo = oracle.memoized();
    let mut best: Option<(DrCut, f64)> = None;
    let mut seen: u64 = 0;
    for perm in enumerate_valid_permutations(inst, 12)? {
        seen += 1;
        if seen > budget.max_permutations {
            return Err(Error::BudgetExceeded(format!("{seen} permutations")));
        }
        let cut = dr_cut(inst, &memo, &perm)?;
        let violation = cut.violation(z, w);
        match &best {
            Some((_, bv)) if violation <= *bv => {}
            _ => best = Some((cut, violation)),
        }
    }
    best.ok_or_else(|| Error::InvalidInput("no valid permutations".into()))
}

// ---------------------------------------------------------------------
// Random instances

/// Knobs for the instance generator. Repairs run in a fixed order:
/// integral bounds on integer vertices, then the per-path uniqueness of
/// fractional-bound vertices (by continuizing offending subtrees), then
/// optionally the flat-bounds condition below large fractional bounds,
/// then the single-child normalization.
#[derive(Clone, Copy, Debug)]
pub struct GeneratorConfig {
    pub root_probability: f64,
    pub integer_probability: f64,
    pub enforce_assumption2: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            root_probability: 0.3,
            integer_probability: 0.5,
            enforce_assumption2: true,
        }
    }
}

/// Random normalized instance with at most `max_vertices` vertices
/// (single-child insertions included in the count). Oversized draws are
/// retried with a smaller base; the final fallback always fits.
pub fn random_instance(
    rng: &mut impl Rng,
    max_vertices: usize,
    config: &GeneratorConfig,
) -> ForestInstance {
    assert!(max_vertices >= 3);
    let mut ceiling = max_vertices;
    loop {
        let inst = random_instance_base(rng, ceiling, config);
        if inst.vertex_count() <= max_vertices {
            return inst;
        }
        // Insertions add at most one vertex per two base vertices, so
        // this bound always terminates the retry loop.
        ceiling = ((2 * max_vertices) / 3).max(2).min(ceiling - 1);
    }
}

fn random_instance_base(
    rng: &mut impl Rng,
    base_max: usize,
    config: &GeneratorConfig,
) -> ForestInstance {
    let n = rng.gen_range(2..=base_max.max(2));

    let mut arcs: Vec<(Vertex, Vertex)> = Vec::new();
    let mut parent = vec![0usize; n + 1];
    for v in 2..=n {
        if rng.gen_bool(config.root_probability) {
            continue;
        }
        let p = rng.gen_range(1..v);
        parent[v] = p;
        arcs.push((p, v));
    }

    // Bounds from the small-rational menu, lifted to the parent's bound
    // when the draw lands below it.
    let mut u = vec![0.0f64; n + 1];
    for v in 1..=n {
        let frac = [0.0, 0.25, 0.5, 0.75][rng.gen_range(0..4)];
        let whole = if frac == 0.0 {
            rng.gen_range(1..=12)
        } else {
            rng.gen_range(0..=12)
        };
        let drawn = whole as f64 + frac;
        u[v] = if parent[v] != 0 {
            drawn.max(u[parent[v]])
        } else {
            drawn
        };
    }

    let mut integer = vec![false; n + 1];
    for v in 1..=n {
        integer[v] = rng.gen_bool(config.integer_probability);
    }
    // Integer vertices need integral bounds; drop the mark when rounding
    // down would cross the parent's bound.
    for v in 1..=n {
        if integer[v] && !is_integral(u[v]) {
            let floored = u[v].floor();
            if floored >= 1.0 && (parent[v] == 0 || floored >= u[parent[v]]) {
                u[v] = floored;
            } else {
                integer[v] = false;
            }
        }
    }

    // Per-path uniqueness of fractional-bound vertices with integer
    // descendants, and integer children below them. Repairs round the
    // offending fractional bound up (cascading the lift downward keeps
    // bounds monotone) or promote an integral-bound child to integer.
    let descendants_of = |v: Vertex, parent: &[usize]| -> Vec<Vertex> {
        (1..=n)
            .filter(|&j| {
                let mut cur = j;
                loop {
                    if cur == v {
                        return true;
                    }
                    if parent[cur] == 0 {
                        return false;
                    }
                    cur = parent[cur];
                }
            })
            .collect()
    };
    let lift_to_integral = |v: Vertex, u: &mut Vec<f64>, parent: &[usize]| {
        let target = ceil_weak(u[v]);
        for d in descendants_of(v, parent) {
            u[d] = u[d].max(target);
        }
        u[v] = target;
    };
    loop {
        let psi: Vec<Vertex> = (1..=n)
            .filter(|&v| {
                !is_integral(u[v]) && descendants_of(v, &parent).iter().any(|&d| integer[d])
            })
            .collect();
        enum Fix {
            RoundUp(Vertex),
            PromoteChild(Vertex),
        }
        let mut fix = None;
        'scan: for &a in &psi {
            for &d in &descendants_of(a, &parent) {
                if d != a && psi.contains(&d) {
                    fix = Some(Fix::RoundUp(d));
                    break 'scan;
                }
            }
            for c in 1..=n {
                if parent[c] == a && !integer[c] {
                    fix = Some(Fix::PromoteChild(c));
                    break 'scan;
                }
            }
        }
        match fix {
            None => break,
            Some(Fix::RoundUp(v)) => lift_to_integral(v, &mut u, &parent),
            Some(Fix::PromoteChild(c)) => {
                if !is_integral(u[c]) {
                    lift_to_integral(c, &mut u, &parent);
                }
                integer[c] = true;
            }
        }
    }

    if config.enforce_assumption2 {
        for v in 1..=n {
            if !is_integral(u[v])
                && u[v] > 1.0
                && descendants_of(v, &parent).iter().any(|&d| integer[d])
            {
                let target = ceil_weak(u[v]);
                for d in descendants_of(v, &parent) {
                    if d != v {
                        u[d] = target;
                    }
                }
            }
        }
    }

    let integer_list: Vec<Vertex> = (1..=n).filter(|&v| integer[v]).collect();
    let inst = build_instance(n, &arcs, &u[1..], &integer_list)
        .expect("generator invariants keep the instance buildable");
    normalize_property1(&inst)
        .expect("uniqueness repair ran")
        .instance
}

/// Objective with coefficients in `[-5, 5]`; with `steer` set, each
/// fractional-bound subtree is nudged toward a random one of the four
/// closed-form cases so all of them show up in bulk runs.
pub fn random_objective(inst: &ForestInstance, rng: &mut impl Rng, steer: bool) -> Vec<f64> {
    let n = inst.vertex_count();
    let mut a = vec![0.0; n + 1];
    for v in 1..=n {
        a[v] = rng.gen_range(-5.0..5.0);
    }
    if !steer {
        return a;
    }
    for &psi in inst.psi_set() {
        if !rng.gen_bool(0.85) {
            continue;
        }
        let rho = inst.psi_child(psi);
        let frac = inst.bound(psi) - inst.bound(psi).floor();
        match rng.gen_range(0..4) {
            0 => {
                // Everything non-negative below: nothing switches on.
                a[psi] = a[psi].abs();
                for &j in inst.descendants(rho) {
                    a[j] = a[j].abs();
                }
            }
            1 => {
                // Positive mass T below with a_psi in [-T/frac, -T).
                for &j in inst.descendants(rho) {
                    a[j] = a[j].abs();
                }
                a[rho] += 0.5;
                let t: f64 = inst.descendants(rho).iter().map(|&j| a[j]).sum();
                a[psi] = -(t / frac + t) / 2.0;
            }
            2 => {
                // Small positive mass with a_psi below -T/frac.
                for &j in inst.descendants(rho) {
                    a[j] = a[j].abs();
                }
                let t: f64 = inst.descendants(rho).iter().map(|&j| a[j]).sum();
                a[psi] = -(t / frac) - rng.gen_range(0.1..2.0);
            }
            _ => {
                // Child mass negative: the child switches on by itself.
                a[rho] = -a[rho].abs() - 0.25;
                for &j in inst.descendants(rho) {
                    if j != rho {
                        a[j] = -a[j].abs();
                    }
                }
            }
        }
    }
    a
}

/// Random hull member: a convex combination of a few random extreme
/// points.
pub fn random_hull_point(inst: &ForestInstance, rng: &mut impl Rng, max_atoms: usize) -> Point {
    let n = inst.vertex_count();
    let atoms = rng.gen_range(1..=max_atoms.max(1));
    let mut weights: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let mut z = inst.zero_point();
    for &w in &weights {
        let mut s = VertexSet::empty(n);
        for v in 1..=n {
            if rng.gen_bool(0.5) {
                s.insert(v);
            }
        }
        let p = extreme_point(inst, &s).expect("generator instances are normalized");
        for v in 1..=n {
            z[v] += w * p[v];
        }
    }
    z
}

/// Random DR-submodular quadratic (entrywise non-positive second-order
/// part) over the instance's coordinates.
pub fn random_dr_quadratic(
    inst: &ForestInstance,
    rng: &mut impl Rng,
) -> crate::forest::QuadraticSpec {
    let n = inst.vertex_count();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            // Sparse couplings keep values in a sane range.
            if i == j || rng.gen_bool(0.4) {
                let v = -rng.gen_range(0.0..1.0);
                q[i][j] = v;
                q[j][i] = v;
            }
        }
    }
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    crate::forest::QuadraticSpec::new(q, c).expect("symmetric by construction")
}
