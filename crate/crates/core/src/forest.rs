//! Instance model: a directed rooted forest with upper bounds and
//! integrality marks, plus the value oracle for the objective.
//!
//! Construction applies the safe normalizations up front (fractional
//! bounds on integer vertices are rounded down, non-positive or
//! order-violating bounds are rejected), so a built instance always
//! satisfies the basic well-formedness contract. The two structural
//! assumptions needed by the stronger results are checked on demand:
//!
//! * assumption 1: at most one fractional-bound vertex with integer
//!   descendants per directed path, and all its children integer;
//! * assumption 2: below such a vertex with bound above 1, every
//!   descendant bound equals the rounded-up bound.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::error::{Error, Result};
use crate::num::{ceil_weak, is_integral};
use crate::{Point, Vertex};

/// Validated instance. Immutable after construction; safe to share
/// across threads.
#[derive(Clone, Debug)]
pub struct ForestInstance {
    n: usize,
    /// Parent per vertex, 0 for roots. Index 0 unused.
    parent: Vec<usize>,
    children: Vec<Vec<Vertex>>,
    /// Bounds, with the sentinel `u[0] = 0`.
    u: Vec<f64>,
    integer: Vec<bool>,
    depth: Vec<usize>,
    /// Descendant lists including the vertex itself, ascending.
    descendants: Vec<Vec<Vertex>>,
    roots: Vec<Vertex>,
    psi: Vec<Vertex>,
    is_psi: Vec<bool>,
}

/// Why an assumption fails, with the offending vertices.
#[derive(Clone, Debug, PartialEq)]
pub enum AssumptionViolation {
    /// Two fractional-bound vertices with integer descendants on one
    /// directed path (given root-to-leaf as ancestor, descendant).
    TwoOnPath {
        ancestor: Vertex,
        descendant: Vertex,
    },
    /// A fractional-bound vertex with integer descendants has a
    /// continuous child.
    ContinuousChild { psi: Vertex, child: Vertex },
    /// A descendant bound differs from the rounded-up bound of its
    /// fractional-bound ancestor above 1.
    UnevenBoundBelow { psi: Vertex, vertex: Vertex },
}

impl std::fmt::Display for AssumptionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AssumptionViolation::TwoOnPath { ancestor, descendant } => write!(
                f,
                "vertices {ancestor} and {descendant} both have fractional bounds with integer descendants on one path"
            ),
            AssumptionViolation::ContinuousChild { psi, child } => {
                write!(f, "vertex {psi} has continuous child {child}")
            }
            AssumptionViolation::UnevenBoundBelow { psi, vertex } => {
                write!(f, "descendant {vertex} of {psi} does not carry the rounded-up bound")
            }
        }
    }
}

impl From<AssumptionViolation> for Error {
    fn from(v: AssumptionViolation) -> Error {
        Error::AssumptionViolated(v.to_string())
    }
}

/// Build a validated instance from raw inputs.
///
/// `upper_bounds` is in user coordinates (`len == vertex_count`);
/// non-finite entries are rejected here; see [`finitize_bounds`] for the
/// reduction from unbounded instances. Fractional bounds on integer
/// vertices are rounded down before the order checks.
pub fn build_instance(
    vertex_count: usize,
    arcs: &[(Vertex, Vertex)],
    upper_bounds: &[f64],
    integer_vertices: &[Vertex],
) -> Result<ForestInstance> {
    let (parent, children, roots, depth) = forest_shape(vertex_count, arcs)?;
    if upper_bounds.len() != vertex_count {
        return Err(Error::InvalidInput(format!(
            "expected {} bounds, got {}",
            vertex_count,
            upper_bounds.len()
        )));
    }
    let mut integer = vec![false; vertex_count + 1];
    for &v in integer_vertices {
        if v == 0 || v > vertex_count {
            return Err(Error::InvalidInput(format!(
                "integer vertex {v} out of range"
            )));
        }
        integer[v] = true;
    }

    let mut u = vec![0.0; vertex_count + 1];
    for v in 1..=vertex_count {
        let raw = upper_bounds[v - 1];
        if !raw.is_finite() {
            return Err(Error::InvalidInput(format!(
                "vertex {v} has non-finite bound; apply finitize_bounds first"
            )));
        }
        u[v] = if integer[v] && !is_integral(raw) {
            raw.floor()
        } else {
            raw
        };
        if u[v] <= 0.0 {
            return Err(Error::NonPositiveBound {
                vertex: v,
                bound: u[v],
            });
        }
    }
    for &(i, j) in arcs {
        if u[i] > u[j] {
            return Err(Error::NonMonotoneBounds {
                arc: (i, j),
                ui: u[i],
                uj: u[j],
            });
        }
    }

    Ok(ForestInstance::assemble(
        vertex_count,
        parent,
        children,
        roots,
        depth,
        u,
        integer,
    ))
}

fn forest_shape(
    n: usize,
    arcs: &[(Vertex, Vertex)],
) -> Result<(Vec<usize>, Vec<Vec<Vertex>>, Vec<Vertex>, Vec<usize>)> {
    if n == 0 {
        return Err(Error::InvalidInput("vertex count must be positive".into()));
    }
    let mut parent = vec![0usize; n + 1];
    let mut children = vec![Vec::new(); n + 1];
    for &(i, j) in arcs {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::InvalidInput(format!("arc ({i}, {j}) out of range")));
        }
        if i == j {
            return Err(Error::NotAForest(format!("self-loop at vertex {i}")));
        }
        if parent[j] != 0 {
            return Err(Error::NotAForest(format!("vertex {j} has two parents")));
        }
        parent[j] = i;
        children[i].push(j);
    }
    for ch in children.iter_mut() {
        ch.sort_unstable();
    }
    // With unique parents, any remaining defect is a directed cycle,
    // which shows up as a vertex unreachable from every root.
    let roots: Vec<Vertex> = (1..=n).filter(|&v| parent[v] == 0).collect();
    let mut depth = vec![usize::MAX; n + 1];
    let mut stack: Vec<Vertex> = roots.clone();
    for &r in &roots {
        depth[r] = 0;
    }
    let mut seen = roots.len();
    while let Some(v) = stack.pop() {
        for &c in &children[v] {
            depth[c] = depth[v] + 1;
            seen += 1;
            stack.push(c);
        }
    }
    if seen != n {
        return Err(Error::NotAForest("cycle detected".into()));
    }
    depth[0] = 0;
    Ok((parent, children, roots, depth))
}

impl ForestInstance {
    fn assemble(
        n: usize,
        parent: Vec<usize>,
        children: Vec<Vec<Vertex>>,
        roots: Vec<Vertex>,
        depth: Vec<usize>,
        u: Vec<f64>,
        integer: Vec<bool>,
    ) -> Self {
        let mut descendants = vec![Vec::new(); n + 1];
        // Vertices in decreasing depth so child lists are ready.
        let mut order: Vec<Vertex> = (1..=n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(depth[v]));
        for &v in &order {
            let mut d = vec![v];
            for &c in &children[v] {
                d.extend_from_slice(&descendants[c]);
            }
            d.sort_unstable();
            descendants[v] = d;
        }
        let mut inst = ForestInstance {
            n,
            parent,
            children,
            u,
            integer,
            depth,
            descendants,
            roots,
            psi: Vec::new(),
            is_psi: vec![false; n + 1],
        };
        for v in 1..=n {
            if !is_integral(inst.u[v]) && inst.descendants[v].iter().any(|&d| inst.integer[d]) {
                inst.psi.push(v);
                inst.is_psi[v] = true;
            }
        }
        inst
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn bound(&self, v: Vertex) -> f64 {
        self.u[v]
    }

    /// Bounds as a slice indexed by vertex, sentinel at 0.
    pub fn bounds(&self) -> &[f64] {
        &self.u
    }

    pub fn is_integer(&self, v: Vertex) -> bool {
        self.integer[v]
    }

    pub fn integer_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (1..=self.n).filter(move |&v| self.integer[v])
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        match self.parent[v] {
            0 => None,
            p => Some(p),
        }
    }

    /// Parent id with 0 for roots; convenient for the dual formulas.
    pub fn parent_or_zero(&self, v: Vertex) -> Vertex {
        self.parent[v]
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    pub fn depth(&self, v: Vertex) -> usize {
        self.depth[v]
    }

    pub fn roots(&self) -> &[Vertex] {
        &self.roots
    }

    pub fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (1..=self.n).filter_map(move |v| self.parent(v).map(|p| (p, v)))
    }

    /// Descendants of `v` including `v`, ascending.
    pub fn descendants(&self, v: Vertex) -> &[Vertex] {
        &self.descendants[v]
    }

    /// Ascendants of `v` including `v`, from `v` up to its root.
    pub fn ascendants(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Vertices with a fractional bound and at least one integer
    /// descendant, ascending. These are exactly the sources of MIR rows.
    pub fn psi_set(&self) -> &[Vertex] {
        &self.psi
    }

    pub fn in_psi(&self, v: Vertex) -> bool {
        self.is_psi[v]
    }

    /// The unique child of a psi vertex under the single-child
    /// normalization; callers must ensure [`Self::property1_holds`]
    /// first.
    pub fn psi_child(&self, psi: Vertex) -> Vertex {
        debug_assert!(self.is_psi[psi] && self.children[psi].len() == 1);
        self.children[psi][0]
    }

    /// Whether every psi vertex already has a single integer child with
    /// the rounded-up bound.
    pub fn property1_holds(&self) -> bool {
        self.psi.iter().all(|&p| {
            self.children[p].len() == 1 && {
                let c = self.children[p][0];
                self.integer[c] && self.u[c] == ceil_weak(self.u[p])
            }
        })
    }

    /// Check that no directed path holds two psi vertices and that every
    /// psi child is integer.
    pub fn check_assumption1(&self) -> std::result::Result<(), AssumptionViolation> {
        for &p in &self.psi {
            for &d in &self.descendants[p] {
                if d != p && self.is_psi[d] {
                    return Err(AssumptionViolation::TwoOnPath {
                        ancestor: p,
                        descendant: d,
                    });
                }
            }
            for &c in &self.children[p] {
                if !self.integer[c] {
                    return Err(AssumptionViolation::ContinuousChild { psi: p, child: c });
                }
            }
        }
        Ok(())
    }

    /// Check that below every psi vertex with bound above 1, all
    /// descendant bounds equal the rounded-up bound.
    pub fn check_assumption2(&self) -> std::result::Result<(), AssumptionViolation> {
        for &p in &self.psi {
            if self.u[p] <= 1.0 {
                continue;
            }
            let target = ceil_weak(self.u[p]);
            for &d in &self.descendants[p] {
                if d != p && self.u[d] != target {
                    return Err(AssumptionViolation::UnevenBoundBelow { psi: p, vertex: d });
                }
            }
        }
        Ok(())
    }

    /// Zero point in instance coordinates.
    pub fn zero_point(&self) -> Point {
        vec![0.0; self.n + 1]
    }

    /// Wrap user coordinates (`len == n`) into an instance point.
    pub fn point_from_user(&self, z: &[f64]) -> Result<Point> {
        if z.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates, got {}",
                self.n,
                z.len()
            )));
        }
        let mut full = Vec::with_capacity(self.n + 1);
        full.push(0.0);
        full.extend_from_slice(z);
        Ok(full)
    }
}

/// Strip the sentinel entry, exposing user coordinates.
pub fn user_coords(z: &[f64]) -> &[f64] {
    &z[1..]
}

// ---------------------------------------------------------------------
// Value oracles

/// Black-box objective evaluator, normalized so the zero vector maps to
/// zero. Evaluation takes instance points (sentinel included).
#[derive(Clone)]
pub struct ValueOracle {
    n: usize,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    base_value: f64,
}

impl ValueOracle {
    /// Wrap a raw objective over user coordinates (`len == n`). The value
    /// at the origin is captured and subtracted from every evaluation.
    pub fn new<F>(n: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let f = Arc::new(f);
        let base_value = f(&vec![0.0; n]);
        ValueOracle { n, f, base_value }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Raw value at the origin, subtracted internally.
    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    /// Normalized value at an instance point.
    pub fn value(&self, z: &Point) -> f64 {
        debug_assert_eq!(z.len(), self.n + 1);
        (self.f)(user_coords(z)) - self.base_value
    }

    /// Normalized value at user coordinates.
    pub fn value_user(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.n);
        (self.f)(z) - self.base_value
    }

    /// Wrap in a cache keyed by the point rounded to the canonical
    /// digit count; chain points recur heavily across cuts.
    pub fn memoized(&self) -> ValueOracle {
        let inner = self.clone();
        let cache: Mutex<HashMap<Vec<i64>, f64>> = Mutex::new(HashMap::new());
        ValueOracle::new(self.n, move |z| {
            let key = crate::num::point_key(z);
            if let Some(&v) = cache.lock().unwrap().get(&key) {
                return v;
            }
            let v = inner.value_user(z) + inner.base_value();
            cache.lock().unwrap().insert(key, v);
            v
        })
    }
}

impl std::fmt::Debug for ValueOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValueOracle")
            .field("n", &self.n)
            .field("base_value", &self.base_value)
            .finish()
    }
}

/// Quadratic objective `f(z) = z^T Q z + c^T z` with symmetric `Q`.
/// Entrywise non-positive `Q` is sufficient for DR-submodularity.
#[derive(Clone, Debug)]
pub struct QuadraticSpec {
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

impl QuadraticSpec {
    pub fn new(q: Vec<Vec<f64>>, c: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if q.len() != n || q.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("Q must be square and match c".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if (q[i][j] - q[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "Q not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(QuadraticSpec { q, c })
    }

    pub fn dimension(&self) -> usize {
        self.c.len()
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let n = self.c.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = self.c[i];
            for j in 0..n {
                row += self.q[i][j] * z[j];
            }
            acc += row * z[i];
        }
        acc
    }

    /// All entries non-positive, the exact criterion used instead of
    /// sampling.
    pub fn hessian_nonpositive(&self) -> bool {
        self.q.iter().flatten().all(|&x| x <= 0.0)
    }

    /// Worst (most positive) entry of `Q`.
    pub fn worst_entry(&self) -> f64 {
        self.q
            .iter()
            .flatten()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn oracle(&self) -> ValueOracle {
        let spec = self.clone();
        ValueOracle::new(self.dimension(), move |z| spec.eval(z))
    }
}

// ---------------------------------------------------------------------
// Normalizations

/// Result of the single-child normalization: the possibly extended
/// instance plus the vertex correspondence.
#[derive(Clone, Debug)]
pub struct ExtendedInstance {
    pub instance: ForestInstance,
    /// For each extended vertex, the original vertex it stands for, or 0
    /// for inserted ones. Index 0 unused.
    pub original_of: Vec<Vertex>,
    /// `(inserted, psi)` pairs in insertion order.
    pub inserted: Vec<(Vertex, Vertex)>,
}

impl ExtendedInstance {
    pub fn is_identity(&self) -> bool {
        self.inserted.is_empty()
    }

    /// Lift the original oracle to extended coordinates; inserted
    /// coordinates are ignored, which preserves DR-submodularity.
    pub fn lift_oracle(&self, oracle: &ValueOracle) -> ValueOracle {
        if self.is_identity() {
            return oracle.clone();
        }
        let keep: Vec<usize> = self
            .original_of
            .iter()
            .skip(1)
            .filter(|&&orig| orig != 0)
            .map(|&orig| orig - 1)
            .collect();
        // original_of maps extended -> original in increasing original
        // order for kept vertices, so a scatter restores user coords.
        let n_ext = self.instance.vertex_count();
        let n_orig = keep.len();
        let original_of = self.original_of.clone();
        let inner = oracle.clone();
        ValueOracle::new(n_ext, move |x| {
            let mut z = vec![0.0; n_orig];
            for (ext_idx, &orig) in original_of.iter().enumerate().skip(1) {
                if orig != 0 {
                    z[orig - 1] = x[ext_idx - 1];
                }
            }
            inner.value_user(&z) + inner.base_value()
        })
    }

    /// Project an extended feasible point back to original coordinates.
    pub fn map_solution_back(&self, x: &Point) -> Result<Point> {
        if x.len() != self.instance.vertex_count() + 1 {
            return Err(Error::InvalidInput("point length mismatch".into()));
        }
        let n_orig = self.original_of.iter().skip(1).filter(|&&o| o != 0).count();
        let mut z = vec![0.0; n_orig + 1];
        for (ext, &orig) in self.original_of.iter().enumerate().skip(1) {
            if orig != 0 {
                z[orig] = x[ext];
            }
        }
        Ok(z)
    }

    /// Embed an original feasible point, assigning each inserted vertex
    /// the rounded-up value of its fractional-bound parent.
    pub fn lift_solution(&self, z: &Point) -> Result<Point> {
        let n_orig = self.original_of.iter().skip(1).filter(|&&o| o != 0).count();
        if z.len() != n_orig + 1 {
            return Err(Error::InvalidInput("point length mismatch".into()));
        }
        let n_ext = self.instance.vertex_count();
        let mut x = vec![0.0; n_ext + 1];
        for (ext, &orig) in self.original_of.iter().enumerate().skip(1) {
            if orig != 0 {
                x[ext] = z[orig];
            }
        }
        for &(rho, psi_ext) in &self.inserted {
            let psi_orig = self.original_of[psi_ext];
            x[rho] = ceil_weak(z[psi_orig]);
        }
        Ok(x)
    }
}

/// Insert a single integer child with the rounded-up bound below every
/// psi vertex that does not already have one, rewiring its former
/// children below the new vertex. Requires assumption 1.
pub fn normalize_property1(inst: &ForestInstance) -> Result<ExtendedInstance> {
    inst.check_assumption1()?;

    let n = inst.n;
    let mut parent: Vec<usize> = inst.parent.clone();
    let mut children: Vec<Vec<Vertex>> = inst.children.clone();
    let mut u: Vec<f64> = inst.u.clone();
    let mut integer: Vec<bool> = inst.integer.clone();
    let mut original_of: Vec<Vertex> = (0..=n).collect();
    let mut inserted = Vec::new();

    let mut next = n;
    for &psi in &inst.psi {
        let already = inst.children[psi].len() == 1 && {
            let c = inst.children[psi][0];
            inst.integer[c] && inst.u[c] == ceil_weak(inst.u[psi])
        };
        if already {
            continue;
        }
        next += 1;
        let rho = next;
        parent.push(psi);
        let former = std::mem::take(&mut children[psi]);
        children.push(former);
        u.push(ceil_weak(u[psi]));
        integer.push(true);
        original_of.push(0);
        for &c in &children[rho] {
            parent[c] = rho;
        }
        children[psi] = vec![rho];
        inserted.push((rho, psi));
    }

    if inserted.is_empty() {
        return Ok(ExtendedInstance {
            instance: inst.clone(),
            original_of,
            inserted,
        });
    }

    let n_ext = next;
    let roots: Vec<Vertex> = (1..=n_ext).filter(|&v| parent[v] == 0).collect();
    let mut depth = vec![0usize; n_ext + 1];
    let mut stack: Vec<Vertex> = roots.clone();
    while let Some(v) = stack.pop() {
        for &c in &children[v] {
            depth[c] = depth[v] + 1;
            stack.push(c);
        }
    }
    let instance = ForestInstance::assemble(n_ext, parent, children, roots, depth, u, integer);
    debug_assert!(instance.property1_holds());
    Ok(ExtendedInstance {
        instance,
        original_of,
        inserted,
    })
}

/// Replace infinite bounds: below the topmost unbounded vertex, every
/// bound becomes the rounded-up parent bound; an unbounded root falls
/// back to `default_root_bound` and is reported. Sound only when the
/// minimization problem has a finite optimum, which the caller asserts.
pub fn finitize_bounds(
    vertex_count: usize,
    arcs: &[(Vertex, Vertex)],
    upper_bounds: &[f64],
    integer_vertices: &[Vertex],
    default_root_bound: f64,
) -> Result<(ForestInstance, Vec<Vertex>)> {
    let (parent, children, roots, _depth) = forest_shape(vertex_count, arcs)?;
    if upper_bounds.len() != vertex_count {
        return Err(Error::InvalidInput("bound vector length mismatch".into()));
    }
    let mut u: Vec<f64> = std::iter::once(0.0)
        .chain(upper_bounds.iter().cloned())
        .collect();
    let mut defaulted = Vec::new();
    let mut stack: Vec<Vertex> = roots.clone();
    while let Some(v) = stack.pop() {
        if !u[v].is_finite() {
            let replacement = match parent[v] {
                0 => {
                    defaulted.push(v);
                    default_root_bound
                }
                p => ceil_weak(u[p]),
            };
            // Bounds are monotone along arcs, so everything below v is
            // unbounded too and takes the same value.
            u[v] = replacement;
        }
        for &c in &children[v] {
            stack.push(c);
        }
    }
    defaulted.sort_unstable();
    let inst = build_instance(vertex_count, arcs, &u[1..], integer_vertices)?;
    Ok((inst, defaulted))
}

// ---------------------------------------------------------------------
// Numeric DR-submodularity check

/// Outcome of the sampled diminishing-returns check.
#[derive(Clone, Debug)]
pub struct DrCheckReport {
    pub passes: bool,
    /// Most negative observed margin; a DR-submodular function keeps
    /// this non-negative up to noise.
    pub worst_margin: f64,
    pub samples_used: usize,
}

/// Sample pairs `x <= y` in the feasible region's natural domain (the
/// continuous relaxation when any coordinate is continuous, the lattice
/// when all are integer) together with a coordinate and step keeping
/// both shifted points inside, and check that increments never grow
/// with the base point.
pub fn check_dr_submodularity(
    inst: &ForestInstance,
    oracle: &ValueOracle,
    samples: usize,
    tolerance: f64,
    rng: &mut impl Rng,
) -> Result<DrCheckReport> {
    let n = inst.vertex_count();
    let lattice_only = inst.integer_vertices().count() == n;
    let mut worst = f64::INFINITY;
    let mut used = 0;
    let mut attempts = 0;
    while used < samples && attempts < samples * 20 {
        attempts += 1;
        let mut y = random_relaxation_point(inst, rng);
        let mut x = random_dominated_point(inst, &y, rng);
        if lattice_only {
            // Rounding down preserves both dominance and monotonicity.
            for v in 1..=n {
                y[v] = y[v].floor();
                x[v] = x[v].floor();
            }
        }
        let i = rng.gen_range(1..=n);
        let mut alpha_max = (inst.bound(i) - y[i]).min(inst.bound(i) - x[i]);
        for &c in inst.children(i) {
            alpha_max = alpha_max.min(y[c] - y[i]).min(x[c] - x[i]);
        }
        if alpha_max <= if lattice_only { 1.0 - 1e-9 } else { 1e-9 } {
            continue;
        }
        let alpha = if lattice_only {
            rng.gen_range(1..=alpha_max.floor() as i64) as f64
        } else {
            rng.gen_range(0.0..1.0) * alpha_max
        };
        if alpha <= 0.0 {
            continue;
        }
        let shift = |mut z: Point| {
            z[i] += alpha;
            z
        };
        let fx = oracle.value(&x);
        let fy = oracle.value(&y);
        let fxs = oracle.value(&shift(x.clone()));
        let fys = oracle.value(&shift(y.clone()));
        for v in [fx, fy, fxs, fys] {
            if !v.is_finite() {
                return Err(Error::OracleEvaluationFailure("non-finite value".into()));
            }
        }
        let margin = (fxs - fx) - (fys - fy);
        worst = worst.min(margin);
        used += 1;
    }
    if used == 0 {
        worst = 0.0;
    }
    Ok(DrCheckReport {
        passes: worst >= -tolerance,
        worst_margin: worst,
        samples_used: used,
    })
}

/// Uniform-ish point in the continuous relaxation: sweep vertices
/// top-down, each coordinate uniform between its parent value and its
/// bound.
pub fn random_relaxation_point(inst: &ForestInstance, rng: &mut impl Rng) -> Point {
    let mut z = inst.zero_point();
    let mut order: Vec<Vertex> = (1..=inst.vertex_count()).collect();
    order.sort_by_key(|&v| inst.depth(v));
    for v in order {
        let lo = z[inst.parent_or_zero(v)];
        z[v] = lo + rng.gen_range(0.0..=1.0) * (inst.bound(v) - lo);
    }
    z
}

fn random_dominated_point(inst: &ForestInstance, y: &Point, rng: &mut impl Rng) -> Point {
    let mut x = inst.zero_point();
    let mut order: Vec<Vertex> = (1..=inst.vertex_count()).collect();
    order.sort_by_key(|&v| inst.depth(v));
    for v in order {
        let lo = x[inst.parent_or_zero(v)];
        let hi = y[v].max(lo);
        x[v] = lo + rng.gen_range(0.0..=1.0) * (hi - lo);
    }
    x
}
