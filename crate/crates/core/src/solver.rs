//! Cutting-plane minimization over the mixed-integer feasible set.
//!
//! The master problem minimizes the epigraph variable over the hull
//! rows plus a growing pool of epigraph cuts; exact separation either
//! certifies the incumbent or returns the most violated cut. Because
//! the hull description is complete, no branching is ever needed, and
//! the terminal relaxation point decomposes into a chain of feasible
//! points among which the best one attains the bound.

use std::time::{Duration, Instant};

use crate::bruteforce::{min_over_extreme_points, EnumerationBudget};
use crate::cuts::{separate_unchecked, DrCut};
use crate::error::{Error, Result};
use crate::forest::{check_dr_submodularity, normalize_property1, ForestInstance, ValueOracle};
use crate::hull::{cz_rows, is_feasible, CutTag};
use crate::lp::{solve_lp, DenseLP, LpStatus};
use crate::perm::decompose_with_tolerances;
use crate::set::VertexSet;
use crate::{tol, Point, Vertex};

/// What to do when bounds below a large fractional bound are uneven
/// (the flat-bounds requirement fails): refuse, or relax those bounds
/// upward and report a bound-only result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnevenBoundsPolicy {
    Error,
    RelaxAndBound,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Stop once the best cut violates by no more than this.
    pub epsilon: f64,
    /// Safety net on master iterations; `None` picks `10 * 2^min(n,12)`.
    pub max_iterations: Option<usize>,
    /// Seed the pool at the upper-bound corner instead of the origin.
    pub seed_at_bounds: bool,
    /// Run the sampled diminishing-returns check before solving.
    pub check_dr: bool,
    pub dr_samples: usize,
    pub uneven_bounds: UnevenBoundsPolicy,
    /// Budget for the exhaustive certification pass in degraded mode.
    pub budget: EnumerationBudget,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: tol::SEPARATION,
            max_iterations: None,
            seed_at_bounds: false,
            check_dr: false,
            dr_samples: 200,
            uneven_bounds: UnevenBoundsPolicy::Error,
            budget: EnumerationBudget::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Optimal within tolerance, with a feasible point attaining it.
    Optimal,
    /// Flat-bounds requirement failed; the master value is only a lower
    /// bound (obtained on a bound-relaxed instance).
    LowerBoundOnly,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Feasible minimizer (best feasible point found in degraded mode).
    pub point: Point,
    /// Objective value at `point`, normalized so the origin maps to 0.
    pub value: f64,
    /// Terminal master bound; a valid lower bound in every mode.
    pub master_bound: f64,
    pub iterations: usize,
    pub cuts_generated: usize,
    /// Chain index of the recovered minimizer in the final
    /// decomposition.
    pub recovery_index: usize,
    /// Violation of the last separated cut.
    pub final_violation: f64,
    /// Greedy order and weights of the final decomposition, kept as the
    /// recovery certificate.
    pub recovery_order: Vec<Vertex>,
    pub recovery_weights: Vec<f64>,
    /// Degraded mode only: bounds matched within tolerance, so `value`
    /// is exact despite the relaxation.
    pub certified_exact: bool,
    /// Final cut pool, kept for audit (each cut carries its generating
    /// permutation).
    pub cut_pool: Vec<DrCut>,
    pub wall_time: Duration,
}

/// Minimize a normalized DR-submodular oracle over the feasible set.
pub fn minimize(
    inst: &ForestInstance,
    oracle: &ValueOracle,
    options: &SolveOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    inst.check_assumption1()?;
    let ext = normalize_property1(inst)?;
    let work_inst = &ext.instance;
    let work_oracle = ext.lift_oracle(oracle).memoized();

    if options.check_dr {
        let mut rng = rand::thread_rng();
        let report = check_dr_submodularity(inst, oracle, options.dr_samples, 1e-7, &mut rng)?;
        if !report.passes {
            return Err(Error::NonDrSubmodular {
                violation: -report.worst_margin,
            });
        }
    }

    if work_inst.check_assumption2().is_err() {
        return match options.uneven_bounds {
            UnevenBoundsPolicy::Error => Err(work_inst.check_assumption2().unwrap_err().into()),
            UnevenBoundsPolicy::RelaxAndBound => {
                degraded_solve(&ext.instance, &work_oracle, options, start)
            }
        };
    }

    let loop_out = cutting_plane_loop(work_inst, &work_oracle, options)?;
    let recovery = recover(work_inst, &work_oracle, &loop_out)?;

    let point = ext.map_solution_back(&recovery.point)?;
    if !is_feasible(inst, &point, tol::MEMBERSHIP) {
        return Err(Error::NumericalFailure("recovered point infeasible".into()));
    }
    Ok(SolveReport {
        status: SolveStatus::Optimal,
        value: recovery.value,
        point,
        master_bound: loop_out.master_bound,
        iterations: loop_out.iterations,
        cuts_generated: loop_out.pool.len(),
        recovery_index: recovery.index,
        final_violation: loop_out.final_violation,
        recovery_order: recovery.order,
        recovery_weights: recovery.weights,
        certified_exact: true,
        cut_pool: loop_out.pool,
        wall_time: start.elapsed(),
    })
}

struct LoopOutcome {
    relaxation_point: Point,
    master_bound: f64,
    iterations: usize,
    final_violation: f64,
    pool: Vec<DrCut>,
}

fn cutting_plane_loop(
    inst: &ForestInstance,
    oracle: &ValueOracle,
    options: &SolveOptions,
) -> Result<LoopOutcome> {
    let n = inst.vertex_count();
    let cap = options
        .max_iterations
        .unwrap_or_else(|| 10usize.saturating_mul(1usize << n.min(12)));

    // An empty pool leaves the epigraph variable unbounded below; any
    // single cut closes it since the hull itself is compact.
    let seed_point = if options.seed_at_bounds {
        inst.bounds().to_vec()
    } else {
        inst.zero_point()
    };
    let mut pool: Vec<DrCut> = vec![separate_unchecked(inst, oracle, &seed_point)?];

    let hull_rows: Vec<_> = cz_rows(inst)
        .into_iter()
        .filter(|r| r.tag != CutTag::NonNeg)
        .collect();
    let mut lower = vec![0.0; n + 1];
    lower[n] = f64::NEG_INFINITY; // the epigraph variable
    let upper = vec![f64::INFINITY; n + 1];

    let mut last_bound = f64::NEG_INFINITY;
    for iteration in 1..=cap {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(hull_rows.len() + pool.len());
        let mut rhs = Vec::with_capacity(hull_rows.len() + pool.len());
        for r in &hull_rows {
            let mut row = r.coeffs[1..].to_vec();
            row.push(0.0);
            rows.push(row);
            rhs.push(r.rhs);
        }
        for cut in &pool {
            let mut row = cut.pi[1..].to_vec();
            row.push(-1.0);
            rows.push(row);
            rhs.push(0.0);
        }
        let mut objective = vec![0.0; n + 1];
        objective[n] = 1.0;
        let master = DenseLP {
            objective,
            rows,
            rhs,
            lower: lower.clone(),
            upper: upper.clone(),
        };
        let sol = solve_lp(&master)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::NumericalFailure(format!(
                "master relaxation came back {:?}",
                sol.status
            )));
        }
        let mut z = vec![0.0; n + 1];
        z[1..].copy_from_slice(&sol.x[..n]);
        let w = sol.x[n];
        debug_assert!(w >= last_bound - 1e-6);
        last_bound = last_bound.max(w);

        let cut = separate_unchecked(inst, oracle, &z)?;
        let violation = cut.violation(&z, w);
        if violation <= options.epsilon {
            return Ok(LoopOutcome {
                relaxation_point: z,
                master_bound: w,
                iterations: iteration,
                final_violation: violation,
                pool,
            });
        }
        if pool
            .iter()
            .any(|c| c.same_coefficients(&cut, tol::CUT_DEDUP))
        {
            return Err(Error::NumericalFailure(
                "separation repeated a pooled cut above tolerance".into(),
            ));
        }
        pool.push(cut);
    }
    Err(Error::IterationLimit { iterations: cap })
}

struct Recovery {
    point: Point,
    value: f64,
    index: usize,
    order: Vec<Vertex>,
    weights: Vec<f64>,
}

/// Evaluate the objective along the terminal decomposition's support
/// and take the best chain point; it meets the master bound up to the
/// separation tolerance.
fn recover(inst: &ForestInstance, oracle: &ValueOracle, out: &LoopOutcome) -> Result<Recovery> {
    let membership_band = tol::MEMBERSHIP.max(1e-8 * (1.0 + out.master_bound.abs()));
    let residual_band = tol::DECOMPOSITION.max(1e-8);
    let dec =
        decompose_with_tolerances(inst, &out.relaxation_point, membership_band, residual_band)?;
    // The origin is always a candidate: it is feasible and breaks
    // degenerate ties toward the canonical minimizer.
    let mut best: Option<(usize, f64)> = Some((0, oracle.value(&dec.points[0])));
    for k in dec.support() {
        let value = oracle.value(&dec.points[k]);
        match best {
            Some((_, bv)) if value >= bv => {}
            _ => best = Some((k, value)),
        }
    }
    let (index, value) = best.expect("weights sum to one");
    if value > out.master_bound + out.final_violation.max(0.0) + 1e-6 {
        return Err(Error::NumericalFailure(format!(
            "recovered value {value} exceeds master bound {}",
            out.master_bound
        )));
    }
    Ok(Recovery {
        point: dec.points[index].clone(),
        value,
        index,
        order: dec.permutation.order().to_vec(),
        weights: dec.weights.clone(),
    })
}

/// Bound-only fallback for uneven bounds: relax every fractional bound
/// upward (emptying the MIR set), solve the relaxation for a lower
/// bound, and certify against the exhaustive oracle when affordable.
fn degraded_solve(
    normalized: &ForestInstance,
    oracle: &ValueOracle,
    options: &SolveOptions,
    start: Instant,
) -> Result<SolveReport> {
    let n = normalized.vertex_count();
    let relaxed_bounds: Vec<f64> = (1..=n)
        .map(|v| {
            if normalized.in_psi(v) {
                crate::num::ceil_weak(normalized.bound(v))
            } else {
                normalized.bound(v)
            }
        })
        .collect();
    let arcs: Vec<_> = normalized.arcs().collect();
    let integer: Vec<Vertex> = normalized.integer_vertices().collect();
    let relaxed = crate::forest::build_instance(n, &arcs, &relaxed_bounds, &integer)?;

    let loop_out = cutting_plane_loop(&relaxed, oracle, options)?;
    let lower_bound = loop_out.master_bound;

    // Extreme points of the *original* hull are feasible, so the best
    // one is an upper bound; equality certifies the relaxation bound.
    let (point, value, certified) =
        match min_over_extreme_points(normalized, oracle, &options.budget) {
            Ok((s, value)) => {
                let p = crate::hull::extreme_point(normalized, &s)?;
                let certified = (value - lower_bound).abs() <= options.epsilon.max(1e-6);
                (p, value, certified)
            }
            Err(Error::BudgetExceeded(_)) => (normalized.zero_point(), 0.0, false),
            Err(e) => return Err(e),
        };

    Ok(SolveReport {
        status: SolveStatus::LowerBoundOnly,
        point,
        value,
        master_bound: lower_bound,
        iterations: loop_out.iterations,
        cuts_generated: loop_out.pool.len(),
        recovery_index: 0,
        final_violation: loop_out.final_violation,
        recovery_order: Vec::new(),
        recovery_weights: Vec::new(),
        certified_exact: certified,
        cut_pool: loop_out.pool,
        wall_time: start.elapsed(),
    })
}

/// Minimize a set function over subsets of `{1..n}` through the
/// all-binary specialization of the solver. The function is normalized
/// so the empty set maps to zero.
pub fn minimize_unconstrained_submodular<F>(set_function: F, n: usize) -> Result<(VertexSet, f64)>
where
    F: Fn(&VertexSet) -> f64 + Send + Sync + 'static,
{
    let inst = crate::forest::build_instance(n, &[], &vec![1.0; n], &(1..=n).collect::<Vec<_>>())?;
    let oracle = ValueOracle::new(n, move |z| {
        let set = VertexSet::from_vertices(
            z.len(),
            z.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.5)
                .map(|(i, _)| i + 1),
        );
        set_function(&set)
    });
    let report = minimize(&inst, &oracle, &SolveOptions::default())?;
    let set = VertexSet::from_vertices(n, (1..=n).filter(|&v| report.point[v] > 0.5));
    Ok((set, report.value))
}
