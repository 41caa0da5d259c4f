//! Small dense linear-program solver: two-phase revised simplex with a
//! dense LU factorization of the basis, Dantzig pricing, and a switch to
//! Bland's rule after a run of degenerate pivots. Problem sizes here are
//! tiny (at most a few hundred rows), which makes refactorizing the
//! basis every iteration both simple and numerically clean.

use crate::error::{Error, Result};
use crate::forest::ForestInstance;
use crate::hull::{cz_rows, CutTag};
use crate::linopt::DualCertificate;
use crate::{tol, Point};

/// `min c^T x` subject to `A x <= b` and `l <= x <= h`, where entries of
/// `l` may be `-inf` and entries of `h` may be `+inf`.
#[derive(Clone, Debug)]
pub struct DenseLP {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Basic optimal point (empty unless optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per input row, non-positive for `<=` rows of a
    /// minimization (empty unless optimal).
    pub row_duals: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-11;
const BLAND_TRIGGER: usize = 50;

pub fn solve_lp(lp: &DenseLP) -> Result<LpSolution> {
    let nv = lp.objective.len();
    if lp.lower.len() != nv || lp.upper.len() != nv {
        return Err(Error::InvalidInput(
            "bound vectors must match objective length".into(),
        ));
    }
    for (r, row) in lp.rows.iter().enumerate() {
        if row.len() != nv {
            return Err(Error::InvalidInput(format!("row {r} has wrong width")));
        }
    }
    if lp.rows.len() != lp.rhs.len() {
        return Err(Error::InvalidInput(
            "rhs length must match row count".into(),
        ));
    }

    let std_form = StandardForm::build(lp)?;
    let mut core = SimplexCore::new(std_form);
    match core.run()? {
        RawStatus::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NAN,
            row_duals: Vec::new(),
        }),
        RawStatus::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
            row_duals: Vec::new(),
        }),
        RawStatus::Optimal => {
            let sol = core.extract(lp)?;
            validate(lp, &sol)?;
            Ok(sol)
        }
    }
}

fn validate(lp: &DenseLP, sol: &LpSolution) -> Result<()> {
    let scale = 1.0 + sol.objective.abs();
    for (r, row) in lp.rows.iter().enumerate() {
        let ax: f64 = row.iter().zip(&sol.x).map(|(a, x)| a * x).sum();
        let slack = lp.rhs[r] - ax;
        if slack < -tol::LP_RESIDUAL * scale {
            return Err(Error::NumericalFailure(format!(
                "primal residual {:.3e} on row {r}",
                -slack
            )));
        }
        if sol.row_duals[r] > tol::LP_RESIDUAL {
            return Err(Error::NumericalFailure(format!("dual sign on row {r}")));
        }
        let cs = sol.row_duals[r] * slack;
        if cs.abs() > tol::LP_COMPLEMENTARITY * scale {
            return Err(Error::NumericalFailure(format!(
                "complementary slackness {:.3e} on row {r}",
                cs.abs()
            )));
        }
    }
    for (j, &x) in sol.x.iter().enumerate() {
        if x < lp.lower[j] - tol::LP_RESIDUAL * scale || x > lp.upper[j] + tol::LP_RESIDUAL * scale
        {
            return Err(Error::NumericalFailure(format!(
                "bound residual on variable {j}"
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Standard form: min cost^T y, E y = d with d >= 0, y >= 0.

#[derive(Clone, Copy, Debug)]
enum VarKind {
    /// `x = base + y_col`
    Shift { col: usize, base: f64 },
    /// `x = base - y_col`
    Mirror { col: usize, base: f64 },
    /// `x = y_pos - y_neg`
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    m: usize,
    /// Structural + slack columns; artificials are appended by the core.
    n_real: usize,
    /// Row-major `m x n_real`.
    e: Vec<Vec<f64>>,
    d: Vec<f64>,
    cost: Vec<f64>,
    /// Sign applied to each row's multiplier when mapping back (1 or -1).
    flip: Vec<f64>,
    orig_rows: usize,
    var_map: Vec<VarKind>,
}

impl StandardForm {
    fn build(lp: &DenseLP) -> Result<StandardForm> {
        let nv = lp.objective.len();
        let mut var_map = Vec::with_capacity(nv);
        let mut ncols = 0usize;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new(); // (col, cap)
        for j in 0..nv {
            let (l, h) = (lp.lower[j], lp.upper[j]);
            if l > h {
                return Err(Error::InvalidInput(format!(
                    "empty bound interval on variable {j}"
                )));
            }
            if l.is_finite() {
                let col = ncols;
                ncols += 1;
                var_map.push(VarKind::Shift { col, base: l });
                if h.is_finite() {
                    bound_rows.push((col, h - l));
                }
            } else if h.is_finite() {
                let col = ncols;
                ncols += 1;
                var_map.push(VarKind::Mirror { col, base: h });
            } else {
                let pos = ncols;
                let neg = ncols + 1;
                ncols += 2;
                var_map.push(VarKind::Split { pos, neg });
            }
        }

        let orig_rows = lp.rows.len();
        let m = orig_rows + bound_rows.len();
        let n_real = ncols + m; // one slack per row

        let mut e = vec![vec![0.0; n_real]; m];
        let mut d = vec![0.0; m];
        let mut flip = vec![1.0; m];
        let mut cost = vec![0.0; n_real];

        for j in 0..nv {
            let cj = lp.objective[j];
            match var_map[j] {
                VarKind::Shift { col, .. } => cost[col] = cj,
                VarKind::Mirror { col, .. } => cost[col] = -cj,
                VarKind::Split { pos, neg } => {
                    cost[pos] = cj;
                    cost[neg] = -cj;
                }
            }
        }

        for r in 0..orig_rows {
            let mut rhs = lp.rhs[r];
            for j in 0..nv {
                let a = lp.rows[r][j];
                if a == 0.0 {
                    continue;
                }
                match var_map[j] {
                    VarKind::Shift { col, base } => {
                        e[r][col] = a;
                        rhs -= a * base;
                    }
                    VarKind::Mirror { col, base } => {
                        e[r][col] = -a;
                        rhs -= a * base;
                    }
                    VarKind::Split { pos, neg } => {
                        e[r][pos] = a;
                        e[r][neg] = -a;
                    }
                }
            }
            e[r][ncols + r] = 1.0; // slack
            d[r] = rhs;
        }
        for (k, &(col, cap)) in bound_rows.iter().enumerate() {
            let r = orig_rows + k;
            e[r][col] = 1.0;
            e[r][ncols + r] = 1.0;
            d[r] = cap;
        }
        for r in 0..m {
            if d[r] < 0.0 {
                for v in e[r].iter_mut() {
                    *v = -*v;
                }
                d[r] = -d[r];
                flip[r] = -1.0;
            }
        }
        Ok(StandardForm {
            m,
            n_real,
            e,
            d,
            cost,
            flip,
            orig_rows,
            var_map,
        })
    }
}

enum RawStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

struct SimplexCore {
    sf: StandardForm,
    /// Column indices of the basis, one per row. Artificial columns have
    /// index `>= sf.n_real`.
    basis: Vec<usize>,
    x_basic: Vec<f64>,
    duals: Vec<f64>,
}

impl SimplexCore {
    fn new(sf: StandardForm) -> Self {
        let m = sf.m;
        let basis: Vec<usize> = (0..m).map(|r| sf.n_real + r).collect();
        let x_basic = sf.d.clone();
        SimplexCore {
            sf,
            basis,
            x_basic,
            duals: vec![0.0; m],
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let m = self.sf.m;
        if j >= self.sf.n_real {
            let mut col = vec![0.0; m];
            col[j - self.sf.n_real] = 1.0;
            col
        } else {
            (0..m).map(|r| self.sf.e[r][j]).collect()
        }
    }

    fn factorize(&self) -> Result<Lu> {
        let m = self.sf.m;
        let mut b = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            let col = self.column(j);
            for r in 0..m {
                b[r * m + k] = col[r];
            }
        }
        Lu::factor(m, b)
    }

    /// One simplex phase; `phase1` prices artificial infeasibility.
    fn phase(&mut self, phase1: bool) -> Result<RawStatus> {
        let m = self.sf.m;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let max_iters = 10_000 + 100 * (m + self.sf.n_real);
        for _ in 0..max_iters {
            let lu = self.factorize()?;
            let mut xb = lu.solve(&self.sf.d);
            self.refine(&lu, &mut xb);
            self.x_basic = xb;

            let cb: Vec<f64> = self
                .basis
                .iter()
                .map(|&j| self.cost_of(j, phase1))
                .collect();
            let y = lu.solve_transpose(&cb);
            self.duals = y.clone();

            // Pricing over non-basic structural and slack columns;
            // artificial columns never re-enter.
            let mut in_basis = vec![false; self.sf.n_real + m];
            for &j in &self.basis {
                in_basis[j] = true;
            }
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.sf.n_real {
                if in_basis[j] {
                    continue;
                }
                let col = self.column(j);
                let reduced = self.cost_of(j, phase1) - dot(&y, &col);
                if reduced < -COST_TOL {
                    match entering {
                        _ if bland => {
                            entering = Some((j, reduced));
                            break;
                        }
                        Some((_, best)) if reduced >= best => {}
                        _ => entering = Some((j, reduced)),
                    }
                }
            }
            let Some((enter, _)) = entering else {
                return Ok(RawStatus::Optimal);
            };

            let w = lu.solve(&self.column(enter));
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                if w[r] > PIVOT_TOL {
                    let ratio = self.x_basic[r].max(0.0) / w[r];
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio < lratio + 1e-12
                                    && if bland {
                                        self.basis[r] < self.basis[lr]
                                    } else {
                                        // Prefer kicking artificials out.
                                        self.basis[r] >= self.sf.n_real
                                            && self.basis[lr] < self.sf.n_real
                                    })
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((leave_row, step)) = leave else {
                return if phase1 {
                    Err(Error::NumericalFailure(
                        "phase-1 objective unbounded".into(),
                    ))
                } else {
                    Ok(RawStatus::Unbounded)
                };
            };
            if step < DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run >= BLAND_TRIGGER {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.basis[leave_row] = enter;
        }
        Err(Error::NumericalFailure("simplex iteration cap".into()))
    }

    fn cost_of(&self, j: usize, phase1: bool) -> f64 {
        if phase1 {
            if j >= self.sf.n_real {
                1.0
            } else {
                0.0
            }
        } else if j >= self.sf.n_real {
            0.0
        } else {
            self.sf.cost[j]
        }
    }

    fn run(&mut self) -> Result<RawStatus> {
        if self.sf.m > 0 {
            match self.phase(true)? {
                RawStatus::Optimal => {}
                _ => {
                    return Err(Error::NumericalFailure(
                        "phase 1 must terminate optimal".into(),
                    ))
                }
            }
            let infeasibility: f64 = self
                .basis
                .iter()
                .zip(&self.x_basic)
                .filter(|(&j, _)| j >= self.sf.n_real)
                .map(|(_, &v)| v.max(0.0))
                .sum();
            if infeasibility > 1e-8 {
                return Ok(RawStatus::Infeasible);
            }
            self.evict_artificials()?;
        } else if self.sf.cost.iter().any(|&c| c < -COST_TOL) {
            // No rows at all: any negative cost direction is unbounded.
            return Ok(RawStatus::Unbounded);
        }
        self.phase(false)
    }

    /// Pivot zero-valued artificials out of the basis where possible.
    /// Rows with no structural pivot are linearly dependent; their
    /// artificial stays basic at zero and never re-enters pricing.
    fn evict_artificials(&mut self) -> Result<()> {
        let m = self.sf.m;
        for r in 0..m {
            if self.basis[r] < self.sf.n_real {
                continue;
            }
            let lu = self.factorize()?;
            let mut unit = vec![0.0; m];
            unit[r] = 1.0;
            let row_of_inv = lu.solve_transpose(&unit);
            let mut in_basis = vec![false; self.sf.n_real + m];
            for &j in &self.basis {
                in_basis[j] = true;
            }
            let mut replacement = None;
            for j in 0..self.sf.n_real {
                if in_basis[j] {
                    continue;
                }
                if dot(&row_of_inv, &self.column(j)).abs() > 1e-7 {
                    replacement = Some(j);
                    break;
                }
            }
            if let Some(j) = replacement {
                self.basis[r] = j;
            }
        }
        Ok(())
    }

    fn extract(&mut self, lp: &DenseLP) -> Result<LpSolution> {
        let m = self.sf.m;
        let mut y_full = vec![0.0; self.sf.n_real + m];
        for (r, &j) in self.basis.iter().enumerate() {
            y_full[j] = self.x_basic[r].max(0.0);
        }
        let nv = lp.objective.len();
        let mut x = vec![0.0; nv];
        for j in 0..nv {
            x[j] = match self.sf.var_map[j] {
                VarKind::Shift { col, base } => base + y_full[col],
                VarKind::Mirror { col, base } => base - y_full[col],
                VarKind::Split { pos, neg } => y_full[pos] - y_full[neg],
            };
        }
        let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let row_duals: Vec<f64> = (0..self.sf.orig_rows)
            .map(|r| self.sf.flip[r] * self.duals[r])
            .map(|p| {
                if p > 0.0 && p <= tol::LP_RESIDUAL {
                    0.0
                } else {
                    p
                }
            })
            .collect();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            row_duals,
        })
    }

    fn refine(&self, lu: &Lu, xb: &mut [f64]) {
        let m = self.sf.m;
        let mut residual = self.sf.d.clone();
        for (k, &j) in self.basis.iter().enumerate() {
            let col = self.column(j);
            for r in 0..m {
                residual[r] -= col[r] * xb[k];
            }
        }
        let correction = lu.solve(&residual);
        for k in 0..m {
            xb[k] += correction[k];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------
// Dense LU with partial pivoting.

struct Lu {
    m: usize,
    /// Packed L (unit diagonal, below) and U (on and above).
    f: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(m: usize, mut a: Vec<f64>) -> Result<Lu> {
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut piv = k;
            let mut best = a[perm[k] * m + k].abs();
            for r in k + 1..m {
                let v = a[perm[r] * m + k].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-12 {
                return Err(Error::NumericalFailure("singular basis matrix".into()));
            }
            perm.swap(k, piv);
            let pk = perm[k];
            for r in k + 1..m {
                let pr = perm[r];
                let factor = a[pr * m + k] / a[pk * m + k];
                a[pr * m + k] = factor;
                for c in k + 1..m {
                    a[pr * m + c] -= factor * a[pk * m + c];
                }
            }
        }
        Ok(Lu { m, f: a, perm })
    }

    /// Solve `B x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for k in 0..m {
            let mut v = b[self.perm[k]];
            for c in 0..k {
                v -= self.f[self.perm[k] * m + c] * y[c];
            }
            y[k] = v;
        }
        for k in (0..m).rev() {
            let mut v = y[k];
            for c in k + 1..m {
                v -= self.f[self.perm[k] * m + c] * y[c];
            }
            y[k] = v / self.f[self.perm[k] * m + k];
        }
        y
    }

    /// Solve `B^T x = b`.
    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        // Forward pass through U^T, then L^T (unit diagonal).
        let mut y = vec![0.0; m];
        for k in 0..m {
            let mut v = b[k];
            for c in 0..k {
                v -= self.f[self.perm[c] * m + k] * y[c];
            }
            y[k] = v / self.f[self.perm[k] * m + k];
        }
        for k in (0..m).rev() {
            let mut v = y[k];
            for c in k + 1..m {
                v -= self.f[self.perm[c] * m + k] * y[c];
            }
            y[k] = v;
        }
        // Undo the row permutation: we solved (P B)^T z = b.
        let mut x = vec![0.0; m];
        for k in 0..m {
            x[self.perm[k]] = y[k];
        }
        x
    }
}

// ---------------------------------------------------------------------
// Linear optimization over the hull description.

/// Solve `min a^T z` over the hull rows with the simplex; duals come
/// back keyed like the combinatorial certificate (box rows to `p`,
/// monotone rows to `q` by child vertex, MIR rows to `r`). This is the
/// independent cross-check for the closed-form solver.
pub fn solve_over_cz(inst: &ForestInstance, a: &[f64]) -> Result<(Point, f64, DualCertificate)> {
    let n = inst.vertex_count();
    if a.len() != n + 1 {
        return Err(Error::InvalidInput(
            "objective must use instance indexing".into(),
        ));
    }
    let rows: Vec<_> = cz_rows(inst)
        .into_iter()
        .filter(|r| r.tag != CutTag::NonNeg)
        .collect();
    let lp = DenseLP {
        objective: a[1..].to_vec(),
        rows: rows.iter().map(|r| r.coeffs[1..].to_vec()).collect(),
        rhs: rows.iter().map(|r| r.rhs).collect(),
        lower: vec![0.0; n],
        upper: vec![f64::INFINITY; n],
    };
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::NumericalFailure(format!(
            "hull LP should always be optimal, got {:?}",
            sol.status
        )));
    }
    let mut z = vec![0.0; n + 1];
    z[1..].copy_from_slice(&sol.x);

    let mut cert = DualCertificate::zero(inst);
    let arcs: Vec<_> = inst.arcs().collect();
    let mut arc_idx = 0usize;
    let mut psi_idx = 0usize;
    for (k, row) in rows.iter().enumerate() {
        match row.tag {
            CutTag::Box => {
                // Box rows were emitted one per vertex, in order.
                cert.p[k + 1] = sol.row_duals[k];
            }
            CutTag::Monotone => {
                let (_, child) = arcs[arc_idx];
                arc_idx += 1;
                cert.q_in[child] = sol.row_duals[k];
            }
            CutTag::Mir => {
                let psi = inst.psi_set()[psi_idx];
                psi_idx += 1;
                cert.r[psi] = sol.row_duals[k];
            }
            _ => {}
        }
    }
    Ok((z, sol.objective, cert))
}
