//! Revised simplex over sparse inequality rows.
//!
//! The frontier LP has nonnegative objective coefficients and nonnegative
//! variables, so the all-slack basis is dual feasible from the start and the
//! dual simplex walks straight from it to the optimum: at each step the most
//! violated primal row leaves the basis and the dual ratio test picks the
//! entering column. Anti-cycling falls back to least-index (Bland) selection
//! after the objective stalls.
//!
//! The basis is m x m, but all slack columns are unit vectors, so every
//! basis solve reduces to a dense LU of the k x k "active core" indexed by
//! the tight rows and the basic structural columns. k stays near the number
//! of binding constraints, which is small for kernel covering problems even
//! when m is in the tens of thousands.

/// One inequality row: sparse coefficients, comparison sense, right side.
#[derive(Debug, Clone)]
pub struct RowConstraint {
    pub entries: Vec<(u32, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub struct RowProblem {
    pub num_vars: usize,
    /// Objective coefficients; must be nonnegative (dual-feasible cold start).
    pub cost: Vec<f64>,
    pub rows: Vec<RowConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub status: SimplexStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Rows supporting the Farkas certificate when infeasible.
    pub infeasible_rows: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum SimplexError {
    #[error("basis condition estimate {condition:e} exceeds 1e14")]
    NumericalBreakdown { condition: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Relative feasibility/optimality tolerance.
    pub tol: f64,
    /// Pivot budget; defaults to 50 (rows + cols) when None.
    pub max_iters: Option<usize>,
    /// Lazy row activation: rows start disabled and are enabled in batches
    /// as the iterate violates them. The basis carries over, so newly
    /// enabled rows arrive as basic slacks with zero duals and dual
    /// feasibility is preserved. Disabled rows cost nothing per iteration.
    pub lazy: bool,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: None,
            lazy: false,
        }
    }
}

const PIVOT_TOL: f64 = 1e-9;
const STALL_LIMIT: usize = 64;
const COND_LIMIT: f64 = 1e14;

pub fn solve_rows(
    problem: &RowProblem,
    opts: SimplexOptions,
) -> Result<SimplexResult, SimplexError> {
    Solver::new(problem, opts).run()
}

struct Solver {
    n: usize,
    m: usize,
    cost: Vec<f64>,
    /// Rows normalized to `a x <= b` and scaled to unit max coefficient.
    rows: Vec<Vec<(u32, f64)>>,
    b: Vec<f64>,
    tol: f64,
    max_iters: usize,

    struct_basic: Vec<bool>,
    /// True when row i is tight (its slack is nonbasic).
    row_tight: Vec<bool>,
    /// Rows currently participating; disabled rows are scanned for
    /// violations only when the enabled subset is optimal.
    enabled: Vec<bool>,

    core: Core,
    x: Vec<f64>,
    slack: Vec<f64>,
    rho: Vec<f64>,
    red_cost: Vec<f64>,
    /// Duals of the tight rows, aligned with `core.t_rows`.
    tight_duals: Vec<f64>,
}

/// Dense LU of the active core A[t_rows, xb_cols].
#[derive(Default)]
struct Core {
    k: usize,
    t_rows: Vec<usize>,
    xb_cols: Vec<usize>,
    col_pos: Vec<i64>,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

/// Row of the basis inverse for a leaving variable: weights on the tight
/// rows plus an optional unit weight on the leaving slack's own row.
struct InverseRow {
    tight_weights: Vec<f64>,
    extra_row: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasicVar {
    Structural(usize),
    Slack(usize),
}

impl Solver {
    fn new(problem: &RowProblem, opts: SimplexOptions) -> Self {
        let n = problem.num_vars;
        let m = problem.rows.len();
        assert!(
            problem.cost.iter().all(|&c| c >= 0.0),
            "dual-feasible start needs c >= 0"
        );
        let mut rows = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for rc in &problem.rows {
            let flip = match rc.sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
            };
            let scale = rc
                .entries
                .iter()
                .map(|e| e.1.abs())
                .fold(0.0f64, f64::max)
                .max(f64::MIN_POSITIVE);
            let inv = 1.0 / scale;
            let mut entries: Vec<(u32, f64)> = rc
                .entries
                .iter()
                .filter(|e| e.1 != 0.0)
                .map(|&(j, v)| (j, flip * v * inv))
                .collect();
            entries.sort_by_key(|e| e.0);
            rows.push(entries);
            b.push(flip * rc.rhs * inv);
        }
        let max_iters = opts.max_iters.unwrap_or(50 * (m + n));
        Self {
            n,
            m,
            cost: problem.cost.clone(),
            rows,
            b,
            tol: opts.tol,
            max_iters,
            struct_basic: vec![false; n],
            row_tight: vec![false; m],
            enabled: vec![!opts.lazy; m],
            core: Core::default(),
            x: vec![0.0; n],
            slack: vec![0.0; m],
            rho: vec![0.0; n],
            red_cost: vec![0.0; n],
            tight_duals: Vec::new(),
        }
    }

    fn run(&mut self) -> Result<SimplexResult, SimplexError> {
        let mut iterations = 0usize;
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_obj = f64::NEG_INFINITY;
        loop {
            self.refresh_core()?;
            self.compute_point();
            let obj = self.objective();
            if obj > last_obj + 1e-12 * (1.0 + last_obj.abs()) {
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            }
            last_obj = obj;

            let Some(leaving) = ({
                let mut candidate = self.choose_leaving(bland);
                if candidate.is_none() && self.enable_violated_rows() {
                    self.compute_point();
                    candidate = self.choose_leaving(bland);
                }
                candidate
            }) else {
                return Ok(self.finish(SimplexStatus::Optimal, iterations, Vec::new()));
            };
            if iterations >= self.max_iters {
                return Ok(self.finish(SimplexStatus::IterationLimit, iterations, Vec::new()));
            }
            if std::env::var_os("FRONTIER_LP_TRACE").is_some() && iterations % 100 == 0 {
                let violated = self
                    .slack
                    .iter()
                    .enumerate()
                    .filter(|(i, s)| !self.row_tight[*i] && **s < -self.tol)
                    .count();
                eprintln!(
                    "iter {iterations}: k={} obj={obj:.6} violated={violated}",
                    self.core.k
                );
            }
            iterations += 1;

            let inv_row = self.btran_row(leaving);
            self.fill_pivot_row(&inv_row);
            self.fill_reduced_costs();

            match self.choose_entering(&inv_row, bland) {
                Some(entering) => self.pivot(leaving, entering),
                None => {
                    let mut support: Vec<usize> = self
                        .core
                        .t_rows
                        .iter()
                        .zip(&inv_row.tight_weights)
                        .filter(|(_, w)| w.abs() > 1e-9)
                        .map(|(&r, _)| r)
                        .collect();
                    if let Some(r) = inv_row.extra_row {
                        support.push(r);
                    }
                    support.sort_unstable();
                    return Ok(self.finish(SimplexStatus::Infeasible, iterations, support));
                }
            }
        }
    }

    /// Rebuilds and factorizes the active core for the current basis.
    fn refresh_core(&mut self) -> Result<(), SimplexError> {
        let t_rows: Vec<usize> = (0..self.m).filter(|&i| self.row_tight[i]).collect();
        let xb_cols: Vec<usize> = (0..self.n).filter(|&j| self.struct_basic[j]).collect();
        debug_assert_eq!(t_rows.len(), xb_cols.len());
        let k = t_rows.len();
        let mut col_pos = vec![-1i64; self.n];
        for (p, &j) in xb_cols.iter().enumerate() {
            col_pos[j] = p as i64;
        }
        let mut lu = vec![0.0; k * k];
        for (ti, &r) in t_rows.iter().enumerate() {
            for &(j, v) in &self.rows[r] {
                let p = col_pos[j as usize];
                if p >= 0 {
                    lu[ti * k + p as usize] = v;
                }
            }
        }
        let mut piv = vec![0usize; k];
        let condition = lu_factor(&mut lu, k, &mut piv);
        if !condition.is_finite() || condition > COND_LIMIT {
            return Err(SimplexError::NumericalBreakdown { condition });
        }
        self.core = Core {
            k,
            t_rows,
            xb_cols,
            col_pos,
            lu,
            piv,
        };
        Ok(())
    }

    /// Basic structural values from the tight rows, slack values everywhere
    /// else. Recomputed from the fresh factorization each iteration.
    fn compute_point(&mut self) {
        let k = self.core.k;
        let mut z = vec![0.0; k];
        for (ti, &r) in self.core.t_rows.iter().enumerate() {
            z[ti] = self.b[r];
        }
        lu_solve(&self.core.lu, k, &self.core.piv, &mut z);
        self.x.iter_mut().for_each(|v| *v = 0.0);
        for (p, &j) in self.core.xb_cols.iter().enumerate() {
            self.x[j] = z[p];
        }
        for i in 0..self.m {
            if !self.enabled[i] {
                continue;
            }
            if self.row_tight[i] {
                self.slack[i] = 0.0;
            } else {
                let mut dot = 0.0;
                for &(j, v) in &self.rows[i] {
                    let xj = self.x[j as usize];
                    if xj != 0.0 {
                        dot += v * xj;
                    }
                }
                self.slack[i] = self.b[i] - dot;
            }
        }
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    /// Most violated basic variable, or least-index violated in Bland mode.
    /// Slack violations are scaled by the row magnitude so mixed-scale rows
    /// compete fairly.
    fn choose_leaving(&self, bland: bool) -> Option<BasicVar> {
        let mut best_violation = f64::INFINITY;
        let mut best_order = usize::MAX;
        let mut best: Option<BasicVar> = None;
        {
            let mut consider = |violation: f64, order: usize, var: BasicVar| {
                if violation >= -self.tol {
                    return;
                }
                let better = if bland {
                    order < best_order
                } else {
                    violation < best_violation
                        || (violation == best_violation && order < best_order)
                };
                if better {
                    best_violation = violation;
                    best_order = order;
                    best = Some(var);
                }
            };
            for &j in &self.core.xb_cols {
                consider(self.x[j], j, BasicVar::Structural(j));
            }
            for i in 0..self.m {
                if self.enabled[i] && !self.row_tight[i] {
                    let scale = 1.0 + self.b[i].abs();
                    consider(self.slack[i] / scale, self.n + i, BasicVar::Slack(i));
                }
            }
        }
        best
    }

    /// Scans disabled rows at a subset-optimal point and enables the most
    /// violated batch. Returns false when every disabled row is satisfied,
    /// i.e. the current point is optimal for the full problem.
    fn enable_violated_rows(&mut self) -> bool {
        let mut worst: Vec<(f64, usize)> = Vec::new();
        for i in 0..self.m {
            if self.enabled[i] {
                continue;
            }
            let mut dot = 0.0;
            for &(j, v) in &self.rows[i] {
                let xj = self.x[j as usize];
                if xj != 0.0 {
                    dot += v * xj;
                }
            }
            let violation = (dot - self.b[i]) / (1.0 + self.b[i].abs());
            if violation > self.tol {
                worst.push((violation, i));
            }
        }
        if worst.is_empty() {
            return false;
        }
        worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, i) in worst.iter().take(128) {
            self.enabled[i] = true;
        }
        true
    }

    fn btran_row(&self, leaving: BasicVar) -> InverseRow {
        let k = self.core.k;
        let mut rhs = vec![0.0; k];
        let mut extra_row = None;
        match leaving {
            BasicVar::Structural(j) => {
                let p = self.core.col_pos[j];
                debug_assert!(p >= 0);
                rhs[p as usize] = 1.0;
            }
            BasicVar::Slack(i0) => {
                // core^T w = -A[i0, basic structural columns]
                for &(j, v) in &self.rows[i0] {
                    let p = self.core.col_pos[j as usize];
                    if p >= 0 {
                        rhs[p as usize] = -v;
                    }
                }
                extra_row = Some(i0);
            }
        }
        lu_solve_transposed(&self.core.lu, k, &self.core.piv, &mut rhs);
        InverseRow {
            tight_weights: rhs,
            extra_row,
        }
    }

    /// rho[j] = (inverse row) . A_j over structural columns.
    fn fill_pivot_row(&mut self, inv_row: &InverseRow) {
        self.rho.iter_mut().for_each(|r| *r = 0.0);
        for (ti, &r) in self.core.t_rows.iter().enumerate() {
            let w = inv_row.tight_weights[ti];
            if w != 0.0 {
                for &(j, a) in &self.rows[r] {
                    self.rho[j as usize] += w * a;
                }
            }
        }
        if let Some(r) = inv_row.extra_row {
            for &(j, a) in &self.rows[r] {
                self.rho[j as usize] += a;
            }
        }
    }

    /// Reduced costs of structural columns from the duals of the tight rows.
    fn fill_reduced_costs(&mut self) {
        let k = self.core.k;
        let mut y = vec![0.0; k];
        for (p, &j) in self.core.xb_cols.iter().enumerate() {
            y[p] = self.cost[j];
        }
        lu_solve_transposed(&self.core.lu, k, &self.core.piv, &mut y);
        self.red_cost.copy_from_slice(&self.cost);
        for (ti, &r) in self.core.t_rows.iter().enumerate() {
            let w = y[ti];
            if w != 0.0 {
                for &(j, a) in &self.rows[r] {
                    self.red_cost[j as usize] -= w * a;
                }
            }
        }
        self.tight_duals = y;
    }

    /// Harris-style dual ratio test. Pass one computes the minimal ratio
    /// with a small dual slack added to the reduced costs; pass two picks
    /// the largest-magnitude pivot whose strict ratio fits under that
    /// relaxed bound. The slack trades a bounded amount of dual
    /// infeasibility (repaired by the per-iteration recomputation) for
    /// well-conditioned bases. Bland mode ignores the slack and takes the
    /// least index among exact minimizers.
    fn choose_entering(&self, inv_row: &InverseRow, bland: bool) -> Option<BasicVar> {
        let dual_slack = if bland { 0.0 } else { 1e-7 };
        let mut theta_max = f64::INFINITY;
        self.for_each_candidate(inv_row, |_, rho, d| {
            let relaxed = (d.max(0.0) + dual_slack) / -rho;
            if relaxed < theta_max {
                theta_max = relaxed;
            }
        });
        if theta_max.is_infinite() {
            return None;
        }
        let mut best_order = usize::MAX;
        let mut best_pivot = 0.0f64;
        self.for_each_candidate(inv_row, |order, rho, d| {
            let ratio = d.max(0.0) / -rho;
            if ratio > theta_max * (1.0 + 1e-12) {
                return;
            }
            let better = if bland {
                order < best_order
            } else {
                rho.abs() > best_pivot || (rho.abs() == best_pivot && order < best_order)
            };
            if better {
                best_order = order;
                best_pivot = rho.abs();
            }
        });
        if best_order == usize::MAX {
            None
        } else if best_order < self.n {
            Some(BasicVar::Structural(best_order))
        } else {
            Some(BasicVar::Slack(best_order - self.n))
        }
    }

    /// Visits every nonbasic column with a usable pivot: structural columns
    /// via the dense pivot row, tight-row slacks via the inverse-row weight.
    fn for_each_candidate<F: FnMut(usize, f64, f64)>(&self, inv_row: &InverseRow, mut f: F) {
        for j in 0..self.n {
            if !self.struct_basic[j] {
                let rho = self.rho[j];
                if rho < -PIVOT_TOL {
                    f(j, rho, self.red_cost[j]);
                }
            }
        }
        for (ti, &r) in self.core.t_rows.iter().enumerate() {
            let rho = inv_row.tight_weights[ti];
            if rho < -PIVOT_TOL {
                f(self.n + r, rho, -self.tight_duals[ti]);
            }
        }
    }

    fn pivot(&mut self, leaving: BasicVar, entering: BasicVar) {
        match leaving {
            BasicVar::Structural(j) => self.struct_basic[j] = false,
            BasicVar::Slack(i) => self.row_tight[i] = true,
        }
        match entering {
            BasicVar::Structural(j) => self.struct_basic[j] = true,
            BasicVar::Slack(i) => self.row_tight[i] = false,
        }
    }

    fn finish(
        &mut self,
        status: SimplexStatus,
        iterations: usize,
        infeasible_rows: Vec<usize>,
    ) -> SimplexResult {
        SimplexResult {
            status,
            x: self.x.clone(),
            objective: self.objective(),
            iterations,
            infeasible_rows,
        }
    }
}

/// Dense LU with partial pivoting, in place; returns the ratio of extreme
/// pivot magnitudes as a cheap condition proxy (infinite when singular).
fn lu_factor(a: &mut [f64], k: usize, piv: &mut [usize]) -> f64 {
    let mut max_piv = 0.0f64;
    let mut min_piv = f64::INFINITY;
    for col in 0..k {
        let mut best = col;
        let mut best_abs = a[col * k + col].abs();
        for row in col + 1..k {
            let v = a[row * k + col].abs();
            if v > best_abs {
                best_abs = v;
                best = row;
            }
        }
        piv[col] = best;
        if best != col {
            for j in 0..k {
                a.swap(col * k + j, best * k + j);
            }
        }
        let d = a[col * k + col];
        if d == 0.0 {
            return f64::INFINITY;
        }
        max_piv = max_piv.max(d.abs());
        min_piv = min_piv.min(d.abs());
        let inv = 1.0 / d;
        for row in col + 1..k {
            let l = a[row * k + col] * inv;
            a[row * k + col] = l;
            if l != 0.0 {
                for j in col + 1..k {
                    a[row * k + j] -= l * a[col * k + j];
                }
            }
        }
    }
    if k == 0 {
        return 1.0;
    }
    max_piv / min_piv
}

/// Solves C z = rhs given the factorization from [`lu_factor`].
fn lu_solve(lu: &[f64], k: usize, piv: &[usize], rhs: &mut [f64]) {
    for col in 0..k {
        rhs.swap(col, piv[col]);
    }
    for row in 1..k {
        let mut acc = rhs[row];
        for col in 0..row {
            acc -= lu[row * k + col] * rhs[col];
        }
        rhs[row] = acc;
    }
    for row in (0..k).rev() {
        let mut acc = rhs[row];
        for col in row + 1..k {
            acc -= lu[row * k + col] * rhs[col];
        }
        rhs[row] = acc / lu[row * k + row];
    }
}

/// Solves C^T w = rhs given the factorization of C (C^T = U^T L^T P).
fn lu_solve_transposed(lu: &[f64], k: usize, piv: &[usize], rhs: &mut [f64]) {
    for row in 0..k {
        let mut acc = rhs[row];
        for col in 0..row {
            acc -= lu[col * k + row] * rhs[col];
        }
        rhs[row] = acc / lu[row * k + row];
    }
    for row in (0..k).rev() {
        let mut acc = rhs[row];
        for col in row + 1..k {
            acc -= lu[col * k + row] * rhs[col];
        }
        rhs[row] = acc;
    }
    for col in (0..k).rev() {
        rhs.swap(col, piv[col]);
    }
}
