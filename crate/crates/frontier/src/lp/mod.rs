//! Assembly and solution of the frontier linear program.
//!
//! Given a sorted sample, the LP minimizes the coefficient sum subject to
//! three constraint families: cover rows force the estimate above every
//! observation, derivative rows bound |f̂'| at the sample points plus the
//! virtual endpoints 0 and 1, and bin rows cap the coefficient mass falling
//! into each of the m_h = floor(1/h) intervals. Nonnegativity of the
//! coefficients closes the program. The solution is the smallest-surface
//! regular kernel hull of the data.
//!
//! A plain-text export (`export_text`) is provided for cross-checking
//! against external solvers: a header line `vars N`, the objective as
//! `min c_1 .. c_N`, then one constraint per line as `sense rhs coeffs..`
//! with sense `le` or `ge`, and a trailing `nonneg` marker. Coefficients
//! are dense, 17 significant digits.

mod simplex;

pub use simplex::{Sense, SimplexError, SimplexOptions, SimplexStatus};

use crate::kernel::{BasicKernel, CorrectedKernel, KernelFunctionals};
use crate::model::Sample;
use simplex::{RowConstraint, RowProblem};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("sample is empty")]
    EmptySample,
    #[error("bandwidth h={0} outside (0, 1/2)")]
    InvalidBandwidth(f64),
    #[error("c_alpha={c_alpha} must exceed 6 f_max = {}", 6.0 * f_max)]
    CAlphaTooSmall { c_alpha: f64, f_max: f64 },
    #[error("sample x-values must be sorted and inside [0, 1]")]
    BadSample,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("brute force supports N <= 3, got N = {0}")]
    TooLargeForBruteForce(usize),
    #[error(transparent)]
    Numerical(#[from] SimplexError),
}

/// Parameters fixed before seeing the data: bandwidth, the bin-cap constant
/// C_alpha (strictly above the 6 f_max threshold), the frontier smoothness
/// inputs, and the kernel functionals.
#[derive(Debug, Clone)]
pub struct LpBuildParams {
    pub h: f64,
    pub c_alpha: f64,
    pub l_f_beta: f64,
    pub beta: f64,
    pub functionals: KernelFunctionals,
}

impl LpBuildParams {
    pub fn new(
        h: f64,
        c_alpha: f64,
        f_max: f64,
        l_f_beta: f64,
        functionals: KernelFunctionals,
    ) -> Result<Self, LpError> {
        if !(h > 0.0 && h < 0.5) {
            return Err(LpError::InvalidBandwidth(h));
        }
        if c_alpha <= 6.0 * f_max {
            return Err(LpError::CAlphaTooSmall { c_alpha, f_max });
        }
        Ok(Self {
            h,
            c_alpha,
            l_f_beta,
            beta: functionals.beta,
            functionals,
        })
    }

    /// Number of bins, the integer part of 1/h (>= 2 since h < 1/2).
    pub fn m_h(&self) -> usize {
        (1.0 / self.h).floor() as usize
    }

    /// Two-sided derivative cap L g_max C_beta(K,K') log N / (N h^2).
    pub fn deriv_bound(&self, n: usize) -> f64 {
        self.l_f_beta * self.functionals.g_max * self.functionals.c_beta_kkp * (n as f64).ln()
            / (n as f64 * self.h * self.h)
    }
}

/// The assembled LP. Rows are sparse (index, value) pairs over the N
/// coefficients; cover rows are banded because the kernel support clips
/// |X_i - X_j| < h.
#[derive(Debug, Clone)]
pub struct LpProblem {
    /// Sample abscissae (sorted).
    pub x: Vec<f64>,
    /// Cover right-hand sides Y.
    pub y: Vec<f64>,
    /// A: cover rows, A_ij = K_h(X_i, X_j).
    pub cover: Vec<Vec<(u32, f64)>>,
    /// B: derivative rows at the points 0, X_1..X_N, 1.
    pub deriv: Vec<Vec<(u32, f64)>>,
    /// The N+2 derivative constraint points.
    pub deriv_points: Vec<f64>,
    /// D encoded as the bin index of each sample point.
    pub bin_of: Vec<usize>,
    pub m_h: usize,
    pub deriv_bound: f64,
    /// C_alpha h.
    pub bin_bound: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::IterationLimit => "iteration_limit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub alpha: Vec<f64>,
    pub objective_value: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Farkas support rows (solver row indices) when infeasible.
    pub infeasible_rows: Vec<usize>,
}

/// Builds the frontier LP from a sorted sample.
pub fn build_frontier_lp(
    sample: &Sample,
    params: &LpBuildParams,
    base: &BasicKernel,
) -> Result<LpProblem, LpError> {
    let n = sample.len();
    if n == 0 {
        return Err(LpError::EmptySample);
    }
    let xs = &sample.x;
    if xs.windows(2).any(|w| w[0] > w[1])
        || xs.iter().any(|&x| !(0.0..=1.0).contains(&x) || !x.is_finite())
    {
        return Err(LpError::BadSample);
    }
    let h = params.h;
    let kernel =
        CorrectedKernel::new(base.clone(), h).map_err(|_| LpError::InvalidBandwidth(h))?;

    let band_row = |x: f64, order: usize| -> Vec<(u32, f64)> {
        let lo = xs.partition_point(|&t| t <= x - h);
        let hi = xs.partition_point(|&t| t < x + h);
        let mut entries = Vec::with_capacity(hi - lo);
        for j in lo..hi {
            let v = kernel.eval(x, xs[j], order);
            if v != 0.0 {
                entries.push((j as u32, v));
            }
        }
        entries
    };

    let cover: Vec<_> = xs.iter().map(|&x| band_row(x, 0)).collect();
    let mut deriv_points = Vec::with_capacity(n + 2);
    deriv_points.push(0.0);
    deriv_points.extend_from_slice(xs);
    deriv_points.push(1.0);
    let deriv: Vec<_> = deriv_points.iter().map(|&x| band_row(x, 1)).collect();

    let m_h = params.m_h();
    let bin_of: Vec<usize> = xs
        .iter()
        .map(|&x| ((x * m_h as f64).floor() as usize).min(m_h - 1))
        .collect();

    Ok(LpProblem {
        x: xs.clone(),
        y: sample.y.clone(),
        cover,
        deriv,
        deriv_points,
        bin_of,
        m_h,
        deriv_bound: params.deriv_bound(n),
        bin_bound: params.c_alpha * h,
        h,
    })
}

impl LpProblem {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Total constraint rows as lowered for the solver:
    /// N cover + 2(N+2) derivative + m_h bins.
    pub fn num_constraint_rows(&self) -> usize {
        self.n() + 2 * self.deriv.len() + self.m_h
    }

    fn dot(row: &[(u32, f64)], alpha: &[f64]) -> f64 {
        row.iter().map(|&(j, v)| v * alpha[j as usize]).sum()
    }

    /// A alpha (estimate values at the sample points).
    pub fn cover_values(&self, alpha: &[f64]) -> Vec<f64> {
        self.cover.iter().map(|r| Self::dot(r, alpha)).collect()
    }

    /// B alpha (estimate derivative at the N+2 constraint points).
    pub fn deriv_values(&self, alpha: &[f64]) -> Vec<f64> {
        self.deriv.iter().map(|r| Self::dot(r, alpha)).collect()
    }

    /// D^T alpha (coefficient mass per bin).
    pub fn bin_sums(&self, alpha: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.m_h];
        for (i, &b) in self.bin_of.iter().enumerate() {
            sums[b] += alpha[i];
        }
        sums
    }

    /// Componentwise feasibility with tolerance `tol` scaled by each bound's
    /// magnitude.
    pub fn is_feasible(&self, alpha: &[f64], tol: f64) -> bool {
        if alpha.iter().any(|&a| a < -tol) {
            return false;
        }
        let covers = self.cover_values(alpha);
        if covers
            .iter()
            .zip(&self.y)
            .any(|(c, y)| *c < y - tol * (1.0 + y.abs()))
        {
            return false;
        }
        let dtol = self.deriv_bound + tol * (1.0 + self.deriv_bound);
        if self.deriv_values(alpha).iter().any(|d| d.abs() > dtol) {
            return false;
        }
        let btol = self.bin_bound + tol * (1.0 + self.bin_bound);
        !self.bin_sums(alpha).iter().any(|s| *s > btol)
    }

    fn to_rows(&self) -> RowProblem {
        let n = self.n();
        let mut rows = Vec::with_capacity(self.num_constraint_rows());
        for (row, &rhs) in self.cover.iter().zip(&self.y) {
            rows.push(RowConstraint {
                entries: row.clone(),
                sense: Sense::Ge,
                rhs,
            });
        }
        for row in &self.deriv {
            rows.push(RowConstraint {
                entries: row.clone(),
                sense: Sense::Le,
                rhs: self.deriv_bound,
            });
        }
        for row in &self.deriv {
            rows.push(RowConstraint {
                entries: row.clone(),
                sense: Sense::Ge,
                rhs: -self.deriv_bound,
            });
        }
        for b in 0..self.m_h {
            let entries: Vec<(u32, f64)> = self
                .bin_of
                .iter()
                .enumerate()
                .filter(|(_, &bin)| bin == b)
                .map(|(i, _)| (i as u32, 1.0))
                .collect();
            rows.push(RowConstraint {
                entries,
                sense: Sense::Le,
                rhs: self.bin_bound,
            });
        }
        RowProblem {
            num_vars: n,
            cost: vec![1.0; n],
            rows,
        }
    }

    /// Plain-text dump for cross-checking (see module docs for the layout).
    pub fn export_text(&self) -> String {
        let n = self.n();
        let rows = self.to_rows();
        let mut out = String::new();
        out.push_str(&format!("vars {n}\n"));
        out.push_str("min");
        for c in &rows.cost {
            out.push_str(&format!(" {:.16e}", c));
        }
        out.push('\n');
        for rc in &rows.rows {
            out.push_str(match rc.sense {
                Sense::Le => "le",
                Sense::Ge => "ge",
            });
            out.push_str(&format!(" {:.16e}", rc.rhs));
            let mut dense = vec![0.0; n];
            for &(j, v) in &rc.entries {
                dense[j as usize] = v;
            }
            for v in dense {
                out.push_str(&format!(" {:.16e}", v));
            }
            out.push('\n');
        }
        out.push_str("nonneg\n");
        out
    }
}

/// Solves the LP by revised simplex with lazy row activation: only a few
/// constraints bind at the optimum (cover rows at contact points, a handful
/// of derivative rows), so the solver enables rows in violation batches and
/// keeps the rest dormant. Rows enabled later enter as basic slacks with
/// zero duals, so the optimality certificate at termination covers the full
/// program, and an infeasible enabled subset is a fortiori infeasible for
/// the full program.
///
/// `tol` is the relative feasibility and optimality tolerance (1e-9 is the
/// default used across the crate).
pub fn solve(problem: &LpProblem, tol: f64) -> Result<LpSolution, LpError> {
    if tol <= 0.0 {
        return Err(LpError::BadTolerance(tol));
    }
    let rows = problem.to_rows();
    let result = simplex::solve_rows(
        &rows,
        SimplexOptions {
            tol,
            max_iters: None,
            lazy: true,
        },
    )?;
    let status = match result.status {
        SimplexStatus::Optimal => SolveStatus::Optimal,
        SimplexStatus::Infeasible => SolveStatus::Infeasible,
        SimplexStatus::IterationLimit => SolveStatus::IterationLimit,
    };
    Ok(LpSolution {
        objective_value: if status == SolveStatus::Infeasible {
            f64::INFINITY
        } else {
            result.objective
        },
        alpha: result.x,
        status,
        iterations: result.iterations,
        infeasible_rows: result.infeasible_rows,
    })
}

/// Independent oracle for tiny instances. A coarse grid scan over
/// [0, alpha_cap]^N finds an incumbent; the refinement enumerates every
/// candidate vertex (all N-subsets of constraint hyperplanes solved
/// directly) and keeps the best feasible one. The bin caps bound the
/// feasible set, so it is a polytope and the optimum sits on a vertex the
/// enumeration visits; a pure cell-refined grid stalls several 1e-3 short
/// on thin constraint corridors. Errors above N = 3.
pub fn brute_force_solve(problem: &LpProblem, grid: usize) -> Result<LpSolution, LpError> {
    let n = problem.n();
    if n > 3 {
        return Err(LpError::TooLargeForBruteForce(n));
    }
    let grid = grid.max(8);
    let tol = 1e-8;
    let max_y = problem.y.iter().cloned().fold(0.0f64, f64::max);
    let min_diag = problem
        .cover
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .find(|(j, _)| *j as usize == i)
                .map(|&(_, v)| v)
                .unwrap_or(f64::INFINITY)
        })
        .fold(f64::INFINITY, f64::min);
    let cap = if max_y > 0.0 { 1.2 * max_y / min_diag } else { 0.0 };

    if cap == 0.0 {
        // All-zero data: the zero vector is feasible and minimal.
        return Ok(LpSolution {
            alpha: vec![0.0; n],
            objective_value: 0.0,
            status: SolveStatus::Optimal,
            iterations: 0,
            infeasible_rows: Vec::new(),
        });
    }

    // Coarse incumbent scan.
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut point = vec![0.0; n];
    let total = (grid + 1).pow(n as u32);
    for flat in 0..total {
        let mut rem = flat;
        for d in 0..n {
            let idx = rem % (grid + 1);
            rem /= grid + 1;
            point[d] = cap * idx as f64 / grid as f64;
        }
        if problem.is_feasible(&point, tol) {
            let obj: f64 = point.iter().sum();
            if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                best = Some((obj, point.clone()));
            }
        }
    }

    // Vertex enumeration: dense hyperplanes a.x = b from every constraint
    // at its bound, plus the coordinate planes.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    let densify = |row: &[(u32, f64)]| {
        let mut a = vec![0.0; n];
        for &(j, v) in row {
            a[j as usize] = v;
        }
        a
    };
    for (row, &rhs) in problem.cover.iter().zip(&problem.y) {
        planes.push((densify(row), rhs));
    }
    for row in &problem.deriv {
        let a = densify(row);
        planes.push((a.clone(), problem.deriv_bound));
        planes.push((a, -problem.deriv_bound));
    }
    for b in 0..problem.m_h {
        let mut a = vec![0.0; n];
        for (i, &bin) in problem.bin_of.iter().enumerate() {
            if bin == b {
                a[i] = 1.0;
            }
        }
        planes.push((a, problem.bin_bound));
    }
    for i in 0..n {
        let mut a = vec![0.0; n];
        a[i] = 1.0;
        planes.push((a, 0.0));
    }

    let mut combo = vec![0usize; n];
    let mut visit_done = false;
    for i in 0..n {
        combo[i] = i;
    }
    if planes.len() < n {
        visit_done = true;
    }
    let mut vertices = 0usize;
    while !visit_done {
        if let Some(alpha) = solve_dense_system(&planes, &combo, n) {
            vertices += 1;
            if alpha.iter().all(|a| a.is_finite()) && problem.is_feasible(&alpha, tol) {
                let obj: f64 = alpha.iter().sum();
                if best.as_ref().map_or(true, |(b, _)| obj < *b - 1e-15) {
                    best = Some((obj, alpha));
                }
            }
        }
        // next n-combination of plane indices
        let mut d = n;
        loop {
            if d == 0 {
                visit_done = true;
                break;
            }
            d -= 1;
            if combo[d] + 1 <= planes.len() - (n - d) {
                combo[d] += 1;
                for j in d + 1..n {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }

    match best {
        Some((objective_value, alpha)) => Ok(LpSolution {
            alpha,
            objective_value,
            status: SolveStatus::Optimal,
            iterations: vertices,
            infeasible_rows: Vec::new(),
        }),
        None => Ok(LpSolution {
            alpha: vec![0.0; n],
            objective_value: f64::INFINITY,
            status: SolveStatus::Infeasible,
            iterations: vertices,
            infeasible_rows: Vec::new(),
        }),
    }
}

/// Solves the n x n system formed by the selected hyperplanes with Gaussian
/// elimination; None when (near-)singular.
fn solve_dense_system(planes: &[(Vec<f64>, f64)], combo: &[usize], n: usize) -> Option<Vec<f64>> {
    let mut m = vec![0.0; n * (n + 1)];
    for (r, &p) in combo.iter().enumerate() {
        let (a, b) = &planes[p];
        for c in 0..n {
            m[r * (n + 1) + c] = a[c];
        }
        m[r * (n + 1) + n] = *b;
    }
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * (n + 1) + col].abs();
        for r in col + 1..n {
            let v = m[r * (n + 1) + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-12 {
            return None;
        }
        if piv != col {
            for c in 0..=n {
                m.swap(col * (n + 1) + c, piv * (n + 1) + c);
            }
        }
        let d = m[col * (n + 1) + col];
        for r in 0..n {
            if r != col {
                let factor = m[r * (n + 1) + col] / d;
                if factor != 0.0 {
                    for c in col..=n {
                        m[r * (n + 1) + c] -= factor * m[col * (n + 1) + c];
                    }
                }
            }
        }
    }
    Some(
        (0..n)
            .map(|r| m[r * (n + 1) + n] / m[r * (n + 1) + r])
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{compute_functionals, BasicKernel};
    use crate::model::{make_frontier, sample_support, FrontierSpec, Sample};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(h: f64, l: f64) -> LpBuildParams {
        let base = BasicKernel::quadriweight();
        let functionals = compute_functionals(&base, 1.0).unwrap();
        LpBuildParams::new(h, 6.5 * 1.3, 1.3, l, functionals).unwrap()
    }

    fn hand_instance() -> (Sample, LpBuildParams, BasicKernel) {
        let sample = Sample {
            x: vec![0.5],
            y: vec![0.5],
            seed: 0,
        };
        (sample, params(0.25, 1.0), BasicKernel::quadriweight())
    }

    #[test]
    fn dimensions_match_counting() {
        let f = make_frontier(&FrontierSpec::Constant { params: vec![1.0] }).unwrap();
        let s = sample_support(&f, 50, 3);
        let p = params(0.1, 0.5);
        let lp = build_frontier_lp(&s, &p, &BasicKernel::quadriweight()).unwrap();
        assert_eq!(lp.cover.len(), 50);
        assert_eq!(lp.deriv.len(), 52);
        assert_eq!(lp.m_h, 10);
        assert_eq!(lp.num_constraint_rows(), 50 + 2 * 52 + 10);
        // banded cover: nonzeros only within the kernel window
        for (i, row) in lp.cover.iter().enumerate() {
            for &(j, v) in row {
                assert!((lp.x[i] - lp.x[j as usize]).abs() < p.h);
                assert!(v >= 0.0);
            }
        }
        // every point in exactly one bin
        assert!(lp.bin_of.iter().all(|&b| b < lp.m_h));
    }

    #[test]
    fn m_h_is_integer_part() {
        let p = params(0.3, 1.0);
        assert_eq!(p.m_h(), 3);
        assert_eq!(params(0.25, 1.0).m_h(), 4);
    }

    #[test]
    fn single_point_matrix_entries() {
        let (s, p, base) = hand_instance();
        let lp = build_frontier_lp(&s, &p, &base).unwrap();
        // A = [g(0.5) K(0) / h] = [4 K(0)] in the interior
        assert_eq!(lp.cover[0].len(), 1);
        assert_abs_diff_eq!(lp.cover[0][0].1, 4.0 * 315.0 / 256.0, epsilon = 1e-12);
        // B row at X_1 = 0.5 vanishes: K'(0) = 0 and g' = 0 there
        assert!(lp.deriv[1].is_empty() || lp.deriv[1].iter().all(|&(_, v)| v == 0.0));
        // endpoint rows see no mass at distance 0.5 > h
        assert!(lp.deriv[0].is_empty());
        assert!(lp.deriv[2].is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let (s, p, base) = hand_instance();
        let empty = Sample {
            x: vec![],
            y: vec![],
            seed: 0,
        };
        assert!(matches!(
            build_frontier_lp(&empty, &p, &base),
            Err(LpError::EmptySample)
        ));
        let base2 = BasicKernel::quadriweight();
        let f = compute_functionals(&base2, 1.0).unwrap();
        assert!(matches!(
            LpBuildParams::new(0.5, 10.0, 1.0, 1.0, f.clone()),
            Err(LpError::InvalidBandwidth(_))
        ));
        assert!(matches!(
            LpBuildParams::new(0.1, 6.0, 1.0, 1.0, f),
            Err(LpError::CAlphaTooSmall { .. })
        ));
        let unsorted = Sample {
            x: vec![0.5, 0.2],
            y: vec![0.1, 0.1],
            seed: 0,
        };
        assert!(matches!(
            build_frontier_lp(&unsorted, &p, &base),
            Err(LpError::BadSample)
        ));
        let lp = build_frontier_lp(&s, &p, &base).unwrap();
        assert!(matches!(solve(&lp, 0.0), Err(LpError::BadTolerance(_))));
    }

    #[test]
    fn hand_instance_solved_exactly() {
        let (s, p, base) = hand_instance();
        let lp = build_frontier_lp(&s, &p, &base).unwrap();
        let sol = solve(&lp, 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let expect = 0.5 * 0.25 / (315.0 / 256.0);
        assert_abs_diff_eq!(sol.alpha[0], expect, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.objective_value, expect, epsilon = 1e-9);
        // objective equals the coefficient sum by construction
        assert_abs_diff_eq!(
            sol.objective_value,
            sol.alpha.iter().sum::<f64>(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let (mut s, p, base) = hand_instance();
        s.y[0] = 0.0;
        let lp = build_frontier_lp(&s, &p, &base).unwrap();
        let sol = solve(&lp, 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective_value, 0.0);
        let brute = brute_force_solve(&lp, 24).unwrap();
        assert_eq!(brute.objective_value, 0.0);
    }

    #[test]
    fn opposite_slope_instance_is_infeasible_in_both_solvers() {
        // deriv_bound = 0 (L = 0) with two covered points inside one window:
        // the derivative rows force alpha = 0, which cannot cover y > 0.
        let s = Sample {
            x: vec![0.45, 0.55],
            y: vec![0.5, 0.5],
            seed: 0,
        };
        let p = params(0.25, 0.0);
        let lp = build_frontier_lp(&s, &p, &base_kernel()).unwrap();
        assert_eq!(lp.deriv_bound, 0.0);
        let sol = solve(&lp, 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(!sol.infeasible_rows.is_empty());
        let brute = brute_force_solve(&lp, 24).unwrap();
        assert_eq!(brute.status, SolveStatus::Infeasible);
    }

    fn base_kernel() -> BasicKernel {
        BasicKernel::quadriweight()
    }

    fn random_tiny_instance(rng: &mut ChaCha8Rng) -> LpProblem {
        let n = 1 + rng.gen_range(0..3usize);
        let h = 0.15 + 0.2 * rng.gen::<f64>();
        // N = 1 has a zero derivative budget (log 1 = 0); keep the single
        // point out of the boundary strips so the derivative rows vanish
        // and the instance stays solvable.
        let (lo, hi) = if n == 1 { (h + 0.02, 0.98 - h) } else { (0.1, 0.9) };
        let mut x: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect();
        x.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let y: Vec<f64> = (0..n).map(|_| 0.05 + 0.9 * rng.gen::<f64>()).collect();
        let s = Sample { x, y, seed: 0 };
        let p = params(h, 1.0);
        build_frontier_lp(&s, &p, &base_kernel()).unwrap()
    }

    #[test]
    fn simplex_agrees_with_brute_force_on_tiny_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..12 {
            let lp = random_tiny_instance(&mut rng);
            let fast = solve(&lp, 1e-9).unwrap();
            let slow = brute_force_solve(&lp, 24).unwrap();
            assert_eq!(fast.status, SolveStatus::Optimal, "trial {trial}");
            assert_eq!(slow.status, SolveStatus::Optimal, "trial {trial}");
            assert!(
                (fast.objective_value - slow.objective_value).abs() <= 1e-4,
                "trial {trial}: simplex {} vs brute {}",
                fast.objective_value,
                slow.objective_value
            );
            assert!(lp.is_feasible(&fast.alpha, 1e-8));
        }
    }

    #[test]
    fn optimum_is_feasible_on_generated_data() {
        let f = make_frontier(&FrontierSpec::Sine {
            params: vec![1.0, 0.3],
        })
        .unwrap();
        let s = sample_support(&f, 200, 17);
        let p = params(0.08, f.l_f_beta);
        let lp = build_frontier_lp(&s, &p, &base_kernel()).unwrap();
        let sol = solve(&lp, 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let tol = 1e-8;
        for (c, y) in lp.cover_values(&sol.alpha).iter().zip(&lp.y) {
            assert!(*c >= y - tol * (1.0 + y.abs()));
        }
        for d in lp.deriv_values(&sol.alpha) {
            assert!(d.abs() <= lp.deriv_bound + tol * (1.0 + lp.deriv_bound));
        }
        for b in lp.bin_sums(&sol.alpha) {
            assert!(b <= lp.bin_bound + tol * (1.0 + lp.bin_bound));
        }
        assert!(sol.alpha.iter().all(|&a| a >= -1e-9));
    }

    #[test]
    fn objective_scales_with_data_when_side_constraints_slack() {
        // Small y keeps derivative and bin rows inactive; cover rows are
        // homogeneous, so J* scales linearly in the data.
        let f = make_frontier(&FrontierSpec::Constant { params: vec![1.0] }).unwrap();
        let mut s = sample_support(&f, 40, 5);
        for y in &mut s.y {
            *y *= 0.05;
        }
        let p = params(0.12, 1.0);
        let lp = build_frontier_lp(&s, &p, &base_kernel()).unwrap();
        let j1 = solve(&lp, 1e-9).unwrap();
        let mut scaled = s.clone();
        for y in &mut scaled.y {
            *y *= 3.0;
        }
        let lp3 = build_frontier_lp(&scaled, &p, &base_kernel()).unwrap();
        let j3 = solve(&lp3, 1e-9).unwrap();
        assert_eq!(j1.status, SolveStatus::Optimal);
        assert_eq!(j3.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(
            j3.objective_value,
            3.0 * j1.objective_value,
            epsilon = 1e-7
        );
    }

    #[test]
    fn relaxing_derivative_bound_never_raises_objective() {
        let f = make_frontier(&FrontierSpec::Sine {
            params: vec![1.0, 0.3],
        })
        .unwrap();
        let s = sample_support(&f, 120, 9);
        let p = params(0.1, f.l_f_beta);
        let lp = build_frontier_lp(&s, &p, &base_kernel()).unwrap();
        let tight = solve(&lp, 1e-9).unwrap();
        let mut relaxed = lp.clone();
        relaxed.deriv_bound *= 4.0;
        let loose = solve(&relaxed, 1e-9).unwrap();
        assert!(loose.objective_value <= tight.objective_value + 1e-7);
    }

    #[test]
    fn export_layout_is_stable() {
        let (s, p, base) = hand_instance();
        let lp = build_frontier_lp(&s, &p, &base).unwrap();
        let text = lp.export_text();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("vars 1"));
        let min = lines.next().unwrap();
        assert!(min.starts_with("min "));
        let ge = lines.next().unwrap();
        assert!(ge.starts_with("ge "));
        assert_eq!(text.lines().count(), 2 + lp.num_constraint_rows() + 1);
        assert_eq!(text.lines().last(), Some("nonneg"));
    }
}
