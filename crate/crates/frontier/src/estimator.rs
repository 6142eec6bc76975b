//! Evaluation of the fitted frontier, its surface and L1 functionals, and
//! regularity diagnostics.

use crate::kernel::CorrectedKernel;
use crate::model::FrontierFunction;
use crate::quad::{panel_grid, GaussLegendre};
use serde::Serialize;

/// The fitted frontier: solved coefficients over the sample centers with a
/// corrected kernel. Immutable; evaluation is pure.
#[derive(Debug, Clone)]
pub struct FrontierEstimate {
    centers: Vec<f64>,
    alpha: Vec<f64>,
    kernel: CorrectedKernel,
}

/// Surface functionals of the estimate: the coefficient sum (the LP
/// objective) and the exact integral of the estimate over [0, 1].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfaceSummary {
    pub sum_alpha: f64,
    pub integral: f64,
}

/// L1 distance split per |u| = u - 2 u 1{u<0}: `l1` is the full distance,
/// `signed` is int (fhat - f), `negative_part` is int (f - fhat) over
/// {fhat < f}; l1 = signed + 2 negative_part identically.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct L1Breakdown {
    pub l1: f64,
    pub signed: f64,
    pub negative_part: f64,
}

/// Regularity audit of the estimate derivative against a stated bound.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzAudit {
    /// Grid sup of |fhat'| over [0,1] (10^4 uniform points plus centers).
    pub max_abs_deriv: f64,
    /// Fraction of grid points violating the bound.
    pub violation_fraction: f64,
    /// Max |fhat'| over the LP constraint points 0, X_1..X_N, 1.
    pub max_at_constraints: f64,
    pub bound: f64,
}

impl FrontierEstimate {
    /// Builds an estimate from sorted centers and their coefficients.
    pub fn new(centers: Vec<f64>, alpha: Vec<f64>, kernel: CorrectedKernel) -> Self {
        assert_eq!(centers.len(), alpha.len(), "one coefficient per center");
        assert!(
            centers.windows(2).all(|w| w[0] <= w[1]),
            "centers must be sorted"
        );
        Self {
            centers,
            alpha,
            kernel,
        }
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn kernel(&self) -> &CorrectedKernel {
        &self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.kernel.bandwidth()
    }

    /// Sum of coefficients (the LP objective for this estimate).
    pub fn coefficient_sum(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// fhat(x) for order 0, fhat'(x) for order 1. Only centers with
    /// |x - X_i| < h contribute.
    pub fn eval(&self, x: f64, order: usize) -> f64 {
        assert!(order <= 1, "only the value and first derivative are exposed");
        let h = self.kernel.bandwidth();
        let lo = self.centers.partition_point(|&t| t <= x - h);
        let hi = self.centers.partition_point(|&t| t < x + h);
        let mut acc = 0.0;
        for i in lo..hi {
            let a = self.alpha[i];
            if a != 0.0 {
                acc += a * self.kernel.eval(x, self.centers[i], order);
            }
        }
        acc
    }

    /// Evaluates at many sorted points with a sliding center window; one
    /// pass over points and centers.
    pub fn eval_sorted(&self, xs: &[f64], order: usize) -> Vec<f64> {
        assert!(order <= 1);
        debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        let h = self.kernel.bandwidth();
        let mut lo = 0usize;
        let mut hi = 0usize;
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            while lo < self.centers.len() && self.centers[lo] <= x - h {
                lo += 1;
            }
            if hi < lo {
                hi = lo;
            }
            while hi < self.centers.len() && self.centers[hi] < x + h {
                hi += 1;
            }
            let mut acc = 0.0;
            for i in lo..hi {
                let a = self.alpha[i];
                if a != 0.0 {
                    acc += a * self.kernel.eval(x, self.centers[i], order);
                }
            }
            out.push(acc);
        }
        out
    }

    /// Quadrature breakpoints of the estimate: kernel support edges around
    /// every center plus the corrector seams.
    fn breakpoints(&self) -> Vec<f64> {
        let h = self.kernel.bandwidth();
        let mut pts = Vec::with_capacity(2 * self.centers.len() + 4);
        for &c in &self.centers {
            pts.push(c - h);
            pts.push(c + h);
        }
        pts.push(h);
        pts.push(1.0 - h);
        pts
    }

    /// (sum alpha, int_0^1 fhat) with panels at every kernel breakpoint; the
    /// integrand is piecewise polynomial away from the boundary strips, so
    /// the composite rule is effectively exact.
    pub fn surface(&self) -> SurfaceSummary {
        let bp = panel_grid(0.0, 1.0, self.breakpoints());
        let rule = GaussLegendre::new(12);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in bp.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                nodes.push(x);
                weights.push(wt);
            }
        }
        let vals = self.eval_sorted(&nodes, 0);
        let integral = vals
            .iter()
            .zip(&weights)
            .map(|(v, w)| v * w)
            .sum();
        SurfaceSummary {
            sum_alpha: self.coefficient_sum(),
            integral,
        }
    }

    /// L1 distance to a true frontier on a composite grid of at least
    /// 20 max(N, 1/h) panels, refined with the kernel breakpoints, the
    /// frontier kinks, and the sign crossings of fhat - f (located by
    /// bisection so the |.| kink falls on a panel edge). The three reported
    /// integrals share one quadrature pass, so the split identity holds to
    /// rounding.
    pub fn l1_error(&self, f: &FrontierFunction) -> L1Breakdown {
        let h = self.kernel.bandwidth();
        let n_min = 20 * (self.centers.len().max((1.0 / h).ceil() as usize));
        let mut candidates = self.breakpoints();
        candidates.extend(f.kinks());
        for i in 1..n_min {
            candidates.push(i as f64 / n_min as f64);
        }
        let coarse = panel_grid(0.0, 1.0, candidates);
        let diff = |x: f64| self.eval(x, 0) - f.eval(x);
        let mut crossings = Vec::new();
        for w in coarse.windows(2) {
            let (da, db) = (diff(w[0]), diff(w[1]));
            if da == 0.0 || da.signum() == db.signum() {
                continue;
            }
            let (mut lo, mut hi) = (w[0], w[1]);
            let mut dlo = da;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let dm = diff(mid);
                if dm == 0.0 {
                    lo = mid;
                    break;
                }
                if dm.signum() == dlo.signum() {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
            }
            crossings.push(0.5 * (lo + hi));
        }
        let mut all = coarse;
        all.extend(crossings);
        let bp = panel_grid(0.0, 1.0, all);
        let rule = GaussLegendre::new(5);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in bp.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                nodes.push(x);
                weights.push(wt);
            }
        }
        let vals = self.eval_sorted(&nodes, 0);
        let mut l1 = 0.0;
        let mut signed = 0.0;
        let mut negative_part = 0.0;
        for ((x, w), fhat) in nodes.iter().zip(&weights).zip(&vals) {
            let diff = fhat - f.eval(*x);
            l1 += w * diff.abs();
            signed += w * diff;
            if diff < 0.0 {
                negative_part += w * (-diff);
            }
        }
        L1Breakdown {
            l1,
            signed,
            negative_part,
        }
    }

    /// Max |fhat'| over a 10^4-point uniform grid plus the constraint points
    /// 0, X_1..X_N, 1, compared against `bound`.
    pub fn lipschitz_audit(&self, bound: f64) -> LipschitzAudit {
        const GRID: usize = 10_000;
        let mut xs: Vec<f64> = (0..=GRID).map(|i| i as f64 / GRID as f64).collect();
        xs.extend_from_slice(&self.centers);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let derivs = self.eval_sorted(&xs, 1);
        let mut max_abs = 0.0f64;
        let mut violations = 0usize;
        for d in &derivs {
            let a = d.abs();
            max_abs = max_abs.max(a);
            if a > bound {
                violations += 1;
            }
        }
        let mut constraint_points = vec![0.0];
        constraint_points.extend_from_slice(&self.centers);
        constraint_points.push(1.0);
        let at_constraints = self.eval_sorted(&constraint_points, 1);
        let max_at_constraints = at_constraints.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        LipschitzAudit {
            max_abs_deriv: max_abs,
            violation_fraction: violations as f64 / derivs.len() as f64,
            max_at_constraints,
            bound,
        }
    }

    /// Serializes the coefficients as CSV (`x,alpha`, 17 significant
    /// digits).
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.centers.len() * 48 + 8);
        out.push_str("x,alpha\n");
        for (x, a) in self.centers.iter().zip(&self.alpha) {
            out.push_str(&format!("{:.16e},{:.16e}\n", x, a));
        }
        out
    }
}

/// Certified bound on the max of a C^2 function over an interval from its
/// endpoint values and a second-derivative cap:
/// max |g| <= max(|g(0)|, |g(width)|) + width^2 / 8 * sup |g''|.
pub fn interval_max_bound(g0: f64, g1: f64, width: f64, max_second_deriv: f64) -> f64 {
    assert!(width > 0.0, "interval width must be positive");
    assert!(max_second_deriv >= 0.0, "curvature cap must be nonnegative");
    g0.abs().max(g1.abs()) + width * width / 8.0 * max_second_deriv
}
