//! Seeded convergence experiments: sweep sample sizes with the optimal
//! bandwidth schedule, fit the empirical L1 rate, and report the
//! theoretical constants next to it.
//!
//! Every (N, replication) cell derives its own seed from the base seed, so
//! cells are independent, reproducible, and order-insensitive; the sweep is
//! embarrassingly parallel and the report is a deterministic reduction.

use crate::estimator::FrontierEstimate;
use crate::kernel::{compute_functionals, BasicKernel, CorrectedKernel, KernelError};
use crate::lp::{build_frontier_lp, solve, LpBuildParams, LpError, SolveStatus};
use crate::model::{make_frontier, sample_support, FrontierFunction, FrontierSpec, ModelError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study config: {0}")]
    InvalidConfig(String),
    #[error("rate fit needs at least 4 sample-size levels with an optimal run, got {0}")]
    TooFewLevels(usize),
    #[error("sample size {0} too small for the bandwidth schedule (need n >= 3)")]
    SampleTooSmall(usize),
    #[error("frontier Lipschitz constant must be positive for the theory constants")]
    ZeroLipschitz,
    #[error("bandwidth window violated across the N grid: {0}")]
    BandwidthWindow(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Configuration of a convergence study.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Strictly increasing sample sizes; at least 4 levels for the rate fit.
    pub n_grid: Vec<usize>,
    pub replications: usize,
    /// Lower-rate constant rho in the bandwidth window.
    pub rho: f64,
    /// Bandwidth constant; must lie in (0, rho^{-1/(1+beta)}).
    pub rho_tilde: f64,
    pub beta: f64,
    pub frontier: FrontierSpec,
    /// C_alpha as a multiple of f_max (must exceed 6).
    pub c_alpha_rule: f64,
    pub base_seed: u64,
}

impl StudyConfig {
    /// The default desk-scale study: sine frontier, beta = 1, rho = 0.5,
    /// rho_tilde = 0.8 rho^{-1/2}.
    pub fn default_sine() -> Self {
        let rho: f64 = 0.5;
        let beta = 1.0;
        Self {
            n_grid: vec![250, 500, 1000, 2000, 4000],
            replications: 20,
            rho,
            rho_tilde: 0.8 * rho.powf(-1.0 / (1.0 + beta)),
            beta,
            frontier: FrontierSpec::Sine {
                params: vec![1.0, 0.3],
            },
            c_alpha_rule: 6.5,
            base_seed: 20240501,
        }
    }

    fn validate(&self) -> Result<(), StudyError> {
        if self.n_grid.len() < 4 {
            return Err(StudyError::InvalidConfig(
                "n_grid needs at least 4 levels".into(),
            ));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StudyError::InvalidConfig(
                "n_grid must be strictly increasing".into(),
            ));
        }
        if self.n_grid[0] < 3 {
            return Err(StudyError::InvalidConfig("n_grid entries must be >= 3".into()));
        }
        if self.replications == 0 {
            return Err(StudyError::InvalidConfig("replications must be >= 1".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(StudyError::InvalidConfig(format!(
                "beta={} outside (0, 1]",
                self.beta
            )));
        }
        if !(self.rho > 0.0) {
            return Err(StudyError::InvalidConfig("rho must be positive".into()));
        }
        let cap = self.rho.powf(-1.0 / (1.0 + self.beta));
        if !(self.rho_tilde > 0.0 && self.rho_tilde < cap) {
            return Err(StudyError::InvalidConfig(format!(
                "rho_tilde={} outside (0, rho^(-1/(1+beta))={cap})",
                self.rho_tilde
            )));
        }
        if self.c_alpha_rule <= 6.0 {
            return Err(StudyError::InvalidConfig(
                "c_alpha_rule must exceed 6".into(),
            ));
        }
        Ok(())
    }
}

/// One study cell outcome. `runtime_ms` is wall clock and excluded from
/// deterministic file output unless timings are requested.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    pub rep: usize,
    pub seed: u64,
    pub l1: f64,
    pub objective: f64,
    pub status: String,
    pub runtime_ms: u64,
}

/// Theorem-level constants evaluated for the configured instance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TheoryConstants {
    pub c12: f64,
    pub c4: f64,
    /// C_12 rho_tilde^beta + 2 C_4 rho_tilde^{-2}: the asymptotic
    /// coefficient of (log N / N)^{beta/(1+beta)}.
    pub rate_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub theory: TheoryConstants,
    /// Rows excluded from the fit because the solver did not reach optimal.
    pub non_optimal: usize,
    pub config: StudyConfig,
}

/// The optimal bandwidth schedule h = rho_tilde (log n / n)^{1/(1+beta)},
/// clipped into (0, 0.49].
pub fn bandwidth_schedule(n: usize, rho_tilde: f64, beta: f64) -> Result<f64, StudyError> {
    if n < 3 {
        return Err(StudyError::SampleTooSmall(n));
    }
    let nf = n as f64;
    let h = rho_tilde * (nf.ln() / nf).powf(1.0 / (1.0 + beta));
    Ok(h.min(0.49))
}

/// Deterministic per-cell seed: base_seed xor a mix of (n, replication).
pub fn cell_seed(base_seed: u64, n: usize, rep: usize) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    base_seed ^ splitmix64(splitmix64(n as u64) ^ (rep as u64).wrapping_mul(0xA24B_AED4_963E_E407))
}

/// Theorem constants for a configured instance:
/// C_12 = 2 L g_max C_beta(K,K') + 4 C_alpha (g_max - 1) K_max 1{beta=1},
/// C_4 = 2 L [ (2C_f/L)^{beta/(1+beta)} rho^{-2/(1+beta)}
///             + g_max C_beta(K,K') (2C_f/L)^{1/(1+beta)} ].
pub fn theory_constants(
    params: &LpBuildParams,
    frontier: &FrontierFunction,
    rho: f64,
    rho_tilde: f64,
) -> Result<TheoryConstants, StudyError> {
    let l = frontier.l_f_beta;
    if l <= 0.0 {
        return Err(StudyError::ZeroLipschitz);
    }
    if !(rho > 0.0) {
        return Err(StudyError::InvalidConfig("rho must be positive".into()));
    }
    let f = &params.functionals;
    let beta = params.beta;
    let indicator = if beta == 1.0 { 1.0 } else { 0.0 };
    let c12 = 2.0 * l * f.g_max * f.c_beta_kkp
        + 4.0 * params.c_alpha * (f.g_max - 1.0) * f.k_max * indicator;
    let ratio = 2.0 * frontier.c_f / l;
    let c4 = 2.0
        * l
        * (ratio.powf(beta / (1.0 + beta)) * rho.powf(-2.0 / (1.0 + beta))
            + f.g_max * f.c_beta_kkp * ratio.powf(1.0 / (1.0 + beta)));
    let rate_bound = c12 * rho_tilde.powf(beta) + 2.0 * c4 * rho_tilde.powi(-2);
    Ok(TheoryConstants {
        c12,
        c4,
        rate_bound,
    })
}

/// Runs the full sweep. Each cell samples, builds the LP with the scheduled
/// bandwidth, solves, and measures the L1 error; solver failures land in
/// their rows without aborting the sweep. Deterministic given the config,
/// regardless of worker count.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport, StudyError> {
    cfg.validate()?;
    let frontier = make_frontier(&cfg.frontier)?;
    let base = BasicKernel::quadriweight();
    let functionals = compute_functionals(&base, cfg.beta)?;
    let c_alpha = cfg.c_alpha_rule * frontier.f_max;

    assert_bandwidth_window(cfg)?;

    // Constant frontiers get a floored Lipschitz constant for the theory
    // constants (the LP itself uses the true constant).
    let l_for_theory = frontier.l_f_beta.max(1e-6);
    let mut theory_frontier = frontier.clone();
    theory_frontier.l_f_beta = l_for_theory;
    let h0 = bandwidth_schedule(cfg.n_grid[0], cfg.rho_tilde, cfg.beta)?;
    let theory_params = LpBuildParams::new(
        h0,
        c_alpha,
        frontier.f_max,
        l_for_theory,
        functionals.clone(),
    )?;
    let theory = theory_constants(&theory_params, &theory_frontier, cfg.rho, cfg.rho_tilde)?;

    let cells: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |rep| (n, rep)))
        .collect();

    let rows: Result<Vec<StudyRow>, StudyError> = cells
        .par_iter()
        .map(|&(n, rep)| run_cell(cfg, &frontier, &base, &functionals, c_alpha, n, rep))
        .collect();
    let rows = rows?;

    let non_optimal = rows.iter().filter(|r| r.status != "optimal").count();
    let (fitted_slope, slope_stderr) = fit_rate(&rows)?;
    Ok(StudyReport {
        rows,
        fitted_slope,
        slope_stderr,
        theory,
        non_optimal,
        config: cfg.clone(),
    })
}

fn run_cell(
    cfg: &StudyConfig,
    frontier: &FrontierFunction,
    base: &BasicKernel,
    functionals: &crate::kernel::KernelFunctionals,
    c_alpha: f64,
    n: usize,
    rep: usize,
) -> Result<StudyRow, StudyError> {
    let started = std::time::Instant::now();
    let seed = cell_seed(cfg.base_seed, n, rep);
    let h = bandwidth_schedule(n, cfg.rho_tilde, cfg.beta)?;
    let sample = sample_support(frontier, n, seed);
    let params = LpBuildParams::new(
        h,
        c_alpha,
        frontier.f_max,
        frontier.l_f_beta,
        functionals.clone(),
    )?;
    let lp = build_frontier_lp(&sample, &params, base)?;
    let (l1, objective, status) = match solve(&lp, 1e-9) {
        Ok(sol) if sol.status == SolveStatus::Optimal => {
            let kernel = CorrectedKernel::new(base.clone(), h)?;
            let estimate = FrontierEstimate::new(sample.x.clone(), sol.alpha.clone(), kernel);
            let l1 = estimate.l1_error(frontier).l1;
            (l1, sol.objective_value, "optimal".to_string())
        }
        Ok(sol) => (f64::NAN, f64::NAN, sol.status.to_string()),
        Err(LpError::Numerical(_)) => (f64::NAN, f64::NAN, "numerical_breakdown".to_string()),
        Err(e) => return Err(e.into()),
    };
    Ok(StudyRow {
        n,
        h,
        rep,
        seed,
        l1,
        objective,
        status,
        runtime_ms: started.elapsed().as_millis() as u64,
    })
}

/// Checks the rate window over the configured grid: log N/(N h^{1+beta})
/// stays bounded away from zero and log N/(N h^{1+beta/2}) decreases.
fn assert_bandwidth_window(cfg: &StudyConfig) -> Result<(), StudyError> {
    let mut prev_w2 = f64::INFINITY;
    for &n in &cfg.n_grid {
        let h = bandwidth_schedule(n, cfg.rho_tilde, cfg.beta)?;
        let nf = n as f64;
        let w1 = nf.ln() / (nf * h.powf(1.0 + cfg.beta));
        let w2 = nf.ln() / (nf * h.powf(1.0 + cfg.beta / 2.0));
        if w1 <= 1e-9 {
            return Err(StudyError::BandwidthWindow(format!(
                "log N/(N h^(1+beta)) = {w1} at N={n} is not bounded away from 0"
            )));
        }
        if w2 >= prev_w2 * (1.0 + 1e-12) {
            return Err(StudyError::BandwidthWindow(format!(
                "log N/(N h^(1+beta/2)) increased at N={n}"
            )));
        }
        prev_w2 = w2;
    }
    Ok(())
}

/// OLS of log(mean L1) on log(log N / N): rows with non-optimal status are
/// excluded; each N level contributes its replication mean. Returns the
/// slope and its standard error.
pub fn fit_rate(rows: &[StudyRow]) -> Result<(f64, f64), StudyError> {
    let mut by_n: Vec<(usize, f64, usize)> = Vec::new();
    for row in rows {
        if row.status != "optimal" || !row.l1.is_finite() {
            continue;
        }
        match by_n.iter_mut().find(|(n, _, _)| *n == row.n) {
            Some((_, sum, count)) => {
                *sum += row.l1;
                *count += 1;
            }
            None => by_n.push((row.n, row.l1, 1)),
        }
    }
    by_n.sort_by_key(|&(n, _, _)| n);
    if by_n.len() < 4 {
        return Err(StudyError::TooFewLevels(by_n.len()));
    }
    let pts: Vec<(f64, f64)> = by_n
        .iter()
        .map(|&(n, sum, count)| {
            let nf = n as f64;
            ((nf.ln() / nf).ln(), (sum / count as f64).ln())
        })
        .collect();
    Ok(ols_slope(&pts))
}

fn ols_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let df = (pts.len() as f64 - 2.0).max(1.0);
    let stderr = (rss / df / sxx).sqrt();
    (slope, stderr)
}

/// Study CSV: header `n,h,rep,seed,l1,objective,status,ms`. The ms column
/// is zero unless `include_timings` (wall clock would break byte-identical
/// reruns).
pub fn report_to_csv(report: &StudyReport, include_timings: bool) -> String {
    let mut out = String::from("n,h,rep,seed,l1,objective,status,ms\n");
    for r in &report.rows {
        let ms = if include_timings { r.runtime_ms } else { 0 };
        out.push_str(&format!(
            "{},{:.16e},{},{},{:.16e},{:.16e},{},{}\n",
            r.n, r.h, r.rep, r.seed, r.l1, r.objective, r.status, ms
        ));
    }
    out
}

/// JSON summary: slope, stderr, theory constants, config echo.
#[derive(Debug, Clone, Serialize)]
pub struct StudySummary<'a> {
    pub slope: f64,
    pub stderr: f64,
    pub non_optimal: usize,
    pub theory: TheoryConstants,
    pub config: &'a StudyConfig,
}

pub fn report_summary_json(report: &StudyReport) -> String {
    let summary = StudySummary {
        slope: report.fitted_slope,
        stderr: report.slope_stderr,
        non_optimal: report.non_optimal,
        theory: report.theory,
        config: &report.config,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    text
}
