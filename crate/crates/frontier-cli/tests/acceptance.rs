//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values and elapsed time (visible with `--nocapture`).
//!
//! Criteria 1-2 certify the corrected kernel, 3 the solver against an
//! exhaustive oracle, 4-5 the LP optimum's structural guarantees, 6 the
//! order-statistics spacing law, 7-8 the statistical behavior at desk
//! scale, 9 an algebraic identity of the L1 decomposition, and 10 the
//! byte-level determinism of the CLI study pipeline.

use frontier::estimator::FrontierEstimate;
use frontier::kernel::{compute_functionals, BasicKernel, CorrectedKernel};
use frontier::lp::{
    brute_force_solve, build_frontier_lp, solve, LpBuildParams, LpProblem, SolveStatus,
};
use frontier::model::{make_frontier, max_spacing, sample_support, FrontierSpec, Sample};
use frontier::quad::integrate_adaptive;
use frontier::study::{bandwidth_schedule, cell_seed, run_study, StudyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const K_MAX: f64 = 315.0 / 256.0;
const G_MAX: f64 = 2.0;

fn pass(criterion: usize, name: &str, detail: String, t0: Instant) {
    println!(
        "acceptance criterion {criterion} ({name}): PASS [{detail}] in {:.2}s",
        t0.elapsed().as_secs_f64()
    );
}

fn sine() -> frontier::model::FrontierFunction {
    make_frontier(&FrontierSpec::Sine {
        params: vec![1.0, 0.3],
    })
    .unwrap()
}

fn default_rho_tilde() -> f64 {
    0.8 * 0.5f64.powf(-0.5)
}

fn fit_sine(n: usize, seed: u64) -> (LpProblem, frontier::lp::LpSolution, FrontierEstimate) {
    let f = sine();
    let base = BasicKernel::quadriweight();
    let functionals = compute_functionals(&base, 1.0).unwrap();
    let h = bandwidth_schedule(n, default_rho_tilde(), 1.0).unwrap();
    let s = sample_support(&f, n, seed);
    let params =
        LpBuildParams::new(h, 6.5 * f.f_max, f.f_max, f.l_f_beta, functionals).unwrap();
    let lp = build_frontier_lp(&s, &params, &base).unwrap();
    let sol = solve(&lp, 1e-9).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal, "fit N={n} seed={seed}");
    let est = FrontierEstimate::new(
        s.x.clone(),
        sol.alpha.clone(),
        CorrectedKernel::new(base, h).unwrap(),
    );
    (lp, sol, est)
}

/// 1. Kernel identities: the corrected kernel integrates to one and its
/// x-derivative integrates to zero, for random x and all three bandwidths.
#[test]
fn criterion_1_kernel_identities() {
    let t0 = Instant::now();
    let base = BasicKernel::quadriweight();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_mass = 0.0f64;
    let mut worst_deriv = 0.0f64;
    for &h in &[0.05, 0.1, 0.25] {
        let kernel = CorrectedKernel::new(base.clone(), h).unwrap();
        for _ in 0..50 {
            let x: f64 = rng.gen();
            let mass = integrate_adaptive(&|u| kernel.eval(x, u, 0), 0.0, 1.0, 1e-10);
            let dmass = integrate_adaptive(&|u| kernel.eval(x, u, 1), 0.0, 1.0, 1e-10);
            worst_mass = worst_mass.max((mass - 1.0).abs());
            worst_deriv = worst_deriv.max(dmass.abs());
            assert!((mass - 1.0).abs() < 1e-8, "mass at x={x}, h={h}: {mass}");
            assert!(dmass.abs() < 1e-6, "derivative mass at x={x}, h={h}: {dmass}");
        }
    }
    pass(
        1,
        "kernel identities",
        format!("max |mass-1|={worst_mass:.2e}, max |dmass|={worst_deriv:.2e}"),
        t0,
    );
}

/// 2. Corrected-kernel derivative bounds hold with no violations on a
/// 2000 x 2000 grid for each bandwidth.
#[test]
fn criterion_2_derivative_bounds() {
    let t0 = Instant::now();
    let base = BasicKernel::quadriweight();
    let functionals = compute_functionals(&base, 1.0).unwrap();
    let mut tightest = f64::INFINITY;
    for &h in &[0.05, 0.1, 0.25] {
        let kernel = CorrectedKernel::new(base.clone(), h).unwrap();
        let mixed_bound = functionals.g_max * functionals.l_ktilde / (h * h * h);
        let third_bound = functionals.g_max * functionals.l_ktilde2 / (h * h * h * h);
        let mut sup_mixed = 0.0f64;
        let mut sup_third = 0.0f64;
        for i in 0..2000 {
            let x = i as f64 / 1999.0;
            for j in 0..2000 {
                let u = j as f64 / 1999.0;
                if (x - u).abs() >= h {
                    continue;
                }
                sup_mixed = sup_mixed.max(kernel.eval_dudx(x, u).abs());
                sup_third = sup_third.max(kernel.eval(x, u, 3).abs());
            }
        }
        assert!(
            sup_mixed <= mixed_bound,
            "h={h}: sup |d_u Ktilde| = {sup_mixed} > {mixed_bound}"
        );
        assert!(
            sup_third <= third_bound,
            "h={h}: sup |d^3_x K_h| = {sup_third} > {third_bound}"
        );
        tightest = tightest.min(mixed_bound / sup_mixed).min(third_bound / sup_third);
    }
    pass(
        2,
        "corrected-kernel derivative bounds",
        format!("bound/sup margin >= {tightest:.2}"),
        t0,
    );
}

/// 3. LP oracle equivalence on 50 random tiny instances plus the exact
/// single-point hand instance.
#[test]
fn criterion_3_lp_oracle_equivalence() {
    let t0 = Instant::now();
    let base = BasicKernel::quadriweight();
    let functionals = compute_functionals(&base, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = 1 + rng.gen_range(0..3usize);
        let h = 0.15 + 0.2 * rng.gen::<f64>();
        let (lo, hi) = if n == 1 {
            (h + 0.02, 0.98 - h)
        } else {
            (0.1, 0.9)
        };
        let mut x: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect();
        x.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let y: Vec<f64> = (0..n).map(|_| 0.05 + 0.9 * rng.gen::<f64>()).collect();
        let s = Sample { x, y, seed: 0 };
        let params =
            LpBuildParams::new(h, 6.5 * 1.3, 1.3, 1.0, functionals.clone()).unwrap();
        let lp = build_frontier_lp(&s, &params, &base).unwrap();
        let fast = solve(&lp, 1e-9).unwrap();
        let slow = brute_force_solve(&lp, 24).unwrap();
        assert_eq!(fast.status, slow.status, "trial {trial}");
        assert_eq!(fast.status, SolveStatus::Optimal, "trial {trial}");
        let gap = (fast.objective_value - slow.objective_value).abs();
        worst = worst.max(gap);
        assert!(gap <= 1e-4, "trial {trial}: gap {gap}");
    }
    // hand instance: alpha_1 = Y_1 h / (g(X_1) K(0))
    let s = Sample {
        x: vec![0.5],
        y: vec![0.5],
        seed: 0,
    };
    let params = LpBuildParams::new(0.25, 6.5, 1.0, 1.0, functionals).unwrap();
    let lp = build_frontier_lp(&s, &params, &base).unwrap();
    let sol = solve(&lp, 1e-9).unwrap();
    let expect = 0.5 * 0.25 / K_MAX;
    assert!(
        (sol.alpha[0] - expect).abs() <= 1e-9,
        "hand instance: {} vs {expect}",
        sol.alpha[0]
    );
    pass(
        3,
        "LP oracle equivalence",
        format!("worst objective gap {worst:.2e} over 50 instances"),
        t0,
    );
}

/// 4. Surface sandwich on 30 solved fits: the integral of the estimate
/// stays within the bin-cap corridor around the coefficient sum.
#[test]
fn criterion_4_surface_sandwich() {
    let t0 = Instant::now();
    let c_alpha = 6.5 * 1.3;
    let mut worst_rel = 0.0f64;
    for &n in &[500usize, 1000] {
        for rep in 0..15 {
            let seed = cell_seed(404, n, rep);
            let (lp, sol, est) = fit_sine(n, seed);
            let surf = est.surface();
            assert!((surf.sum_alpha - sol.objective_value).abs() < 1e-9);
            let diff = surf.integral - surf.sum_alpha;
            let lo = -2.0 * c_alpha * K_MAX * lp.h - 1e-8;
            let hi = 4.0 * c_alpha * (G_MAX - 1.0) * K_MAX * lp.h + 1e-8;
            assert!(
                diff >= lo && diff <= hi,
                "N={n} rep={rep}: {diff} outside [{lo}, {hi}]"
            );
            worst_rel = worst_rel.max(diff.abs() / hi);
        }
    }
    pass(
        4,
        "surface sandwich",
        format!("30/30 fits inside corridor, worst |diff|/hi = {worst_rel:.3}"),
        t0,
    );
}

/// 5. Every optimal fit covers all observations and obeys the derivative
/// cap at all N+2 constraint points, to 1e-8.
#[test]
fn criterion_5_cover_and_derivative_feasibility() {
    let t0 = Instant::now();
    let mut fits = 0;
    for &n in &[500usize, 1000] {
        for rep in 0..15 {
            let seed = cell_seed(505, n, rep);
            let (lp, sol, _) = fit_sine(n, seed);
            for (c, y) in lp.cover_values(&sol.alpha).iter().zip(&lp.y) {
                assert!(*c >= y - 1e-8, "cover violated: {c} < {y}");
            }
            let derivs = lp.deriv_values(&sol.alpha);
            assert_eq!(derivs.len(), lp.n() + 2);
            for d in derivs {
                assert!(
                    d.abs() <= lp.deriv_bound + 1e-8,
                    "derivative cap violated: |{d}| > {}",
                    lp.deriv_bound
                );
            }
            fits += 1;
        }
    }
    pass(
        5,
        "cover and derivative feasibility",
        format!("{fits}/30 optimal fits feasible at 1e-8"),
        t0,
    );
}

/// 6. Spacing law at N = 5000 under the unit box: the largest gap stays
/// below 5 f_max/f_min log N / N in at least 99% of 200 replications.
#[test]
fn criterion_6_spacing_law() {
    let t0 = Instant::now();
    let f = make_frontier(&FrontierSpec::Constant { params: vec![1.0] }).unwrap();
    let n = 5000usize;
    let c_x = 5.0 * f.f_max / f.f_min;
    let bound = c_x * (n as f64).ln() / n as f64;
    let mut ok = 0usize;
    for rep in 0..200 {
        let s = sample_support(&f, n, cell_seed(606, n, rep));
        if max_spacing(&s).unwrap() <= bound {
            ok += 1;
        }
    }
    assert!(ok >= 198, "only {ok}/200 under the spacing bound");
    pass(
        6,
        "spacing law",
        format!("{ok}/200 replications under C_X log N / N = {bound:.5}"),
        t0,
    );
}

/// 7. Convergence rate: the fitted log-log slope of the mean L1 error
/// against log N / N lands in [0.35, 0.65] (theory: 1/2), with at most 5%
/// solver failures at N >= 1000. The paper's asymptotic constants are not
/// reproducible as sharp numbers at desk scale; the slope substitutes.
#[test]
fn criterion_7_convergence_rate() {
    let t0 = Instant::now();
    let cfg = StudyConfig::default_sine();
    assert_eq!(cfg.n_grid, vec![250, 500, 1000, 2000, 4000]);
    assert_eq!(cfg.replications, 20);
    let report = run_study(&cfg).unwrap();
    let slope = report.fitted_slope;
    assert!(
        (0.35..=0.65).contains(&slope),
        "slope {slope} outside [0.35, 0.65]"
    );
    let big_rows: Vec<_> = report.rows.iter().filter(|r| r.n >= 1000).collect();
    let failures = big_rows.iter().filter(|r| r.status != "optimal").count();
    assert!(
        failures * 20 <= big_rows.len(),
        "{failures}/{} failures at N >= 1000",
        big_rows.len()
    );
    pass(
        7,
        "convergence rate",
        format!(
            "slope {slope:.3} +- {:.3}, {failures} failures at N >= 1000",
            report.slope_stderr
        ),
        t0,
    );
}

/// 8. Objective upper bound J* <= C_f + gamma h with
/// gamma = 2 L g_max C_beta(K), in at least 95% of 40 runs at N = 2000.
#[test]
fn criterion_8_objective_upper_bound() {
    let t0 = Instant::now();
    let f = sine();
    let base = BasicKernel::quadriweight();
    let functionals = compute_functionals(&base, 1.0).unwrap();
    let gamma = 2.0 * f.l_f_beta * functionals.g_max * functionals.c_beta_k;
    let n = 2000usize;
    let h = bandwidth_schedule(n, default_rho_tilde(), 1.0).unwrap();
    let bound = f.c_f + gamma * h.powf(f.beta);
    let mut ok = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for rep in 0..40 {
        let seed = cell_seed(808, n, rep);
        let s = sample_support(&f, n, seed);
        let params =
            LpBuildParams::new(h, 6.5 * f.f_max, f.f_max, f.l_f_beta, functionals.clone())
                .unwrap();
        let lp = build_frontier_lp(&s, &params, &base).unwrap();
        let sol = solve(&lp, 1e-9).unwrap();
        if sol.status == SolveStatus::Optimal && sol.objective_value <= bound {
            ok += 1;
        }
        worst = worst.max(sol.objective_value);
    }
    assert!(ok >= 38, "only {ok}/40 runs under the bound {bound}");
    pass(
        8,
        "objective upper bound",
        format!("{ok}/40 runs with J* <= {bound:.4} (max J* {worst:.4})"),
        t0,
    );
}

/// 9. L1 split identity |u| = u - 2u 1{{u<0}} holds to 1e-10 on every
/// computed fit.
#[test]
fn criterion_9_l1_split_identity() {
    let t0 = Instant::now();
    let f = sine();
    let mut worst = 0.0f64;
    for &(n, seed) in &[(200usize, 1u64), (200, 2), (600, 3), (600, 4), (1000, 5)] {
        let (_, _, est) = fit_sine(n, seed);
        let b = est.l1_error(&f);
        let resid = (b.l1 - (b.signed + 2.0 * b.negative_part)).abs();
        worst = worst.max(resid);
        assert!(resid < 1e-10, "N={n} seed={seed}: residual {resid}");
    }
    pass(
        9,
        "L1 split identity",
        format!("max residual {worst:.2e} over 5 fits"),
        t0,
    );
}

/// 10. Determinism: repeated CLI `study` invocations with the same config
/// produce byte-identical CSV/JSON outputs.
#[test]
fn criterion_10_study_determinism() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    std::fs::write(
        &cfg,
        r#"{ "n_grid": [120, 200, 340, 560], "replications": 3, "frontier": { "kind": "sine", "params": [1.0, 0.3] }, "base_seed": 42 }"#,
    )
    .unwrap();
    for out in ["a", "b"] {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_frontier"))
            .args(["study", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(out))
            .args(["--jobs", "2"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let read = |p: std::path::PathBuf| std::fs::read(p).unwrap();
    let csv_a = read(dir.path().join("a/study.csv"));
    assert_eq!(csv_a, read(dir.path().join("b/study.csv")));
    let json_a = read(dir.path().join("a/study_summary.json"));
    assert_eq!(json_a, read(dir.path().join("b/study_summary.json")));
    pass(
        10,
        "study determinism",
        format!("{} CSV bytes and {} JSON bytes identical", csv_a.len(), json_a.len()),
        t0,
    );
}
