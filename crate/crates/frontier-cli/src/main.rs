//! Command-line front end: generate samples, fit the frontier LP, run
//! convergence studies. Every command takes one JSON config file, writes
//! deterministic CSV/JSON outputs (atomically, temp-then-rename), and echoes
//! the resolved config in each JSON summary.
//!
//! Exit codes: 0 success, 2 config error, 3 infeasible/solver failure,
//! 4 I/O error.

mod svg;

use clap::{Args, Parser, Subcommand};
use frontier::estimator::FrontierEstimate;
use frontier::kernel::{compute_functionals, BasicKernel, CorrectedKernel};
use frontier::lp::{build_frontier_lp, solve, LpBuildParams, SolveStatus};
use frontier::model::{
    make_frontier, sample_from_csv, sample_support, sample_to_csv, FrontierFunction,
    FrontierSpec, Sample,
};
use frontier::study::{
    bandwidth_schedule, cell_seed, report_summary_json, report_to_csv, run_study, StudyConfig,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "frontier", version, about = "Lipschitz frontier estimation via linear programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sample uniform under a frontier and write sample.csv plus
    /// a JSON sidecar with the frontier constants.
    Gen(CommonArgs),
    /// Fit the frontier LP to a sample file; writes estimate.csv,
    /// estimate.json and fit_summary.json.
    Fit(CommonArgs),
    /// Run a seeded convergence study; writes study.csv and
    /// study_summary.json.
    Study(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file for the subcommand.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write static SVG plots.
    #[arg(long)]
    plot: bool,
    /// Override the seed in the config (gen: seed, study: base_seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the study sweep (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Study(args) => cmd_study(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("frontier: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

// ---------------------------------------------------------------- helpers

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Atomic write: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot rename to {}: {e}", path.display())))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

// -------------------------------------------------------------------- gen

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenConfig {
    frontier: FrontierSpec,
    n: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct GenSidecar<'a> {
    frontier: &'a FrontierSpec,
    n: usize,
    seed: u64,
    f_min: f64,
    f_max: f64,
    beta: f64,
    l_f_beta: f64,
    c_f: f64,
}

fn cmd_gen(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: GenConfig = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if cfg.n == 0 {
        return Err(CliError::Config("n must be positive".into()));
    }
    let frontier = make_frontier(&cfg.frontier).map_err(|e| CliError::Config(e.to_string()))?;
    let sample = sample_support(&frontier, cfg.n, cfg.seed);
    ensure_out_dir(&args.out)?;
    write_atomic(&args.out.join("sample.csv"), &sample_to_csv(&sample))?;
    let sidecar = GenSidecar {
        frontier: &cfg.frontier,
        n: cfg.n,
        seed: cfg.seed,
        f_min: frontier.f_min,
        f_max: frontier.f_max,
        beta: frontier.beta,
        l_f_beta: frontier.l_f_beta,
        c_f: frontier.c_f,
    };
    write_atomic(&args.out.join("sample.json"), &json_line(&sidecar))?;
    if args.plot {
        let plot = plot_points(&sample, Some(&frontier), None);
        write_atomic(&args.out.join("sample.svg"), &plot)?;
    }
    Ok(())
}

// -------------------------------------------------------------------- fit

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitConfig {
    /// Path to the sample CSV; a `.json` sidecar next to it supplies the
    /// frontier constants unless they are given here.
    sample: PathBuf,
    #[serde(default)]
    h: Option<f64>,
    #[serde(default = "default_c_alpha_rule")]
    c_alpha_rule: f64,
    #[serde(default)]
    l_f_beta: Option<f64>,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default)]
    f_max: Option<f64>,
    /// Bandwidth constants used only when `h` is absent.
    #[serde(default = "default_rho")]
    rho: f64,
    #[serde(default)]
    rho_tilde: Option<f64>,
}

fn default_c_alpha_rule() -> f64 {
    6.5
}

fn default_rho() -> f64 {
    0.5
}

#[derive(Debug, Serialize)]
struct FitEcho {
    sample: PathBuf,
    h: f64,
    c_alpha_rule: f64,
    c_alpha: f64,
    l_f_beta: f64,
    beta: f64,
    f_max: f64,
}

#[derive(Debug, Serialize)]
struct EstimateSidecar {
    h: f64,
    kernel: &'static str,
    n: usize,
    objective: f64,
}

#[derive(Debug, Serialize)]
struct FitSummary {
    objective: Option<f64>,
    status: String,
    surface_sum: Option<f64>,
    surface_integral: Option<f64>,
    max_deriv_at_constraints: Option<f64>,
    deriv_bound: f64,
    n: usize,
    config: FitEcho,
}

#[derive(Debug, Deserialize)]
struct SidecarIn {
    frontier: Option<FrontierSpec>,
    f_max: Option<f64>,
    beta: Option<f64>,
    l_f_beta: Option<f64>,
}

fn cmd_fit(args: &CommonArgs) -> Result<(), CliError> {
    let cfg: FitConfig = read_config(&args.config)?;
    let text = std::fs::read_to_string(&cfg.sample)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", cfg.sample.display())))?;
    let sample = sample_from_csv(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let n = sample.len();

    // Constants come from the config when present, otherwise the sidecar.
    let sidecar: Option<SidecarIn> = {
        let path = cfg.sample.with_extension("json");
        match std::fs::read_to_string(&path) {
            Ok(text) => Some(
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            ),
            Err(_) => None,
        }
    };
    let require = |own: Option<f64>, side: Option<f64>, name: &str| -> Result<f64, CliError> {
        own.or(side).ok_or_else(|| {
            CliError::Config(format!(
                "{name} missing: set it in the config or provide the sample sidecar"
            ))
        })
    };
    let side = sidecar.as_ref();
    let f_max = require(cfg.f_max, side.and_then(|s| s.f_max), "f_max")?;
    let beta = require(cfg.beta, side.and_then(|s| s.beta), "beta")?;
    let l_f_beta = require(cfg.l_f_beta, side.and_then(|s| s.l_f_beta), "l_f_beta")?;
    let h = match cfg.h {
        Some(h) => h,
        None => {
            let rho_tilde = cfg
                .rho_tilde
                .unwrap_or(0.8 * cfg.rho.powf(-1.0 / (1.0 + beta)));
            bandwidth_schedule(n, rho_tilde, beta).map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    let frontier_spec = side.and_then(|s| s.frontier.clone());

    let base = BasicKernel::quadriweight();
    let functionals =
        compute_functionals(&base, beta).map_err(|e| CliError::Config(e.to_string()))?;
    let c_alpha = cfg.c_alpha_rule * f_max;
    let params = LpBuildParams::new(h, c_alpha, f_max, l_f_beta, functionals)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let lp = build_frontier_lp(&sample, &params, &base)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let sol = solve(&lp, 1e-9).map_err(|e| CliError::Solver(e.to_string()))?;

    ensure_out_dir(&args.out)?;
    let echo = FitEcho {
        sample: cfg.sample.clone(),
        h,
        c_alpha_rule: cfg.c_alpha_rule,
        c_alpha,
        l_f_beta,
        beta,
        f_max,
    };
    if sol.status != SolveStatus::Optimal {
        let summary = FitSummary {
            objective: None,
            status: sol.status.to_string(),
            surface_sum: None,
            surface_integral: None,
            max_deriv_at_constraints: None,
            deriv_bound: lp.deriv_bound,
            n,
            config: echo,
        };
        write_atomic(&args.out.join("fit_summary.json"), &json_line(&summary))?;
        return Err(CliError::Solver(format!(
            "LP did not reach an optimum: {}",
            sol.status
        )));
    }

    let kernel =
        CorrectedKernel::new(base, h).map_err(|e| CliError::Config(e.to_string()))?;
    let estimate = FrontierEstimate::new(sample.x.clone(), sol.alpha.clone(), kernel);
    let surface = estimate.surface();
    let max_deriv = lp
        .deriv_values(&sol.alpha)
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()));

    write_atomic(&args.out.join("estimate.csv"), &estimate.to_csv())?;
    write_atomic(
        &args.out.join("estimate.json"),
        &json_line(&EstimateSidecar {
            h,
            kernel: "quadriweight",
            n,
            objective: sol.objective_value,
        }),
    )?;
    let summary = FitSummary {
        objective: Some(sol.objective_value),
        status: sol.status.to_string(),
        surface_sum: Some(surface.sum_alpha),
        surface_integral: Some(surface.integral),
        max_deriv_at_constraints: Some(max_deriv),
        deriv_bound: lp.deriv_bound,
        n,
        config: echo,
    };
    write_atomic(&args.out.join("fit_summary.json"), &json_line(&summary))?;

    if args.plot {
        let truth = frontier_spec
            .as_ref()
            .and_then(|spec| make_frontier(spec).ok());
        let plot = plot_points(&sample, truth.as_ref(), Some(&estimate));
        write_atomic(&args.out.join("fit.svg"), &plot)?;
    }
    Ok(())
}

// ------------------------------------------------------------------ study

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StudyFileConfig {
    n_grid: Vec<usize>,
    replications: usize,
    #[serde(default = "default_rho")]
    rho: f64,
    #[serde(default)]
    rho_tilde: Option<f64>,
    #[serde(default = "default_beta")]
    beta: f64,
    frontier: FrontierSpec,
    #[serde(default = "default_c_alpha_rule")]
    c_alpha_rule: f64,
    base_seed: u64,
    /// Record wall-clock per row in the CSV `ms` column. Off by default:
    /// timings are not deterministic, and study outputs are byte-identical
    /// across reruns unless this is requested.
    #[serde(default)]
    timings: bool,
}

fn default_beta() -> f64 {
    1.0
}

fn cmd_study(args: &CommonArgs) -> Result<(), CliError> {
    let mut file_cfg: StudyFileConfig = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        file_cfg.base_seed = seed;
    }
    let cfg = StudyConfig {
        n_grid: file_cfg.n_grid.clone(),
        replications: file_cfg.replications,
        rho: file_cfg.rho,
        rho_tilde: file_cfg
            .rho_tilde
            .unwrap_or(0.8 * file_cfg.rho.powf(-1.0 / (1.0 + file_cfg.beta))),
        beta: file_cfg.beta,
        frontier: file_cfg.frontier.clone(),
        c_alpha_rule: file_cfg.c_alpha_rule,
        base_seed: file_cfg.base_seed,
    };

    let run = || run_study(&cfg);
    let report = match args.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
            pool.install(run)
        }
        None => run(),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;

    ensure_out_dir(&args.out)?;
    write_atomic(
        &args.out.join("study.csv"),
        &report_to_csv(&report, file_cfg.timings),
    )?;
    write_atomic(&args.out.join("study_summary.json"), &report_summary_json(&report))?;

    if args.plot {
        let frontier =
            make_frontier(&cfg.frontier).map_err(|e| CliError::Config(e.to_string()))?;
        write_atomic(
            &args.out.join("study_fit.svg"),
            &plot_chosen_cell(&cfg, &frontier)?,
        )?;
        write_atomic(&args.out.join("study_rate.svg"), &plot_rate(&report))?;
    }
    Ok(())
}

/// Re-runs the largest-N, first-replication cell and plots sample, truth and
/// estimate together.
fn plot_chosen_cell(cfg: &StudyConfig, frontier: &FrontierFunction) -> Result<String, CliError> {
    let n = *cfg.n_grid.last().expect("validated nonempty");
    let seed = cell_seed(cfg.base_seed, n, 0);
    let h = bandwidth_schedule(n, cfg.rho_tilde, cfg.beta)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let sample = sample_support(frontier, n, seed);
    let base = BasicKernel::quadriweight();
    let functionals =
        compute_functionals(&base, cfg.beta).map_err(|e| CliError::Config(e.to_string()))?;
    let params = LpBuildParams::new(
        h,
        cfg.c_alpha_rule * frontier.f_max,
        frontier.f_max,
        frontier.l_f_beta,
        functionals,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let lp = build_frontier_lp(&sample, &params, &base)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let sol = solve(&lp, 1e-9).map_err(|e| CliError::Solver(e.to_string()))?;
    if sol.status != SolveStatus::Optimal {
        return Err(CliError::Solver(format!(
            "plot cell (N={n}, rep=0) did not solve: {}",
            sol.status
        )));
    }
    let kernel = CorrectedKernel::new(base, h).map_err(|e| CliError::Config(e.to_string()))?;
    let estimate = FrontierEstimate::new(sample.x.clone(), sol.alpha, kernel);
    Ok(plot_points(&sample, Some(frontier), Some(&estimate)))
}

fn plot_points(
    sample: &Sample,
    frontier: Option<&FrontierFunction>,
    estimate: Option<&FrontierEstimate>,
) -> String {
    let mut y_max = sample.y.iter().cloned().fold(0.0f64, f64::max);
    let grid: Vec<f64> = (0..=600).map(|i| i as f64 / 600.0).collect();
    let truth_curve: Option<Vec<(f64, f64)>> =
        frontier.map(|f| grid.iter().map(|&x| (x, f.eval(x))).collect());
    let est_curve: Option<Vec<(f64, f64)>> =
        estimate.map(|e| grid.iter().map(|&x| (x, e.eval(x, 0))).collect());
    for curve in truth_curve.iter().chain(est_curve.iter()) {
        for &(_, y) in curve {
            y_max = y_max.max(y);
        }
    }
    let mut plot = svg::Plot::new((0.0, 1.0), (0.0, 1.08 * y_max), false, false);
    let pts: Vec<(f64, f64)> = sample.x.iter().cloned().zip(sample.y.iter().cloned()).collect();
    plot.scatter(&pts, "#555555", 2.0);
    let mut legend: Vec<(&str, &str)> = vec![("sample", "#555555")];
    if let Some(curve) = &truth_curve {
        plot.polyline(curve, svg::color(2), 2.0);
        legend.push(("true frontier", svg::color(2)));
    }
    if let Some(curve) = &est_curve {
        plot.polyline(curve, svg::color(0), 2.0);
        legend.push(("estimate", svg::color(0)));
    }
    plot.legend(&legend);
    plot.render("Frontier estimate", "x", "y")
}

fn plot_rate(report: &frontier::study::StudyReport) -> String {
    // mean L1 per N level over optimal rows
    let mut levels: Vec<(f64, f64)> = Vec::new();
    for &n in &report.config.n_grid {
        let vals: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.n == n && r.status == "optimal")
            .map(|r| r.l1)
            .collect();
        if !vals.is_empty() {
            let nf = n as f64;
            levels.push((nf.ln() / nf, vals.iter().sum::<f64>() / vals.len() as f64));
        }
    }
    let (x_lo, x_hi) = levels
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(x, _)| {
            (lo.min(x), hi.max(x))
        });
    let (y_lo, y_hi) = levels
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    let mut plot = svg::Plot::new(
        (x_lo * 0.7, x_hi * 1.4),
        (y_lo * 0.6, y_hi * 1.6),
        true,
        true,
    );
    // fitted line through the mean point in log space
    let slope = report.fitted_slope;
    let (mx, my) = levels.iter().fold((0.0, 0.0), |(ax, ay), &(x, y)| {
        (ax + x.ln() / levels.len() as f64, ay + y.ln() / levels.len() as f64)
    });
    let line = |s: f64| -> Vec<(f64, f64)> {
        [x_lo * 0.7, x_hi * 1.4]
            .iter()
            .map(|&x| (x, (my + s * (x.ln() - mx)).exp()))
            .collect()
    };
    plot.polyline(&line(slope), svg::color(0), 2.0);
    plot.polyline(&line(0.5), svg::color(2), 1.5);
    plot.scatter(&levels, "#333333", 4.0);
    plot.legend(&[
        ("mean L1 error", "#333333"),
        ("fitted slope", svg::color(0)),
        ("slope 1/2 reference", svg::color(2)),
    ]);
    plot.render(
        &format!("L1 convergence (slope {:.3})", slope),
        "log N / N",
        "mean L1 error",
    )
}
