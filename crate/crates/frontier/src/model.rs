//! True frontier functions with certified constants and uniform sampling
//! from the support S = {(x, y) : 0 <= x <= 1, 0 <= y <= f(x)}.
//!
//! Frontier constants (f_min, f_max, the Lipschitz constant, the mean C_f)
//! are analytic for the built-in families, not estimated: the estimation
//! method assumes the smoothness constants known.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("frontier must stay positive: min value {0} <= 0")]
    NonPositiveFrontier(f64),
    #[error("frontier spec invalid: {0}")]
    InvalidSpec(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("malformed sample file: {0}")]
    MalformedFile(String),
}

/// Serializable description of a frontier, as accepted by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrontierSpec {
    /// f(x) = c.
    Constant { params: Vec<f64> },
    /// f(x) = a + b sin(2 pi x), params [a, b].
    Sine { params: Vec<f64> },
    /// Values at k+1 equispaced knots over [0, 1], linearly interpolated.
    PiecewiseLinear { params: Vec<f64> },
}

/// A frontier f on [0, 1] with certified constants: positive bounds
/// f_min <= f <= f_max, the Hoelder exponent beta with constant L, and the
/// mean C_f = int_0^1 f.
#[derive(Debug, Clone)]
pub struct FrontierFunction {
    spec: FrontierSpec,
    pub f_min: f64,
    pub f_max: f64,
    pub beta: f64,
    pub l_f_beta: f64,
    pub c_f: f64,
}

impl FrontierFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match &self.spec {
            FrontierSpec::Constant { params } => params[0],
            FrontierSpec::Sine { params } => {
                params[0] + params[1] * (2.0 * std::f64::consts::PI * x).sin()
            }
            FrontierSpec::PiecewiseLinear { params } => {
                let k = params.len() - 1;
                let pos = (x.clamp(0.0, 1.0)) * k as f64;
                let i = (pos.floor() as usize).min(k - 1);
                let frac = pos - i as f64;
                params[i] + (params[i + 1] - params[i]) * frac
            }
        }
    }

    pub fn spec(&self) -> &FrontierSpec {
        &self.spec
    }

    /// Interior kinks of the frontier (piecewise-linear knots); quadrature
    /// panels must split here.
    pub fn kinks(&self) -> Vec<f64> {
        match &self.spec {
            FrontierSpec::PiecewiseLinear { params } => {
                let k = params.len() - 1;
                (1..k).map(|i| i as f64 / k as f64).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// Builds a frontier from its spec, deriving the exact analytic constants.
/// All built-in families are 1-Lipschitz classes (beta = 1).
pub fn make_frontier(spec: &FrontierSpec) -> Result<FrontierFunction, ModelError> {
    match spec {
        FrontierSpec::Constant { params } => {
            let [c] = params[..] else {
                return Err(ModelError::InvalidSpec(
                    "constant frontier takes one parameter".into(),
                ));
            };
            if c <= 0.0 {
                return Err(ModelError::NonPositiveFrontier(c));
            }
            Ok(FrontierFunction {
                spec: spec.clone(),
                f_min: c,
                f_max: c,
                beta: 1.0,
                l_f_beta: 0.0,
                c_f: c,
            })
        }
        FrontierSpec::Sine { params } => {
            let [a, b] = params[..] else {
                return Err(ModelError::InvalidSpec(
                    "sine frontier takes parameters [a, b]".into(),
                ));
            };
            let f_min = a - b.abs();
            if f_min <= 0.0 {
                return Err(ModelError::NonPositiveFrontier(f_min));
            }
            Ok(FrontierFunction {
                spec: spec.clone(),
                f_min,
                f_max: a + b.abs(),
                beta: 1.0,
                l_f_beta: 2.0 * std::f64::consts::PI * b.abs(),
                c_f: a,
            })
        }
        FrontierSpec::PiecewiseLinear { params } => {
            if params.len() < 2 {
                return Err(ModelError::InvalidSpec(
                    "piecewise-linear frontier needs at least two knot values".into(),
                ));
            }
            let min = params.iter().cloned().fold(f64::INFINITY, f64::min);
            if min <= 0.0 {
                return Err(ModelError::NonPositiveFrontier(min));
            }
            let max = params.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let k = (params.len() - 1) as f64;
            let l = params
                .windows(2)
                .map(|w| (w[1] - w[0]).abs() * k)
                .fold(0.0, f64::max);
            let c_f = params.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() / k;
            Ok(FrontierFunction {
                spec: spec.clone(),
                f_min: min,
                f_max: max,
                beta: 1.0,
                l_f_beta: l,
                c_f,
            })
        }
    }
}

/// N observation pairs sorted by x, with the virtual endpoints X_0 = 0 and
/// X_{N+1} = 1 implicit in the spacing and LP-row conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
}

impl Sample {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Draws n points uniform on S by rejection from the box [0,1] x [0, f_max],
/// sorted by x. Deterministic given the seed: the generator is ChaCha8 with
/// a fixed stream, and the accept/reject sequence is replayed identically on
/// any platform.
pub fn sample_support(f: &FrontierFunction, n: usize, seed: u64) -> Sample {
    assert!(n >= 1, "sample size must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    while pairs.len() < n {
        let x: f64 = rng.gen();
        let y: f64 = rng.gen::<f64>() * f.f_max;
        if y <= f.eval(x) {
            pairs.push((x, y));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Sample {
        x: pairs.iter().map(|p| p.0).collect(),
        y: pairs.iter().map(|p| p.1).collect(),
        seed,
    }
}

/// Largest gap between consecutive sample x-values, including the virtual
/// endpoints X_0 = 0 and X_{N+1} = 1.
pub fn max_spacing(s: &Sample) -> Result<f64, ModelError> {
    if s.is_empty() {
        return Err(ModelError::EmptySample);
    }
    let mut prev = 0.0;
    let mut best = 0.0f64;
    for &x in &s.x {
        best = best.max(x - prev);
        prev = x;
    }
    Ok(best.max(1.0 - prev))
}

/// Writes the sample as CSV (`x,y` header, 17-significant-digit floats,
/// rows sorted by x).
pub fn sample_to_csv(s: &Sample) -> String {
    let mut out = String::with_capacity(s.len() * 48 + 4);
    out.push_str("x,y\n");
    for (x, y) in s.x.iter().zip(&s.y) {
        out.push_str(&format!("{:.16e},{:.16e}\n", x, y));
    }
    out
}

/// Parses a sample CSV written by [`sample_to_csv`]. The seed is not part
/// of the file; callers that need it carry it out of band.
pub fn sample_from_csv(text: &str) -> Result<Sample, ModelError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "x,y" => {}
        other => {
            return Err(ModelError::MalformedFile(format!(
                "expected header 'x,y', found {other:?}"
            )))
        }
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ModelError::MalformedFile(format!(
                "row {}: expected two fields",
                i + 2
            )));
        };
        let xv: f64 = a.trim().parse().map_err(|e| {
            ModelError::MalformedFile(format!("row {}: bad x ({e})", i + 2))
        })?;
        let yv: f64 = b.trim().parse().map_err(|e| {
            ModelError::MalformedFile(format!("row {}: bad y ({e})", i + 2))
        })?;
        x.push(xv);
        y.push(yv);
    }
    if x.is_empty() {
        return Err(ModelError::EmptySample);
    }
    if x.windows(2).any(|w| w[0] > w[1]) {
        return Err(ModelError::MalformedFile("rows not sorted by x".into()));
    }
    Ok(Sample { x, y, seed: 0 })
}
