//! The basic kernel K, its boundary corrector g, the corrected kernel
//! K_h(x, t) = g(x) K((x-t)/h) / h, and the scalar functionals that feed the
//! LP constraint bounds.
//!
//! The default basic kernel is the quadriweight `(315/256)(1 - t^2)^4` on
//! [-1, 1]: the lowest-degree symmetric polynomial kernel whose derivatives
//! through order three vanish at the support edges, so the corrected kernel
//! is three times continuously differentiable in x. Working with a
//! polynomial keeps the corrector exact: g is evaluated through the
//! closed-form antiderivative of K, never through numeric quadrature, so LP
//! matrix entries are deterministic across platforms.

use crate::quad::integrate_adaptive;
use thiserror::Error;

/// Errors from kernel construction and evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("integration bounds reversed: a={a} > b={b}")]
    ReversedBounds { a: f64, b: f64 },
    #[error("evaluation point x={0} outside [0, 1]")]
    OutOfDomain(f64),
    #[error("bandwidth h={0} outside (0, 1/2)")]
    InvalidBandwidth(f64),
    #[error("beta={0} outside (0, 1]")]
    InvalidBeta(f64),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
}

/// A compactly supported polynomial kernel on [-1, 1] together with the
/// constants the LP bounds need: the peak value and the Lipschitz constants
/// of K, K' and K'' (i.e. the sups of |K'|, |K''|, |K'''|).
#[derive(Debug, Clone)]
pub struct BasicKernel {
    /// Coefficients of K on [-1, 1], ascending powers.
    coeffs: Vec<f64>,
    /// Peak value of K.
    pub k_max: f64,
    /// Lipschitz constant of K: sup |K'|.
    pub lip_k: f64,
    /// Lipschitz constant of K': sup |K''|.
    pub lip_k1: f64,
    /// Lipschitz constant of K'': sup |K'''|.
    pub lip_k2: f64,
}

impl BasicKernel {
    /// The quadriweight kernel (315/256)(1 - t^2)^4.
    pub fn quadriweight() -> Self {
        let c = 315.0 / 256.0;
        let coeffs = vec![c, 0.0, -4.0 * c, 0.0, 6.0 * c, 0.0, -4.0 * c, 0.0, c];
        Self::from_coeffs(coeffs).expect("quadriweight satisfies the kernel assumptions")
    }

    /// Builds a kernel from polynomial coefficients, checking that it is
    /// nonnegative, integrates to one, and is smooth across the support
    /// edges.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self, KernelError> {
        let proto = Self {
            coeffs,
            k_max: 0.0,
            lip_k: 0.0,
            lip_k1: 0.0,
            lip_k2: 0.0,
        };
        let mass = proto.antiderivative_raw(1.0) - proto.antiderivative_raw(-1.0);
        if (mass - 1.0).abs() > 1e-12 {
            return Err(KernelError::InvalidKernel(format!(
                "kernel mass is {mass}, expected 1"
            )));
        }
        for order in 0..=2 {
            for edge in [-1.0, 1.0] {
                let v = proto.eval_poly(edge, order);
                if v.abs() > 1e-12 {
                    return Err(KernelError::InvalidKernel(format!(
                        "K^({order})({edge}) = {v}, breaks smoothness at the support edge"
                    )));
                }
            }
        }
        for i in 0..=4096 {
            let t = -1.0 + 2.0 * i as f64 / 4096.0;
            if proto.eval_poly(t, 0) < -1e-12 {
                return Err(KernelError::InvalidKernel(format!(
                    "kernel is negative at t={t}"
                )));
            }
        }
        let k_max = sup_abs(|t| proto.eval_poly(t, 0), -1.0, 1.0);
        let lip_k = sup_abs(|t| proto.eval_poly(t, 1), -1.0, 1.0);
        let lip_k1 = sup_abs(|t| proto.eval_poly(t, 2), -1.0, 1.0);
        let lip_k2 = sup_abs(|t| proto.eval_poly(t, 3), -1.0, 1.0);
        Ok(Self {
            k_max,
            lip_k,
            lip_k1,
            lip_k2,
            ..proto
        })
    }

    /// K and its derivatives; exactly zero outside the support.
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        assert!(order <= 3, "derivative order {order} not supported");
        if t.abs() >= 1.0 {
            return 0.0;
        }
        self.eval_poly(t, order)
    }

    /// Polynomial value ignoring the support cut (used at the edges where
    /// the smoothness checks need the one-sided limit).
    fn eval_poly(&self, t: f64, order: usize) -> f64 {
        // Horner on the order-th derivative's coefficients.
        let n = self.coeffs.len();
        if order >= n {
            return 0.0;
        }
        let mut acc = 0.0;
        for k in (order..n).rev() {
            let mut c = self.coeffs[k];
            for j in 0..order {
                c *= (k - j) as f64;
            }
            acc = acc * t + c;
        }
        acc
    }

    /// The antiderivative I(t) = int_{-1}^t K, clipped to [0, 1] outside the
    /// support.
    pub fn antiderivative(&self, t: f64) -> f64 {
        if t <= -1.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            self.antiderivative_raw(t) - self.antiderivative_raw(-1.0)
        }
    }

    fn antiderivative_raw(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for k in (0..self.coeffs.len()).rev() {
            acc = acc * t + self.coeffs[k] / (k + 1) as f64;
        }
        acc * t
    }

    /// int_a^b K(t) dt in closed form, clipping the integrand support.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64, KernelError> {
        if a > b {
            return Err(KernelError::ReversedBounds { a, b });
        }
        Ok(self.antiderivative(b) - self.antiderivative(a))
    }
}

/// Grid sup of |f| over [a, b] refined by golden-section search around the
/// grid argmax. Safe for the piecewise-polynomial derivatives used here.
fn sup_abs<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const GRID: usize = 10_000;
    let step = (b - a) / GRID as f64;
    let mut best = 0.0f64;
    let mut best_t = a;
    for i in 0..=GRID {
        let t = a + step * i as f64;
        let v = f(t).abs();
        if v > best {
            best = v;
            best_t = t;
        }
    }
    // Golden-section refinement on |f| in the bracket around the grid max.
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut lo = (best_t - step).max(a);
    let mut hi = (best_t + step).min(b);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c).abs();
    let mut fd = f(d).abs();
    for _ in 0..120 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c).abs();
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d).abs();
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    best.max(fc).max(fd)
}

/// The boundary-corrected kernel K_h(x, t) = g(x) K((x-t)/h) / h with
/// bandwidth h in (0, 1/2). Immutable after construction.
#[derive(Debug, Clone)]
pub struct CorrectedKernel {
    base: BasicKernel,
    h: f64,
}

impl CorrectedKernel {
    pub fn new(base: BasicKernel, h: f64) -> Result<Self, KernelError> {
        if !(h > 0.0 && h < 0.5) {
            return Err(KernelError::InvalidBandwidth(h));
        }
        Ok(Self { base, h })
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn base(&self) -> &BasicKernel {
        &self.base
    }

    /// The corrector g(x) = (int_{(x-1)/h}^{x/h} K)^{-1}; identically 1 on
    /// [h, 1-h] and greater than 1 in the boundary strips.
    pub fn corrector(&self, x: f64) -> Result<f64, KernelError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(KernelError::OutOfDomain(x));
        }
        Ok(self.g(x))
    }

    fn g(&self, x: f64) -> f64 {
        if x >= self.h && x <= 1.0 - self.h {
            return 1.0;
        }
        let mass = self.base.antiderivative(x / self.h)
            - self.base.antiderivative((x - 1.0) / self.h);
        1.0 / mass
    }

    /// g'(x) = g^2(x) (K((x-1)/h) - K(x/h)) / h.
    fn g_prime(&self, x: f64) -> f64 {
        if x >= self.h && x <= 1.0 - self.h {
            return 0.0;
        }
        let g = self.g(x);
        let diff = self.base.eval((x - 1.0) / self.h, 0) - self.base.eval(x / self.h, 0);
        g * g * diff / self.h
    }

    /// g''(x) = 2 g g' (K((x-1)/h) - K(x/h)) / h + g^2 (K'((x-1)/h) - K'(x/h)) / h^2.
    fn g_second(&self, x: f64) -> f64 {
        if x >= self.h && x <= 1.0 - self.h {
            return 0.0;
        }
        let g = self.g(x);
        let gp = self.g_prime(x);
        let d0 = self.base.eval((x - 1.0) / self.h, 0) - self.base.eval(x / self.h, 0);
        let d1 = self.base.eval((x - 1.0) / self.h, 1) - self.base.eval(x / self.h, 1);
        2.0 * g * gp * d0 / self.h + g * g * d1 / (self.h * self.h)
    }

    /// K_h(x, t) and its x-derivatives up to order three. Near the
    /// boundaries the derivatives pick up corrector terms expressed through
    /// the endpoint differences K_h(x,1) - K_h(x,0) and their x-derivatives;
    /// in the interior everything collapses to K^(order)((x-t)/h) / h^(order+1).
    pub fn eval(&self, x: f64, t: f64, x_order: usize) -> f64 {
        assert!(x_order <= 3, "x-derivative order {x_order} not supported");
        debug_assert!((0.0..=1.0).contains(&x), "x={x} outside [0,1]");
        let h = self.h;
        let s = (x - t) / h;
        if s.abs() >= 1.0 {
            // Every term carries a K^(j)(s) factor.
            return 0.0;
        }
        let k0 = self.base.eval(s, 0);
        if x_order == 0 {
            return self.g(x) * k0 / h;
        }
        let interior = x >= h && x <= 1.0 - h;
        let k1 = self.base.eval(s, 1);
        let d0 = if interior { 0.0 } else { self.delta(x, 0) };
        let g0 = self.g(x);
        // inner1 = d/dx [K((x-t)/h)/h] / g-free part: K'/h^2 + K (K_h(x,1)-K_h(x,0)) / h
        let inner1 = k1 / (h * h) + k0 * d0 / h;
        if x_order == 1 {
            return g0 * inner1;
        }
        let k2 = self.base.eval(s, 2);
        let g1 = if interior { 0.0 } else { self.g_prime(x) };
        let d1 = if interior { 0.0 } else { self.delta(x, 1) };
        let inner2 = k2 / (h * h * h) + k1 * d0 / (h * h) + k0 * d1 / h;
        if x_order == 2 {
            return g1 * inner1 + g0 * inner2;
        }
        let k3 = self.base.eval(s, 3);
        let g2 = if interior { 0.0 } else { self.g_second(x) };
        let d2 = if interior { 0.0 } else { self.delta(x, 2) };
        let inner3 =
            k3 / (h * h * h * h) + k2 * d0 / (h * h * h) + 2.0 * k1 * d1 / (h * h) + k0 * d2 / h;
        g2 * inner1 + 2.0 * g1 * inner2 + g0 * inner3
    }

    /// d^order/dx^order [K_h(x,1) - K_h(x,0)].
    fn delta(&self, x: f64, order: usize) -> f64 {
        self.eval(x, 1.0, order) - self.eval(x, 0.0, order)
    }

    /// The mixed derivative d/du of d/dx K_h(x, u), used to certify the
    /// Lipschitz bound on the corrected-kernel derivative.
    pub fn eval_dudx(&self, x: f64, u: f64) -> f64 {
        let h = self.h;
        let s = (x - u) / h;
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let k1 = self.base.eval(s, 1);
        let k2 = self.base.eval(s, 2);
        let g0 = self.g(x);
        let g1 = self.g_prime(x);
        -g1 * k1 / (h * h) - g0 * k2 / (h * h * h)
    }
}

/// Kernel functionals entering the LP derivative bound and the rate
/// constants: the weighted moments C_beta, the corrector sup, and the
/// composite Lipschitz constants of the corrected kernel.
#[derive(Debug, Clone)]
pub struct KernelFunctionals {
    pub beta: f64,
    /// C_beta(K) = int |t|^beta K(t) dt.
    pub c_beta_k: f64,
    /// C_beta(K, K') = g_max K_max C_beta(K) + C_beta(K').
    pub c_beta_kkp: f64,
    /// sup g; equals 2 for any unimodal even kernel and any h < 1/2.
    pub g_max: f64,
    /// Peak kernel value, copied from the basic kernel for the rate
    /// constants.
    pub k_max: f64,
    /// Lipschitz constant of the corrected-kernel x-derivative in u,
    /// L_Ktilde = L_{K'} + L_K g_max K_max (bound scale g_max h^-3).
    pub l_ktilde: f64,
    /// Second-order analogue, L_Ktilde1 = L_{K''} + L_{K'} g_max K_max.
    pub l_ktilde1: f64,
    /// Constant for the third x-derivative bound g_max h^-4 L_Ktilde2.
    pub l_ktilde2: f64,
}

/// Computes the kernel functionals for a given Hoelder exponent. The
/// C_beta moments use adaptive quadrature split at t = 0 where |t|^beta has
/// a derivative singularity; g_max is maximized on a dense grid plus the
/// endpoints (it does not depend on h for h < 1/2, since the clipped kernel
/// mass at the edges is already the full half-mass).
pub fn compute_functionals(
    base: &BasicKernel,
    beta: f64,
) -> Result<KernelFunctionals, KernelError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(KernelError::InvalidBeta(beta));
    }
    let c_beta_k = integrate_adaptive(&|t: f64| t.abs().powf(beta) * base.eval(t, 0), -1.0, 0.0, 1e-12)
        + integrate_adaptive(&|t: f64| t.abs().powf(beta) * base.eval(t, 0), 0.0, 1.0, 1e-12);
    let c_beta_kp =
        integrate_adaptive(&|t: f64| t.abs().powf(beta) * base.eval(t, 1).abs(), -1.0, 0.0, 1e-12)
            + integrate_adaptive(
                &|t: f64| t.abs().powf(beta) * base.eval(t, 1).abs(),
                0.0,
                1.0,
                1e-12,
            );
    let reference = CorrectedKernel::new(base.clone(), 0.25)?;
    let mut g_max = 0.0f64;
    for i in 0..=2000 {
        let x = i as f64 / 2000.0;
        g_max = g_max.max(reference.g(x));
    }
    let c_beta_kkp = g_max * base.k_max * c_beta_k + c_beta_kp;
    let l_ktilde = base.lip_k1 + base.lip_k * g_max * base.k_max;
    let l_ktilde1 = base.lip_k2 + base.lip_k1 * g_max * base.k_max;
    let km = base.k_max;
    let l_ktilde2 = g_max
        * (base.lip_k2
            + 3.0 * base.lip_k1 * km * g_max
            + 3.0 * base.lip_k * g_max * km * km * (1.0 + 3.0 * g_max)
            + (base.lip_k * base.lip_k + 2.0 * g_max * g_max * km.powi(4)) * (1.0 + 2.0 * g_max));
    Ok(KernelFunctionals {
        beta,
        c_beta_k,
        c_beta_kkp,
        g_max,
        k_max: base.k_max,
        l_ktilde,
        l_ktilde1,
        l_ktilde2,
    })
}
