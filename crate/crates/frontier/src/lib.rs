//! Estimation of a Lipschitz production frontier from points sampled
//! uniformly under it.
//!
//! The estimate is a nonnegative combination of boundary-corrected kernel
//! bumps centered at the sample abscissae. Its coefficients solve a linear
//! program: cover every observation, keep the derivative within a
//! bandwidth-dependent budget, cap the coefficient mass per bin, and among
//! all such hulls take the one of smallest surface. With the bandwidth
//! schedule h ~ rho_tilde (log N / N)^{1/(1+beta)} the L1 error decays like
//! (log N / N)^{beta/(1+beta)}, and the `study` module measures exactly that
//! slope on seeded synthetic data.
//!
//! Module map:
//! - [`kernel`]: the basic kernel, the boundary corrector, derivatives, and
//!   the scalar functionals behind the LP bounds.
//! - [`model`]: frontier families with certified constants; uniform sampling
//!   of the hypograph.
//! - [`lp`]: LP assembly and the revised simplex solver, plus a grid-search
//!   oracle for tiny instances.
//! - [`estimator`]: evaluation of the fitted frontier, surface and L1
//!   functionals, regularity diagnostics.
//! - [`study`]: seeded convergence experiments, the bandwidth schedule, the
//!   rate fit, and the theoretical constants.

pub mod estimator;
pub mod kernel;
pub mod lp;
pub mod model;
pub mod quad;
pub mod study;
