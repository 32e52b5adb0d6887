//! Inversion-free covariance parameter estimation for stationary Gaussian
//! random fields observed on perturbed regular lattices.
//!
//! The estimator maximizes
//!
//! ```text
//! F_n(Y, phi, theta) = (1/n) * ( phi * Y'K(theta)Y - phi^2/2 * ||K(theta)||_F^2 )
//! ```
//!
//! which needs no Cholesky factorization or linear solve. The variance is
//! profiled out in closed form, leaving the range parameters to be found by
//! maximizing `G_n = Y'KY / ||K||_F`.
//!
//! Modules:
//! - [`kernels`]: correlation families, anisotropy and the Bessel function.
//! - [`sampling`]: perturbed lattices and the spectral field simulator.
//! - [`objective`]: matrix-free evaluation of `F_n`, `G_n` and `phi_hat`.
//! - [`optimizer`]: bounded scalar (Brent) and box (projected L-BFGS) maximizers.
//! - [`estimation`]: the end-to-end estimator and small-n diagnostics.
//! - [`experiments`]: replicated Monte Carlo studies.

pub mod error;
pub mod estimation;
pub mod experiments;
pub mod kernels;
pub mod objective;
pub mod optimizer;
pub mod parallel;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};

pub use estimation::{estimate, sweep_objective, EstimationResult};
pub use kernels::{correlation, radial_profile, scaled_distance, Anisotropy, AnisotropyForm, KernelFamily};
pub use objective::{f_n, g_n, phi_hat, quadratic_summary, QuadraticSummary};
pub use optimizer::{OptimizeOutcome, OptimizerConfig};
pub use sampling::{make_perturbed_lattice, simulate_field, FieldSample, SiteSet};
