//! Correlation families, anisotropic lag scaling, and the special functions
//! they need.

mod anisotropy;
mod bessel;
mod family;
mod params;

pub use anisotropy::{scaled_distance, Anisotropy, AnisotropyForm, LagMetric};
pub use bessel::bessel_k;
pub use family::{radial_profile, KernelFamily, RadialProfile, MATERN_ZERO_THRESHOLD};
pub use params::{CovarianceParams, ParamBounds, PhiBounds, DEFAULT_PHI_BOUNDS, DEFAULT_THETA_BOUNDS};

use crate::Result;

/// Correlation at lag `h`: `K(||B h||)`.
pub fn correlation(h: &[f64], family: &KernelFamily, aniso: &Anisotropy) -> Result<f64> {
    radial_profile(family, scaled_distance(h, aniso)?)
}
