//! The estimator pipeline (`theta` from the profile objective, then `phi` in
//! closed form) and dense small-`n` diagnostics.

mod diagnostics;
mod sweep;

pub use diagnostics::{
    correlation_matrix, gaussian_kl, identifiability_margin, identifiability_margin_with, kl_bound_check,
    spectral_bounds, IdentifiabilityReport, KlBoundReport, SpectralBoundsReport, KL_ORACLE_MAX_N,
    SPECTRAL_ORACLE_MAX_N,
};
pub use sweep::{curve_csv_string, grid_from_axes, local_maxima_count, sweep_objective, AxisSpec, CurvePoint};

use serde::{Deserialize, Serialize};

use crate::kernels::{AnisotropyForm, KernelFamily, ParamBounds, PhiBounds};
use crate::objective::Objective;
use crate::optimizer::{maximize_box, maximize_scalar, OptimizeOutcome, OptimizerConfig};
use crate::sampling::FieldSample;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub phi_hat: f64,
    /// `phi_hat` was clamped into the variance interval.
    pub phi_clamped: bool,
    pub theta_hat: Vec<f64>,
    pub outcome: OptimizeOutcome,
    /// Every `(theta, G_n)` the optimizer evaluated, in evaluation order.
    pub objective_curve: Option<Vec<(Vec<f64>, f64)>>,
}

/// Serialized form of an [`EstimationResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationSummary {
    pub phi_hat: f64,
    pub theta_hat: Vec<f64>,
    pub converged: bool,
    pub boundary_hit: Vec<bool>,
    pub phi_at_bound: bool,
    pub iterations: usize,
    pub objective_value: f64,
}

impl EstimationResult {
    /// Any correlation coordinate on a face of the box, or `phi` clamped.
    pub fn hit_boundary(&self) -> bool {
        self.phi_clamped || self.outcome.boundary_hit.iter().any(|b| *b)
    }

    pub fn summary(&self) -> EstimationSummary {
        EstimationSummary {
            phi_hat: self.phi_hat,
            theta_hat: self.theta_hat.clone(),
            converged: self.outcome.converged,
            boundary_hit: self.outcome.boundary_hit.clone(),
            phi_at_bound: self.phi_clamped,
            iterations: self.outcome.iterations,
            objective_value: self.outcome.value,
        }
    }
}

/// Maximizes `G_n` over `bounds` (Brent for one parameter, projected L-BFGS
/// otherwise) and evaluates the closed-form variance at the maximizer.
pub fn estimate(
    sample: &FieldSample,
    family: &KernelFamily,
    form: AnisotropyForm,
    bounds: &ParamBounds,
    phi_bounds: &PhiBounds,
    cfg: &OptimizerConfig,
) -> Result<EstimationResult> {
    if sample.is_empty() {
        return Err(Error::Empty("sample has no sites".into()));
    }
    bounds.validate()?;
    phi_bounds.validate()?;
    if bounds.dim() != form.n_params() {
        return Err(Error::DimensionMismatch { expected: form.n_params(), got: bounds.dim() });
    }
    let objective = Objective::new(&sample.sites, &sample.y, family, form)?;
    let mut curve = Vec::new();
    let outcome = if bounds.dim() == 1 {
        maximize_scalar(
            |t| {
                let g = objective.g_n(&[t])?;
                curve.push((vec![t], g));
                Ok(g)
            },
            bounds.lower[0],
            bounds.upper[0],
            cfg,
        )?
    } else {
        maximize_box(
            |t| {
                let g = objective.g_n(t)?;
                curve.push((t.to_vec(), g));
                Ok(g)
            },
            bounds,
            cfg,
        )?
    };
    let phi = objective.phi_hat(&outcome.argmax, phi_bounds)?;
    Ok(EstimationResult {
        phi_hat: phi.phi,
        phi_clamped: phi.clamped,
        theta_hat: outcome.argmax.clone(),
        outcome,
        objective_curve: Some(curve),
    })
}
