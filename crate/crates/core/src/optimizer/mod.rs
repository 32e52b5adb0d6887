//! Bounded maximizers: Brent's golden-section/parabolic search for one
//! parameter and projected L-BFGS with finite-difference gradients for a box.

mod boxed;
mod scalar;

use serde::{Deserialize, Serialize};

pub use boxed::maximize_box;
pub use scalar::maximize_scalar;

use crate::{Error, Result};

pub const DEFAULT_SCALAR_REL_TOL: f64 = 1e-3;
pub const DEFAULT_BOX_REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Scalar: bracket tolerance as a fraction of `0.1 (hi - lo)`.
    /// Box: relative change of the objective between accepted iterates.
    /// `None` picks 1e-3 (scalar) or 1e-5 (box).
    pub rel_tol: Option<f64>,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Box starting point; `None` means `(2, ..., 2)` projected into the box.
    pub initial_guess: Option<Vec<f64>>,
    /// Additional box starts spread along the box diagonal.
    pub multi_start: usize,
    /// L-BFGS history length.
    pub memory: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { rel_tol: None, max_iter: 100, fd_step: 1e-3, initial_guess: None, multi_start: 0, memory: 10 }
    }
}

impl OptimizerConfig {
    pub fn scalar_rel_tol(&self) -> f64 {
        self.rel_tol.unwrap_or(DEFAULT_SCALAR_REL_TOL)
    }

    pub fn box_rel_tol(&self) -> f64 {
        self.rel_tol.unwrap_or(DEFAULT_BOX_REL_TOL)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.rel_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {t}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::InvalidParameter(format!("fd_step must be positive, got {}", self.fd_step)));
        }
        if self.memory == 0 {
            return Err(Error::InvalidParameter("L-BFGS memory must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Per coordinate: within `fd_step` of a box face.
    pub boundary_hit: Vec<bool>,
    /// Objective at each accepted iterate.
    pub trace: Vec<f64>,
}

pub(crate) fn boundary_flags(x: &[f64], lower: &[f64], upper: &[f64], tol: f64) -> Vec<bool> {
    x.iter().zip(lower.iter().zip(upper)).map(|(v, (l, u))| v - l <= tol || u - v <= tol).collect()
}

pub(crate) fn checked(value: f64, at: &[f64]) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { value, at: at.to_vec() })
    }
}
