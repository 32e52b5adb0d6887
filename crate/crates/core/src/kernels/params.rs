use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_THETA_BOUNDS: (f64, f64) = (0.1, 15.0);
pub const DEFAULT_PHI_BOUNDS: (f64, f64) = (1e-4, 1e4);

/// `eta = (phi, theta)`: variance and correlation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceParams {
    pub phi: f64,
    pub theta: Vec<f64>,
}

/// A closed box `[lower, upper]` in parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = ParamBounds { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// `[0.1, 15]^m`.
    pub fn default_theta(m: usize) -> Self {
        ParamBounds { lower: vec![DEFAULT_THETA_BOUNDS.0; m], upper: vec![DEFAULT_THETA_BOUNDS.1; m] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::InvalidParameter("bounds must be non-empty and of equal length".into()));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(Error::InvalidParameter(format!("invalid bound interval [{l}, {u}]")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn project(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

/// The variance interval `[min, max]`, `0 < min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for PhiBounds {
    fn default() -> Self {
        PhiBounds { min: DEFAULT_PHI_BOUNDS.0, max: DEFAULT_PHI_BOUNDS.1 }
    }
}

impl PhiBounds {
    pub fn validate(&self) -> Result<()> {
        if self.min > 0.0 && self.min <= self.max && self.max.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid variance interval [{}, {}]", self.min, self.max)))
        }
    }

    /// Clamps `phi` into the interval; the flag reports whether clamping occurred.
    pub fn clamp(&self, phi: f64) -> (f64, bool) {
        if phi < self.min {
            (self.min, true)
        } else if phi > self.max {
            (self.max, true)
        } else {
            (phi, false)
        }
    }
}
