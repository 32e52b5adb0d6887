use crate::kernels::ParamBounds;
use crate::{Error, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Finite-difference gradient of `objective` at `theta` inside `bounds`.
///
/// Central differences where `theta +- step e_j` both stay in the box,
/// one-sided (pointing into the box) at the faces.
pub fn fd_gradient<F>(mut objective: F, theta: &[f64], step: f64, bounds: &ParamBounds) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {step}")));
    }
    bounds.validate()?;
    if theta.len() != bounds.dim() {
        return Err(Error::DimensionMismatch { expected: bounds.dim(), got: theta.len() });
    }
    let mut grad = Vec::with_capacity(theta.len());
    let mut probe = theta.to_vec();
    let mut center = None;
    for j in 0..theta.len() {
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        if hi - lo <= 0.0 {
            return Err(Error::InvalidParameter(format!("zero-width box in coordinate {j}")));
        }
        let h = step.min(hi - lo);
        let x = theta[j];
        let g = if x - h >= lo && x + h <= hi {
            probe[j] = x + h;
            let fp = objective(&probe)?;
            probe[j] = x - h;
            let fm = objective(&probe)?;
            (fp - fm) / (2.0 * h)
        } else {
            let f0 = match center {
                Some(v) => v,
                None => {
                    let v = objective(theta)?;
                    center = Some(v);
                    v
                }
            };
            if x + h <= hi {
                probe[j] = x + h;
                (objective(&probe)? - f0) / h
            } else {
                probe[j] = x - h;
                (f0 - objective(&probe)?) / h
            }
        };
        probe[j] = x;
        grad.push(g);
    }
    Ok(grad)
}
