use super::{boundary_flags, checked, OptimizeOutcome, OptimizerConfig};
use crate::{Error, Result};

/// Maximizes `f` on `[lo, hi]` with Brent's combination of golden-section
/// search and successive parabolic interpolation.
///
/// Stops once the bracket around the best point is narrower than
/// `rel_tol * 0.1 * (hi - lo)`, or after `max_iter` evaluations. If the best
/// point ends up next to a face, the face itself is evaluated and kept when
/// it is at least as good.
pub fn maximize_scalar<F>(mut f: F, lo: f64, hi: f64, cfg: &OptimizerConfig) -> Result<OptimizeOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("scalar search needs lo < hi, got [{lo}, {hi}]")));
    }
    let golden = 0.5 * (3.0 - 5f64.sqrt());
    let eps = f64::EPSILON.sqrt();
    let tol = cfg.scalar_rel_tol() * 0.1 * (hi - lo);

    let mut evals = 0usize;
    let mut neg = |x: f64, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        Ok(-checked(f(x)?, &[x])?)
    };

    let (mut a, mut b) = (lo, hi);
    let mut x = a + golden * (b - a);
    let (mut v, mut w) = (x, x);
    let mut fx = neg(x, &mut evals)?;
    let (mut fv, mut fw) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let mut best = (x, fx);
    let mut trace = vec![-fx];
    let mut converged = false;

    while evals < cfg.max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            converged = true;
            break;
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let r = e;
            e = d;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x < xm { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = neg(u, &mut evals)?;
        if fu < best.1 {
            best = (u, fu);
        }
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
            trace.push(-fx);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    let near = 4.0 * (eps * best.0.abs() + tol / 3.0);
    for face in [lo, hi] {
        if (best.0 - face).abs() <= near {
            let f_face = neg(face, &mut evals)?;
            if f_face <= best.1 {
                best = (face, f_face);
                trace.push(-f_face);
            }
        }
    }

    Ok(OptimizeOutcome {
        argmax: vec![best.0],
        value: -best.1,
        iterations: evals,
        evaluations: evals,
        converged,
        boundary_hit: boundary_flags(&[best.0], &[lo], &[hi], cfg.fd_step),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_vertex() {
        let out = maximize_scalar(|x| Ok(-(x - 3.0) * (x - 3.0)), 0.0, 10.0, &OptimizerConfig::default()).unwrap();
        assert!((out.argmax[0] - 3.0).abs() < 1e-4, "{out:?}");
        assert!(out.converged);
        assert_eq!(out.boundary_hit, vec![false]);
    }

    #[test]
    fn cosine_peak() {
        let out = maximize_scalar(|x| Ok(x.cos()), 2.0, 8.0, &OptimizerConfig::default()).unwrap();
        assert!((out.argmax[0] - 2.0 * std::f64::consts::PI).abs() < 1e-3, "{out:?}");
    }

    #[test]
    fn monotone_function_lands_on_face() {
        let out = maximize_scalar(|x| Ok(x), 0.1, 15.0, &OptimizerConfig::default()).unwrap();
        assert_eq!(out.argmax[0], 15.0);
        assert_eq!(out.boundary_hit, vec![true]);
    }

    #[test]
    fn non_finite_aborts() {
        let r = maximize_scalar(|x| Ok(if x > 5.0 { f64::NAN } else { x }), 0.0, 10.0, &OptimizerConfig::default());
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(maximize_scalar(|x| Ok(x), 1.0, 1.0, &OptimizerConfig::default()).is_err());
    }
}
