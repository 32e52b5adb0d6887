use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::bessel::{bessel_k, half_integer_index};
use crate::{Error, Result};

/// Below this scaled distance the Matérn profile returns its limit, 1.
pub const MATERN_ZERO_THRESHOLD: f64 = 1e-8;

/// Radial correlation profile with a known fractal index `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelFamily {
    /// `2^{1-nu}/Gamma(nu) u^nu K_nu(u)`, `nu > 0`.
    Matern { nu: f64 },
    /// `exp(-u^nu)`, `0 < nu < 2`.
    PoweredExponential { nu: f64 },
    /// `(1 + u^2)^{-(dim/2 + nu)}`, `nu > 0`.
    RationalQuadratic { nu: f64, dim: usize },
}

impl KernelFamily {
    pub fn matern(nu: f64) -> Result<Self> {
        let f = KernelFamily::Matern { nu };
        f.validate()?;
        Ok(f)
    }

    pub fn powered_exponential(nu: f64) -> Result<Self> {
        let f = KernelFamily::PoweredExponential { nu };
        f.validate()?;
        Ok(f)
    }

    pub fn rational_quadratic(nu: f64, dim: usize) -> Result<Self> {
        let f = KernelFamily::RationalQuadratic { nu, dim };
        f.validate()?;
        Ok(f)
    }

    pub fn nu(&self) -> f64 {
        match *self {
            KernelFamily::Matern { nu }
            | KernelFamily::PoweredExponential { nu }
            | KernelFamily::RationalQuadratic { nu, .. } => nu,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Matern { .. } => "matern",
            KernelFamily::PoweredExponential { .. } => "powered_exponential",
            KernelFamily::RationalQuadratic { .. } => "rational_quadratic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            KernelFamily::Matern { nu } => nu > 0.0 && nu.is_finite(),
            KernelFamily::PoweredExponential { nu } => nu > 0.0 && nu < 2.0,
            KernelFamily::RationalQuadratic { nu, dim } => nu > 0.0 && nu.is_finite() && dim >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid kernel family {self:?}")))
        }
    }

    /// Precomputes the constants of the profile for repeated evaluation.
    pub fn profile(&self) -> Result<RadialProfile> {
        self.validate()?;
        Ok(match *self {
            KernelFamily::Matern { nu } => match half_integer_index(nu) {
                Some(0) => RadialProfile::Exponential,
                Some(k) => RadialProfile::MaternHalfInteger { coeffs: half_integer_coeffs(k) },
                None => RadialProfile::Matern { nu, ln_norm: (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu) },
            },
            KernelFamily::PoweredExponential { nu } => {
                if nu == 1.0 {
                    RadialProfile::Exponential
                } else {
                    RadialProfile::PoweredExponential { nu }
                }
            }
            KernelFamily::RationalQuadratic { nu, dim } => {
                let exponent = 0.5 * dim as f64 + nu;
                let twice = 2.0 * exponent;
                if (twice - twice.round()).abs() < 1e-14 && twice.round() <= 64.0 {
                    let t = twice.round() as i32;
                    RadialProfile::RationalQuadraticHalf { int_part: t / 2, has_half: t % 2 == 1 }
                } else {
                    RadialProfile::RationalQuadratic { exponent }
                }
            }
        })
    }
}

/// Coefficients `c_j` of `u^j` in `(sum_j c_j u^j) e^{-u}`, the Matérn
/// profile of order `k + 1/2`.
fn half_integer_coeffs(k: usize) -> Vec<f64> {
    // c_{k-j} = (k+j)! k! 2^{k-j} / ((2k)! j! (k-j)!)
    let ln_fact = |n: usize| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    let mut coeffs = vec![0.0; k + 1];
    for j in 0..=k {
        let ln_c = ln_fact(k + j) + ln_fact(k) + (k - j) as f64 * std::f64::consts::LN_2
            - ln_fact(2 * k)
            - ln_fact(j)
            - ln_fact(k - j);
        coeffs[k - j] = ln_c.exp();
    }
    coeffs[0] = 1.0;
    coeffs
}

/// A kernel family with its normalizing constants resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    Exponential,
    MaternHalfInteger { coeffs: Vec<f64> },
    Matern { nu: f64, ln_norm: f64 },
    PoweredExponential { nu: f64 },
    RationalQuadraticHalf { int_part: i32, has_half: bool },
    RationalQuadratic { exponent: f64 },
}

impl RadialProfile {
    /// Correlation at scaled distance `u >= 0`.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            RadialProfile::Exponential => (-u).exp(),
            RadialProfile::MaternHalfInteger { coeffs } => {
                let poly = coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c);
                poly * (-u).exp()
            }
            RadialProfile::Matern { nu, ln_norm } => matern_general(*nu, *ln_norm, u),
            RadialProfile::PoweredExponential { nu } => (-u.powf(*nu)).exp(),
            RadialProfile::RationalQuadraticHalf { int_part, has_half } => {
                let base = 1.0 + u * u;
                let mut v = base.powi(*int_part);
                if *has_half {
                    v *= base.sqrt();
                }
                1.0 / v
            }
            RadialProfile::RationalQuadratic { exponent } => (1.0 + u * u).powf(-exponent),
        }
    }
}

fn matern_general(nu: f64, ln_norm: f64, u: f64) -> f64 {
    if u < MATERN_ZERO_THRESHOLD {
        return 1.0;
    }
    match bessel_k(nu, u) {
        Ok(0.0) => 0.0,
        Ok(k) => (ln_norm + nu * u.ln() + k.ln()).exp().min(1.0),
        // Bessel overflow only happens near the origin; use the leading
        // small-u expansion there.
        Err(_) if nu > 1.0 => 1.0 - u * u / (4.0 * (nu - 1.0)),
        Err(_) => 1.0,
    }
}

/// Correlation `K(u)` of `family` at scaled distance `u >= 0`.
pub fn radial_profile(family: &KernelFamily, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("scaled distance must be nonnegative, got {u}")));
    }
    Ok(family.profile()?.eval(u))
}
