//! Modified Bessel function of the second kind, `K_nu(x)`, for real order.
//!
//! The order is split as `nu = mu + l` with `|mu| <= 1/2`. `K_mu` and
//! `K_{mu+1}` come from Temme's series for `x < 2` and Steed's continued
//! fraction (CF2) otherwise, followed by forward recurrence in the order,
//! which is stable for `K`. Half-integer orders use the terminating
//! closed form.

use std::f64::consts::PI;

use crate::{Error, Result};

const EPS: f64 = 1.0e-16;
const MAX_ITER: usize = 10_000;
const SERIES_CUTOFF: f64 = 2.0;
/// Largest half-integer order served by the closed-form path.
const MAX_HALF_INTEGER_ORDER: usize = 40;

// Chebyshev coefficients of Gamma_1(mu) and Gamma_2(mu) on |mu| <= 1/2,
// evaluated at 8 mu^2 - 1.
const GAMMA1_CHEB: [f64; 7] = [
    -1.142022680371168e0,
    6.5165112670737e-3,
    3.087090173086e-4,
    -3.4706269649e-6,
    6.9437664e-9,
    3.67795e-11,
    -1.356e-13,
];
const GAMMA2_CHEB: [f64; 8] = [
    1.843740587300905e0,
    -7.68528408447867e-2,
    1.2719271366546e-3,
    -4.9717367042e-6,
    -3.31261198e-8,
    2.423096e-10,
    -1.702e-13,
    -1.49e-15,
];

fn chebyshev(coeffs: &[f64], y: f64) -> f64 {
    let y2 = 2.0 * y;
    let (mut d, mut dd) = (0.0, 0.0);
    for &c in coeffs[1..].iter().rev() {
        let sv = d;
        d = y2 * d - dd + c;
        dd = sv;
    }
    y * d - dd + 0.5 * coeffs[0]
}

/// Returns `(Gamma_1, Gamma_2, 1/Gamma(1+mu), 1/Gamma(1-mu))`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let y = 8.0 * mu * mu - 1.0;
    let g1 = chebyshev(&GAMMA1_CHEB, y);
    let g2 = chebyshev(&GAMMA2_CHEB, y);
    (g1, g2, g2 - mu * g1, g2 + mu * g1)
}

/// `(K_mu(x), K_{mu+1}(x))` for `|mu| <= 1/2`.
fn k_pair_small_order(mu: f64, x: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    if x < SERIES_CUTOFF {
        let half_x = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -half_x.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (g1, g2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (g1 * e.cosh() + g2 * fact2 * d);
        let mut sum = ff;
        let e = e.exp();
        let mut p = 0.5 * e / gampl;
        let mut q = 0.5 / (e * gammi);
        let mut c = 1.0;
        let d = half_x * half_x;
        let mut sum1 = p;
        for i in 1..=MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= d / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        (sum, sum1 * 2.0 / x)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let (mut q1, mut q2) = (0.0, 1.0);
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..=MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        let kmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        (kmu, kmu * (mu + x + 0.5 - h) / x)
    }
}

/// Terminating series for `K_{k+1/2}(x)`.
fn k_half_integer(k: usize, x: f64) -> f64 {
    let inv_2x = 0.5 / x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut pow = 1.0;
    for j in 0..k {
        let (jf, kf) = (j as f64, k as f64);
        term *= (kf + jf + 1.0) * (kf - jf) / (jf + 1.0);
        pow *= inv_2x;
        sum += term * pow;
    }
    (PI / (2.0 * x)).sqrt() * (-x).exp() * sum
}

/// Half-integer order `k + 1/2`, if `nu` is one (within rounding).
pub(crate) fn half_integer_index(nu: f64) -> Option<usize> {
    let twice = 2.0 * nu;
    let r = twice.round();
    if (twice - r).abs() < 1e-14 && r >= 1.0 && (r as usize) % 2 == 1 {
        let k = (r as usize - 1) / 2;
        (k <= MAX_HALF_INTEGER_ORDER).then_some(k)
    } else {
        None
    }
}

/// Modified Bessel function of the second kind `K_nu(x)`.
///
/// Requires `nu > 0` and `x > 0`. Returns [`Error::Overflow`] when the result
/// exceeds the `f64` range (tiny `x` with large `nu`).
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_k order must be positive, got {nu}")));
    }
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("bessel_k argument must be positive, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let value = match half_integer_index(nu) {
        Some(k) => k_half_integer(k, x),
        None => {
            let l = (nu + 0.5).floor() as usize;
            let mu = nu - l as f64;
            let (mut k_mu, mut k_next) = k_pair_small_order(mu, x);
            for i in 1..=l {
                let k_up = (mu + i as f64) * 2.0 / x * k_next + k_mu;
                k_mu = k_next;
                k_next = k_up;
            }
            k_mu
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow(format!("K_{nu}({x})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_integer_closed_forms() {
        let x = 1.0f64;
        assert!(rel(bessel_k(0.5, x).unwrap(), (PI / 2.0).sqrt() * (-1.0f64).exp()) < 1e-15);
        let want = 1.5 * (PI / 4.0).sqrt() * (-2.0f64).exp();
        assert!(rel(bessel_k(1.5, 2.0).unwrap(), want) < 1e-15);
    }

    #[test]
    fn general_path_agrees_with_half_integer_path() {
        // Nudge the order off the half-integer fast path.
        for &x in &[1e-3, 0.3, 1.9, 2.1, 7.0, 30.0] {
            for &nu in &[0.5, 1.5, 2.5, 4.5] {
                let exact = bessel_k(nu, x).unwrap();
                let l = (nu + 0.5).floor() as usize;
                let mu = nu - l as f64;
                let (mut a, mut b) = k_pair_small_order(mu, x);
                for i in 1..=l {
                    let up = (mu + i as f64) * 2.0 / x * b + a;
                    a = b;
                    b = up;
                }
                assert!(rel(a, exact) < 1e-13, "nu={nu} x={x}: {a} vs {exact}");
            }
        }
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(matches!(bessel_k(0.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(0.5, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(-1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn overflow_is_signalled() {
        assert!(matches!(bessel_k(5.0, 1e-300), Err(Error::Overflow(_))));
        assert!(matches!(bessel_k(4.5, 1e-300), Err(Error::Overflow(_))));
    }

    #[test]
    fn small_order_matches_log_asymptote() {
        // K_nu(x) ~ -ln(x/2) - gamma for nu -> 0, x -> 0.
        let x = 1e-8;
        let want = -(x / 2.0f64).ln() - 0.577_215_664_901_532_9;
        assert!(rel(bessel_k(1e-9, x).unwrap(), want) < 1e-6);
    }
}
