//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use invfree_core::kernels::{correlation, Anisotropy, KernelFamily};
use invfree_core::SiteSet;

/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt` by the trapezoid rule,
/// which converges geometrically for this analytic, doubly decaying integrand.
pub fn bessel_k_quadrature(nu: f64, x: f64) -> f64 {
    let h = 1.0 / 128.0;
    let f = |t: f64| 0.5 * ((nu * t - x * t.cosh()).exp() + (-nu * t - x * t.cosh()).exp());
    let mut sum = 0.5 * f(0.0);
    let mut peak = sum;
    let mut k = 1;
    loop {
        let v = f(k as f64 * h);
        sum += v;
        peak = peak.max(v);
        if v < peak * 1e-20 && k as f64 * h > 1.0 {
            break;
        }
        k += 1;
    }
    sum * h
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Explicit `n x n` correlation matrix built with naive loops.
pub fn dense_matrix(sites: &SiteSet, family: &KernelFamily, aniso: &Anisotropy) -> Vec<Vec<f64>> {
    let n = sites.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let h: Vec<f64> = sites.site(i).iter().zip(sites.site(j)).map(|(a, b)| a - b).collect();
            k[i][j] = correlation(&h, family, aniso).unwrap();
        }
    }
    k
}

/// `(y'Ky, ||K||_F^2)` from the explicit matrix.
pub fn dense_summary(sites: &SiteSet, y: &[f64], family: &KernelFamily, aniso: &Anisotropy) -> (f64, f64) {
    let k = dense_matrix(sites, family, aniso);
    let n = y.len();
    let mut yky = 0.0;
    let mut frob = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| k[i][j] * y[j]).sum();
        yky += y[i] * row;
        frob += k[i].iter().map(|v| v * v).sum::<f64>();
    }
    (yky, frob)
}

/// Frobenius inner product `<A, B>`.
pub fn frob_inner(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>()).sum()
}

/// Deterministic pseudo-random numbers in `[0, 1)` for test inputs.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn uniform(&mut self) -> f64 {
        // xorshift64*
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}
