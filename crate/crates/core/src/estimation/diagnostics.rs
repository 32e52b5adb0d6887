use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::kernels::{correlation, AnisotropyForm, KernelFamily};
use crate::sampling::SiteSet;
use crate::{Error, Result};

/// Largest `n` for dense eigen-decompositions.
pub const SPECTRAL_ORACLE_MAX_N: usize = 2000;
/// Largest `n` for the dense KL computation.
pub const KL_ORACLE_MAX_N: usize = 500;

fn lag(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The explicit `n x n` correlation matrix `K_n(theta)`.
pub fn correlation_matrix(sites: &SiteSet, family: &KernelFamily, form: AnisotropyForm, theta: &[f64]) -> Result<DMatrix<f64>> {
    let aniso = form.build(theta)?;
    let n = sites.len();
    let mut k = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = correlation(&lag(sites.site(i), sites.site(j)), family, &aniso)?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityReport {
    /// Smallest ratio `min_s max_{s'} |K(s'-s, t2) - K(s'-s, t1)| / ||t2 - t1||`.
    pub margin: f64,
    pub radius: f64,
    pub worst_pair: (Vec<f64>, Vec<f64>),
    pub grid_size: usize,
}

/// Local identifiability margin for the model's own correlation function.
pub fn identifiability_margin(
    sites: &SiteSet,
    family: &KernelFamily,
    form: AnisotropyForm,
    theta_grid: &[Vec<f64>],
    radius: f64,
) -> Result<IdentifiabilityReport> {
    let anisos = theta_grid.iter().map(|t| form.build(t)).collect::<Result<Vec<_>>>()?;
    let index_of = |theta: &[f64]| theta_grid.iter().position(|t| t.as_slice() == theta);
    identifiability_margin_with(sites, theta_grid, radius, |h, theta| {
        let k = index_of(theta).expect("theta comes from the grid");
        correlation(h, family, &anisos[k])
    })
}

/// Local identifiability margin for an arbitrary correlation `corr(h, theta)`.
///
/// For every pair of distinct grid points, takes the worst site of the
/// largest correlation change among its neighbours within `radius`, divided
/// by the parameter distance; the margin is the minimum over pairs.
pub fn identifiability_margin_with<C>(
    sites: &SiteSet,
    theta_grid: &[Vec<f64>],
    radius: f64,
    corr: C,
) -> Result<IdentifiabilityReport>
where
    C: Fn(&[f64], &[f64]) -> Result<f64>,
{
    if !(radius > 1.0) {
        return Err(Error::Precondition(format!("neighbourhood radius must exceed 1, got {radius}")));
    }
    if theta_grid.len() < 2 {
        return Err(Error::Precondition("identifiability needs at least two grid points".into()));
    }
    let n = sites.len();
    let mut lags: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
    for i in 0..n {
        let near: Vec<Vec<f64>> = (0..n)
            .filter(|&j| j != i && distance(sites.site(i), sites.site(j)) <= radius)
            .map(|j| lag(sites.site(j), sites.site(i)))
            .collect();
        if near.is_empty() {
            return Err(Error::NoNeighbour { site: i, radius });
        }
        lags.push(near);
    }
    // values[g][i][k]: correlation at grid point g for site i's k-th neighbour.
    let values = theta_grid
        .iter()
        .map(|theta| lags.iter().map(|site| site.iter().map(|h| corr(h, theta)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, usize, usize)> = None;
    for a in 0..theta_grid.len() {
        for b in a + 1..theta_grid.len() {
            let dtheta = distance(&theta_grid[a], &theta_grid[b]);
            if dtheta == 0.0 {
                continue;
            }
            let worst_site = values[a]
                .iter()
                .zip(&values[b])
                .map(|(va, vb)| va.iter().zip(vb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            let ratio = worst_site / dtheta;
            if best.is_none_or(|(m, _, _)| ratio < m) {
                best = Some((ratio, a, b));
            }
        }
    }
    let (margin, a, b) = best.ok_or_else(|| Error::Precondition("grid has no distinct pair of points".into()))?;
    Ok(IdentifiabilityReport {
        margin,
        radius,
        worst_pair: (theta_grid[a].clone(), theta_grid[b].clone()),
        grid_size: theta_grid.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBoundsReport {
    pub lambda_min_est: f64,
    pub lambda_max_est: f64,
    /// Largest `||K(t2) - K(t1)||_op / ||t2 - t1||` over grid pairs.
    pub lipschitz_est: f64,
}

fn check_oracle_size(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Precondition(format!("dense oracle limited to n <= {cap}, got n = {n}")));
    }
    if n == 0 {
        return Err(Error::Empty("site set is empty".into()));
    }
    Ok(())
}

fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let ev = m.clone().symmetric_eigenvalues();
    if ev.iter().all(|v| v.is_finite()) {
        Ok(ev.iter().copied().collect())
    } else {
        Err(Error::LinearAlgebra("eigendecomposition produced non-finite values".into()))
    }
}

/// Extreme eigenvalues of `K_n(theta)` over the grid and an operator-norm
/// Lipschitz estimate, by dense eigen-decomposition.
pub fn spectral_bounds(
    sites: &SiteSet,
    family: &KernelFamily,
    form: AnisotropyForm,
    theta_grid: &[Vec<f64>],
) -> Result<SpectralBoundsReport> {
    check_oracle_size(sites.len(), SPECTRAL_ORACLE_MAX_N)?;
    if theta_grid.is_empty() {
        return Err(Error::Empty("theta grid is empty".into()));
    }
    let mats = theta_grid.iter().map(|t| correlation_matrix(sites, family, form, t)).collect::<Result<Vec<_>>>()?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for m in &mats {
        for v in eigenvalues(m)? {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let mut lipschitz = 0.0f64;
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            let dtheta = distance(&theta_grid[a], &theta_grid[b]);
            if dtheta == 0.0 {
                continue;
            }
            let op = eigenvalues(&(&mats[b] - &mats[a]))?.into_iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
            lipschitz = lipschitz.max(op / dtheta);
        }
    }
    Ok(SpectralBoundsReport { lambda_min_est: lo, lambda_max_est: hi, lipschitz_est: lipschitz })
}

/// `KL(N(0, k1) || N(0, k2))`, via the eigenvalues `mu` of `L2^-1 k1 L2^-T`:
/// `sum(mu - 1 - ln mu) / 2`.
pub fn gaussian_kl(k1: &DMatrix<f64>, k2: &DMatrix<f64>) -> Result<f64> {
    if k1.shape() != k2.shape() || !k1.is_square() {
        return Err(Error::DimensionMismatch { expected: k2.nrows(), got: k1.nrows() });
    }
    let l2 = k2
        .clone()
        .cholesky()
        .ok_or_else(|| Error::LinearAlgebra("second covariance is not positive definite".into()))?
        .l();
    let x = l2
        .solve_lower_triangular(k1)
        .ok_or_else(|| Error::LinearAlgebra("triangular solve failed".into()))?;
    let m = l2
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::LinearAlgebra("triangular solve failed".into()))?;
    let m = (&m + m.transpose()) * 0.5;
    let mut kl = 0.0;
    for mu in eigenvalues(&m)? {
        if !(mu > 0.0) {
            return Err(Error::LinearAlgebra(format!("first covariance is singular (eigenvalue {mu:e})")));
        }
        let x = mu - 1.0;
        kl += x - x.ln_1p();
    }
    Ok(0.5 * kl)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlBoundReport {
    pub kl: f64,
    /// `2 n (D / Lambda_min * ||t2 - t1||)^2`.
    pub bound: f64,
    pub lambda_min: f64,
    pub lipschitz: f64,
    /// `||t2 - t1|| <= Lambda_min / (2 D)`: the bound is only claimed inside.
    pub within_radius: bool,
    pub holds: bool,
}

/// Exact Gaussian KL between the unit-variance fields at `theta1` and
/// `theta2` against the eigenvalue/Lipschitz bound, with constants estimated
/// on five evenly spaced points of the segment between them.
pub fn kl_bound_check(
    sites: &SiteSet,
    family: &KernelFamily,
    form: AnisotropyForm,
    theta1: &[f64],
    theta2: &[f64],
) -> Result<KlBoundReport> {
    check_oracle_size(sites.len(), KL_ORACLE_MAX_N)?;
    if theta1.len() != theta2.len() {
        return Err(Error::DimensionMismatch { expected: theta1.len(), got: theta2.len() });
    }
    let segment: Vec<Vec<f64>> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|t| theta1.iter().zip(theta2).map(|(a, b)| a + t * (b - a)).collect())
        .collect();
    let consts = spectral_bounds(sites, family, form, &segment)?;
    let k1 = correlation_matrix(sites, family, form, theta1)?;
    let k2 = correlation_matrix(sites, family, form, theta2)?;
    // Identical parameters give identical laws; skip the rounding noise.
    let kl = if theta1 == theta2 { 0.0 } else { gaussian_kl(&k1, &k2)? };
    let dtheta = distance(theta1, theta2);
    let lambda_min = consts.lambda_min_est;
    if !(lambda_min > 0.0) {
        return Err(Error::LinearAlgebra(format!("correlation matrix not positive definite (min eigenvalue {lambda_min:e})")));
    }
    let ratio = consts.lipschitz_est / lambda_min * dtheta;
    let bound = 2.0 * sites.len() as f64 * ratio * ratio;
    Ok(KlBoundReport {
        kl,
        bound,
        lambda_min,
        lipschitz: consts.lipschitz_est,
        within_radius: ratio <= 0.5,
        holds: kl <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::make_perturbed_lattice;

    #[test]
    fn kl_of_identical_is_zero() {
        let s = make_perturbed_lattice(4, 2, 0.1, 3).unwrap();
        let f = KernelFamily::matern(0.5).unwrap();
        let r = kl_bound_check(&s, &f, AnisotropyForm::Isotropic, &[4.0], &[4.0]).unwrap();
        assert_eq!(r.kl, 0.0);
        assert_eq!(r.bound, 0.0);
        assert!(r.holds && r.within_radius);
    }

    #[test]
    fn kl_matches_trace_formula() {
        let a = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let b = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, -0.2, -0.2, 1.5]);
        let binv = b.clone().try_inverse().unwrap();
        let direct = 0.5 * ((&binv * &a).trace() - 2.0 + b.determinant().ln() - a.determinant().ln());
        assert!((gaussian_kl(&a, &b).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn oracle_cap_enforced() {
        let s = make_perturbed_lattice(23, 2, 0.0, 0).unwrap();
        let f = KernelFamily::matern(0.5).unwrap();
        assert!(matches!(kl_bound_check(&s, &f, AnisotropyForm::Isotropic, &[1.0], &[1.1]), Err(Error::Precondition(_))));
    }
}
