use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{excess_kurtosis, ks_normal, mean, median, ols_slope, skewness, standardize, variance};
use super::{run_replicated, ExperimentConfig, ExperimentReport};
use crate::kernels::ParamBounds;
use crate::objective::{fd_gradient, Objective};
use crate::rng::{child_seed, stream_rng, Stream};
use crate::sampling::{make_perturbed_lattice, simulate_field};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n_side: usize,
    pub n: usize,
    pub included: usize,
    pub excluded: usize,
    /// `sqrt(mean ||theta_hat - theta0||^2)`.
    pub rmse_theta: f64,
    /// `sqrt(mean (phi_hat/phi0 - 1)^2)`.
    pub rmse_phi_ratio: f64,
    /// `median |phi_hat/phi0 - 1|`.
    pub median_phi_ratio_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub points: Vec<RatePoint>,
    /// Least-squares slope of `ln rmse_theta` against `ln sqrt(ln n / n)`.
    pub slope: f64,
}

/// Repeats the replicated study of `base` for each lattice side in `n_sides`
/// (same master seed throughout) and fits the log-log rate.
pub fn rate_study(base: &ExperimentConfig, n_sides: &[usize]) -> Result<RateReport> {
    rate_study_with(base, n_sides, &|_, _| {})
}

/// As [`rate_study`], calling `progress` after each lattice size.
pub fn rate_study_with(
    base: &ExperimentConfig,
    n_sides: &[usize],
    progress: &(dyn Fn(usize, &ExperimentReport) + Sync),
) -> Result<RateReport> {
    if n_sides.len() < 3 {
        return Err(Error::Precondition("rate study needs at least three lattice sizes".into()));
    }
    if n_sides.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("lattice sizes must be strictly increasing".into()));
    }
    let theta0 = base.theta0();
    let mut points = Vec::with_capacity(n_sides.len());
    for &n_side in n_sides {
        let cfg = ExperimentConfig { n_side, ..base.clone() };
        let report = run_replicated(&cfg)?;
        progress(n_side, &report);
        let inc: Vec<_> = report.included().collect();
        let k = inc.len() as f64;
        let sq_err = inc
            .iter()
            .map(|r| r.theta_hat.iter().zip(&theta0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum::<f64>();
        let ratio_err: Vec<f64> = inc.iter().map(|r| r.phi_hat / base.phi0 - 1.0).collect();
        points.push(RatePoint {
            n_side,
            n: n_side.pow(base.d as u32),
            included: report.included_count,
            excluded: report.excluded_count,
            rmse_theta: (sq_err / k).sqrt(),
            rmse_phi_ratio: (ratio_err.iter().map(|e| e * e).sum::<f64>() / k).sqrt(),
            median_phi_ratio_error: median(&ratio_err.iter().map(|e| e.abs()).collect::<Vec<_>>()),
        });
    }
    let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).map(|ln_n| 0.5 * (ln_n.ln() - ln_n)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.rmse_theta.ln()).collect();
    Ok(RateReport { slope: ols_slope(&x, &y), points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityStats {
    pub parameter: String,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub standardized: Vec<f64>,
}

/// Standardizes `values` by their own mean and sd, then reports moments and
/// a KS test against the standard normal.
pub fn normality_of(parameter: &str, values: &[f64]) -> Result<NormalityStats> {
    let z = standardize(values)?;
    let (d, p) = ks_normal(&z, 0.0, 1.0);
    Ok(NormalityStats {
        parameter: parameter.to_string(),
        skewness: skewness(&z),
        excess_kurtosis: excess_kurtosis(&z),
        ks_statistic: d,
        ks_p_value: p,
        standardized: z,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub included: usize,
    pub excluded: usize,
    /// One entry per `theta` coordinate, then `phi`.
    pub parameters: Vec<NormalityStats>,
}

pub const NORMALITY_MIN_REPLICATES: usize = 200;

/// Shape of the sampling distribution of `sqrt(n) (eta_hat - eta0)` over the
/// included replicates (standardization removes the `sqrt(n)` factor).
pub fn normality_study(cfg: &ExperimentConfig) -> Result<NormalityReport> {
    normality_from(cfg, &run_replicated(cfg)?)
}

/// Normality statistics from an already computed replicated report.
pub fn normality_from(cfg: &ExperimentConfig, report: &ExperimentReport) -> Result<NormalityReport> {
    if cfg.replicates < NORMALITY_MIN_REPLICATES {
        return Err(Error::Precondition(format!(
            "normality study needs at least {NORMALITY_MIN_REPLICATES} replicates, got {}",
            cfg.replicates
        )));
    }
    let inc: Vec<_> = report.included().collect();
    let mut parameters = Vec::new();
    for k in 0..cfg.theta0().len() {
        let v: Vec<f64> = inc.iter().map(|r| r.theta_hat[k]).collect();
        parameters.push(normality_of(&format!("theta_{}", k + 1), &v)?);
    }
    let phis: Vec<f64> = inc.iter().map(|r| r.phi_hat).collect();
    parameters.push(normality_of("phi", &phis)?);
    Ok(NormalityReport { included: report.included_count, excluded: report.excluded_count, parameters })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPointReport {
    pub replicates: usize,
    /// Coordinates `(phi, theta_1, ..., theta_m)`.
    pub mean_gradient: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl StationaryPointReport {
    /// `mean / std_error` per coordinate.
    pub fn z_scores(&self) -> Vec<f64> {
        self.mean_gradient.iter().zip(&self.std_error).map(|(m, s)| m / s).collect()
    }
}

/// Monte Carlo mean of the finite-difference gradient of `F_n` at the true
/// `(phi0, theta0)`, with one fresh lattice and field per replicate.
pub fn stationary_point_study(cfg: &ExperimentConfig) -> Result<StationaryPointReport> {
    cfg.validate()?;
    let theta0 = cfg.theta0();
    let theta_bounds = cfg.bounds();
    let bounds = ParamBounds::new(
        [vec![cfg.phi_bounds.min], theta_bounds.lower.clone()].concat(),
        [vec![cfg.phi_bounds.max], theta_bounds.upper.clone()].concat(),
    )?;
    let eta0 = [vec![cfg.phi0], theta0].concat();
    let grads: Vec<Vec<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|i| {
            let seed = child_seed(cfg.seed, i as u64);
            let sites = make_perturbed_lattice(cfg.n_side, cfg.d, cfg.delta, seed)?;
            let sample = simulate_field(&sites, &cfg.family, &cfg.anisotropy, cfg.phi0, cfg.p, seed)?;
            let obj = Objective::new(&sample.sites, &sample.y, &cfg.family, cfg.form())?;
            fd_gradient(|eta| obj.f_n(eta[0], &eta[1..]), &eta0, cfg.optimizer.fd_step, &bounds)
        })
        .collect::<Result<_>>()?;
    let r = grads.len() as f64;
    let m = eta0.len();
    let (mut mean_gradient, mut std_error) = (Vec::with_capacity(m), Vec::with_capacity(m));
    for k in 0..m {
        let col: Vec<f64> = grads.iter().map(|g| g[k]).collect();
        mean_gradient.push(mean(&col));
        std_error.push((variance(&col) / r).sqrt());
    }
    Ok(StationaryPointReport { replicates: grads.len(), mean_gradient, std_error })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCltPoint {
    pub n: usize,
    pub replicates: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// KS test of the raw values against `N(0, 2)`.
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

/// Samples `Psi = (Z'AZ - tr A) / ||A||_F` for standard normal `Z` and one
/// fixed random symmetric `A` (i.i.d. standard normal upper triangle) per `n`.
pub fn quadratic_clt_check(n_list: &[usize], seed: u64, replicates: usize) -> Result<Vec<QuadraticCltPoint>> {
    if replicates < 2 {
        return Err(Error::Precondition("need at least two replicates".into()));
    }
    n_list.iter().map(|&n| quadratic_clt_point(n, seed, replicates)).collect()
}

fn quadratic_clt_point(n: usize, seed: u64, replicates: usize) -> Result<QuadraticCltPoint> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix size must be positive".into()));
    }
    let n_seed = child_seed(seed, n as u64);
    let mut rng = stream_rng(n_seed, Stream::Matrix);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.sample(StandardNormal);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let psi: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(child_seed(n_seed, r as u64), Stream::Noise);
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let quad: f64 = (0..n).map(|i| z[i] * a[i * n..(i + 1) * n].iter().zip(&z).map(|(x, y)| x * y).sum::<f64>()).sum();
            (quad - trace) / frob
        })
        .collect();
    let (d, p) = ks_normal(&psi, 0.0, 2f64.sqrt());
    Ok(QuadraticCltPoint {
        n,
        replicates,
        mean: mean(&psi),
        variance: variance(&psi),
        skewness: skewness(&psi),
        ks_statistic: d,
        ks_p_value: p,
    })
}
