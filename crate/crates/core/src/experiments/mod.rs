//! Replicated Monte Carlo studies: simulate, estimate, and aggregate with
//! boundary-hit exclusion, plus rate, normality and quadratic-form studies.

pub mod stats;
mod studies;

pub use studies::{
    normality_from, normality_of, normality_study, quadratic_clt_check, rate_study, rate_study_with,
    stationary_point_study, NormalityReport, NORMALITY_MIN_REPLICATES,
    NormalityStats, QuadraticCltPoint, RatePoint, RateReport, StationaryPointReport,
};

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimation::estimate;
use crate::kernels::{Anisotropy, AnisotropyForm, KernelFamily, ParamBounds, PhiBounds};
use crate::optimizer::OptimizerConfig;
use crate::rng::child_seed;
use crate::sampling::{make_perturbed_lattice, simulate_field, FORMAT_VERSION};
use crate::{Error, Result};

pub const DEFAULT_FEATURES: usize = 20_000;

fn default_dim() -> usize {
    2
}

fn default_features() -> usize {
    DEFAULT_FEATURES
}

/// One replicated study: the true model, the lattice, and the estimator
/// settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: KernelFamily,
    /// True correlation structure; its parameters are `theta0`.
    pub anisotropy: Anisotropy,
    pub phi0: f64,
    /// Parametrization searched by the estimator; defaults to that of `anisotropy`.
    #[serde(default)]
    pub form: Option<AnisotropyForm>,
    #[serde(rename = "N")]
    pub n_side: usize,
    #[serde(default = "default_dim")]
    pub d: usize,
    pub delta: f64,
    /// Number of random cosine features per simulated field.
    #[serde(default = "default_features")]
    pub p: usize,
    pub replicates: usize,
    /// Box for `theta`; defaults to `[0.1, 15]` per coordinate.
    #[serde(default)]
    pub bounds: Option<ParamBounds>,
    #[serde(default)]
    pub phi_bounds: PhiBounds,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn form(&self) -> AnisotropyForm {
        self.form.unwrap_or_else(|| self.anisotropy.form())
    }

    pub fn theta0(&self) -> Vec<f64> {
        self.anisotropy.params()
    }

    pub fn bounds(&self) -> ParamBounds {
        self.bounds.clone().unwrap_or_else(|| ParamBounds::default_theta(self.form().n_params()))
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        self.anisotropy.validate()?;
        self.phi_bounds.validate()?;
        self.optimizer.validate()?;
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be at least 1".into()));
        }
        if self.p == 0 {
            return Err(Error::InvalidParameter("feature count p must be at least 1".into()));
        }
        if self.form() != self.anisotropy.form() {
            return Err(Error::InvalidParameter("estimation form must match the true anisotropy".into()));
        }
        let bounds = self.bounds();
        bounds.validate()?;
        if !bounds.contains(&self.theta0()) {
            return Err(Error::InvalidParameter(format!("true theta {:?} lies outside the box", self.theta0())));
        }
        if !(self.phi0 >= self.phi_bounds.min && self.phi0 <= self.phi_bounds.max) {
            return Err(Error::InvalidParameter(format!("true phi {} lies outside the variance interval", self.phi0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    pub seed: u64,
    pub phi_hat: f64,
    pub sigma_hat: f64,
    pub theta_hat: Vec<f64>,
    pub converged: bool,
    pub boundary_hit: Vec<bool>,
    pub phi_at_bound: bool,
    /// Left out of the aggregates because some coordinate hit the boundary.
    pub excluded: bool,
    pub iterations: usize,
    pub objective_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub truth: f64,
    pub mean: f64,
    pub rmse: f64,
}

impl ParamStats {
    fn of(values: &[f64], truth: f64) -> Self {
        let n = values.len() as f64;
        ParamStats {
            truth,
            mean: values.iter().sum::<f64>() / n,
            rmse: (values.iter().map(|v| (v - truth) * (v - truth)).sum::<f64>() / n).sqrt(),
        }
    }
}

/// Seconds spent per stage, summed over replicates. Not serialized, so that
/// reports stay byte-identical across reruns.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub simulate_secs: f64,
    pub estimate_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub replicates: Vec<ReplicateRecord>,
    pub excluded_count: usize,
    pub included_count: usize,
    pub phi: ParamStats,
    pub sigma: ParamStats,
    pub theta: Vec<ParamStats>,
    #[serde(skip)]
    pub timings: StageTimings,
}

impl ExperimentReport {
    /// Included replicates only.
    pub fn included(&self) -> impl Iterator<Item = &ReplicateRecord> {
        self.replicates.iter().filter(|r| !r.excluded)
    }

    /// One row per replicate.
    pub fn csv_string(&self) -> String {
        let m = self.theta.len();
        let mut out = String::from("index,seed,phi_hat,sigma_hat");
        for k in 1..=m {
            let _ = write!(out, ",theta_{k}");
        }
        out.push_str(",converged,boundary_hit,phi_at_bound,excluded\n");
        for r in &self.replicates {
            let _ = write!(out, "{},{},{:.16e},{:.16e}", r.index, r.seed, r.phi_hat, r.sigma_hat);
            for t in &r.theta_hat {
                let _ = write!(out, ",{t:.16e}");
            }
            let _ = writeln!(
                out,
                ",{},{},{},{}",
                r.converged,
                r.boundary_hit.iter().any(|b| *b),
                r.phi_at_bound,
                r.excluded
            );
        }
        out
    }
}

/// One simulate-then-estimate cycle for replicate `index`.
pub fn run_replicate(cfg: &ExperimentConfig, index: usize) -> Result<(ReplicateRecord, StageTimings)> {
    let seed = child_seed(cfg.seed, index as u64);
    let t0 = Instant::now();
    let sites = make_perturbed_lattice(cfg.n_side, cfg.d, cfg.delta, seed)?;
    let sample = simulate_field(&sites, &cfg.family, &cfg.anisotropy, cfg.phi0, cfg.p, seed)?;
    let t1 = Instant::now();
    let est = estimate(&sample, &cfg.family, cfg.form(), &cfg.bounds(), &cfg.phi_bounds, &cfg.optimizer)?;
    let t2 = Instant::now();
    let record = ReplicateRecord {
        index,
        seed,
        phi_hat: est.phi_hat,
        sigma_hat: est.phi_hat.sqrt(),
        theta_hat: est.theta_hat.clone(),
        converged: est.outcome.converged,
        boundary_hit: est.outcome.boundary_hit.clone(),
        phi_at_bound: est.phi_clamped,
        excluded: est.hit_boundary(),
        iterations: est.outcome.iterations,
        objective_value: est.outcome.value,
    };
    let timings = StageTimings { simulate_secs: (t1 - t0).as_secs_f64(), estimate_secs: (t2 - t1).as_secs_f64() };
    Ok((record, timings))
}

pub fn run_replicated(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_replicated_with(cfg, &|_| {})
}

/// Runs all replicates in parallel; `progress` is called once per finished
/// replicate (in completion order). Aggregation is in replicate order.
pub fn run_replicated_with(cfg: &ExperimentConfig, progress: &(dyn Fn(&ReplicateRecord) + Sync)) -> Result<ExperimentReport> {
    cfg.validate()?;
    let results: Vec<(ReplicateRecord, StageTimings)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|i| {
            let out = run_replicate(cfg, i)?;
            progress(&out.0);
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut timings = StageTimings::default();
    for (_, t) in &results {
        timings.simulate_secs += t.simulate_secs;
        timings.estimate_secs += t.estimate_secs;
    }
    let replicates: Vec<ReplicateRecord> = results.into_iter().map(|(r, _)| r).collect();
    let included: Vec<&ReplicateRecord> = replicates.iter().filter(|r| !r.excluded).collect();
    if included.is_empty() {
        return Err(Error::AllExcluded(replicates.len()));
    }
    let phis: Vec<f64> = included.iter().map(|r| r.phi_hat).collect();
    let sigmas: Vec<f64> = included.iter().map(|r| r.sigma_hat).collect();
    let theta0 = cfg.theta0();
    let theta = (0..theta0.len())
        .map(|k| ParamStats::of(&included.iter().map(|r| r.theta_hat[k]).collect::<Vec<_>>(), theta0[k]))
        .collect();
    Ok(ExperimentReport {
        format_version: FORMAT_VERSION,
        config: cfg.clone(),
        excluded_count: replicates.len() - included.len(),
        included_count: included.len(),
        phi: ParamStats::of(&phis, cfg.phi0),
        sigma: ParamStats::of(&sigmas, cfg.phi0.sqrt()),
        theta,
        replicates,
        timings,
    })
}
