use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use invfree_core::estimation::{
    curve_csv_string, grid_from_axes, identifiability_margin, kl_bound_check, spectral_bounds, EstimationSummary,
    IdentifiabilityReport, KlBoundReport, SpectralBoundsReport, SPECTRAL_ORACLE_MAX_N,
};
use invfree_core::experiments::{
    normality_from, quadratic_clt_check, rate_study_with, run_replicated_with, NormalityReport, QuadraticCltPoint,
    RateReport,
};
use invfree_core::sampling::{read_sample_csv, write_atomic, write_sample_csv, FORMAT_VERSION};
use invfree_core::{estimate, make_perturbed_lattice, simulate_field, sweep_objective, Error};
use serde::Serialize;

use crate::config::{CheckConfig, EstimateConfig, ExperimentRun, RunConfig, SimulateConfig, SweepConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DIAGNOSTIC_FAILED: u8 = 1;
pub const EXIT_BOUNDARY: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

pub fn simulate(cfg: SimulateConfig, out: &Path) -> Result<u8> {
    let sites = make_perturbed_lattice(cfg.n_side, cfg.d, cfg.delta, cfg.seed)?;
    let sample = simulate_field(&sites, &cfg.family, &cfg.anisotropy, cfg.phi, cfg.p, cfg.seed)?;
    write_sample_csv(out, &sample).with_context(|| format!("writing sample {}", out.display()))?;
    eprintln!("wrote {} sites to {}", sample.len(), out.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    format_version: u32,
    config: &'a RunConfig,
    #[serde(flatten)]
    result: EstimationSummary,
}

pub fn estimate_cmd(cfg: EstimateConfig, sample_path: &Path) -> Result<u8> {
    let cfg = cfg.resolve();
    let sample = read_sample_csv(sample_path).with_context(|| format!("reading sample {}", sample_path.display()))?;
    let bounds = cfg.bounds.clone().expect("resolved");
    let est = estimate(&sample, &cfg.family, cfg.form, &bounds, &cfg.phi_bounds, &cfg.optimizer)?;
    let code = if est.hit_boundary() {
        EXIT_BOUNDARY
    } else if !est.outcome.converged {
        EXIT_NO_CONVERGENCE
    } else {
        EXIT_OK
    };
    let wrapped = RunConfig::Estimate(cfg);
    print!("{}", to_json(&EstimateOutput { format_version: FORMAT_VERSION, config: &wrapped, result: est.summary() })?);
    Ok(code)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    format_version: u32,
    config: &'a RunConfig,
    sample: String,
}

pub fn sweep(cfg: SweepConfig, sample_path: &Path, out: Option<&Path>) -> Result<u8> {
    let sample = read_sample_csv(sample_path).with_context(|| format!("reading sample {}", sample_path.display()))?;
    if cfg.grid.len() != cfg.form.n_params() {
        return Err(Error::DimensionMismatch { expected: cfg.form.n_params(), got: cfg.grid.len() }.into());
    }
    let grid = grid_from_axes(&cfg.grid)?;
    let curve = sweep_objective(&sample, &cfg.family, cfg.form, &grid)?;
    let csv = curve_csv_string(&curve);
    match out {
        Some(path) => {
            write_output(path, &csv)?;
            let wrapped = RunConfig::Sweep(cfg);
            let side = Sidecar { format_version: FORMAT_VERSION, config: &wrapped, sample: sample_path.display().to_string() };
            write_output(&path.with_extension("json"), &to_json(&side)?)?;
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct StudyOutput<'a, T> {
    format_version: u32,
    config: &'a RunConfig,
    result: T,
}

fn rate_csv(r: &RateReport) -> String {
    let mut s = String::from("n_side,n,included,excluded,rmse_theta,rmse_phi_ratio,median_phi_ratio_error\n");
    for p in &r.points {
        s.push_str(&format!(
            "{},{},{},{},{:.16e},{:.16e},{:.16e}\n",
            p.n_side, p.n, p.included, p.excluded, p.rmse_theta, p.rmse_phi_ratio, p.median_phi_ratio_error
        ));
    }
    s
}

fn normality_csv(r: &NormalityReport) -> String {
    let mut s = String::from("parameter,skewness,excess_kurtosis,ks_statistic,ks_p_value\n");
    for p in &r.parameters {
        s.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            p.parameter, p.skewness, p.excess_kurtosis, p.ks_statistic, p.ks_p_value
        ));
    }
    s
}

fn clt_csv(points: &[QuadraticCltPoint]) -> String {
    let mut s = String::from("n,replicates,mean,variance,skewness,ks_statistic,ks_p_value\n");
    for p in points {
        s.push_str(&format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            p.n, p.replicates, p.mean, p.variance, p.skewness, p.ks_statistic, p.ks_p_value
        ));
    }
    s
}

/// Writes `json` to `out` (and `csv` beside it), or `json` to stdout.
fn emit(out: Option<&Path>, json: &str, csv: &str) -> Result<()> {
    match out {
        Some(path) => {
            write_output(path, json)?;
            let csv_path: PathBuf = path.with_extension("csv");
            write_output(&csv_path, csv)?;
        }
        None => print!("{json}"),
    }
    Ok(())
}

pub fn experiment(run: ExperimentRun, out: Option<&Path>) -> Result<u8> {
    let wrapped = RunConfig::Experiment(run.clone());
    match run {
        ExperimentRun::Replicated { experiment } => {
            let total = experiment.replicates;
            let report = run_replicated_with(&experiment, &|r| {
                eprintln!(
                    "replicate {}/{total}: theta_hat={:?} phi_hat={:.6} excluded={}",
                    r.index + 1,
                    r.theta_hat,
                    r.phi_hat,
                    r.excluded
                )
            })?;
            eprintln!(
                "simulate {:.1}s, estimate {:.1}s (summed over replicates)",
                report.timings.simulate_secs, report.timings.estimate_secs
            );
            emit(out, &to_json(&report)?, &report.csv_string())?;
        }
        ExperimentRun::Rate { experiment, n_sides } => {
            let report = rate_study_with(&experiment, &n_sides, &|n_side, r| {
                eprintln!("N={n_side}: {} included, {} excluded", r.included_count, r.excluded_count)
            })?;
            let csv = rate_csv(&report);
            emit(out, &to_json(&StudyOutput { format_version: FORMAT_VERSION, config: &wrapped, result: report })?, &csv)?;
        }
        ExperimentRun::Normality { experiment } => {
            let total = experiment.replicates;
            let replicated = run_replicated_with(&experiment, &|r| {
                eprintln!("replicate {}/{total}: theta_hat={:?} excluded={}", r.index + 1, r.theta_hat, r.excluded)
            })?;
            let report = normality_from(&experiment, &replicated)?;
            let csv = normality_csv(&report);
            emit(out, &to_json(&StudyOutput { format_version: FORMAT_VERSION, config: &wrapped, result: report })?, &csv)?;
        }
        ExperimentRun::QuadraticClt { n_list, replicates, seed } => {
            let points = quadratic_clt_check(&n_list, seed, replicates)?;
            let csv = clt_csv(&points);
            emit(out, &to_json(&StudyOutput { format_version: FORMAT_VERSION, config: &wrapped, result: points })?, &csv)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    format_version: u32,
    config: &'a RunConfig,
    n: usize,
    identifiability: IdentifiabilityReport,
    spectral_bounds: SpectralBoundsReport,
    kl: Vec<KlBoundReport>,
    passed: bool,
}

/// Diagnostics pass when the margin and smallest eigenvalue are positive and
/// every KL pair inside the bound's radius satisfies it.
pub fn check(cfg: CheckConfig) -> Result<u8> {
    let sites = make_perturbed_lattice(cfg.n_side, cfg.d, cfg.delta, cfg.seed)?;
    if sites.len() > SPECTRAL_ORACLE_MAX_N {
        return Err(Error::Precondition(format!(
            "dense diagnostics limited to n <= {SPECTRAL_ORACLE_MAX_N}, got n = {}",
            sites.len()
        ))
        .into());
    }
    let ident = identifiability_margin(&sites, &cfg.family, cfg.form, &cfg.theta_grid, cfg.radius)?;
    let bounds = spectral_bounds(&sites, &cfg.family, cfg.form, &cfg.theta_grid)?;
    let kl = cfg
        .kl_pairs
        .iter()
        .map(|[a, b]| kl_bound_check(&sites, &cfg.family, cfg.form, a, b))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let passed = ident.margin > 0.0 && bounds.lambda_min_est > 0.0 && kl.iter().all(|k| !k.within_radius || k.holds);
    let n = sites.len();
    let wrapped = RunConfig::Check(cfg);
    let out = CheckOutput {
        format_version: FORMAT_VERSION,
        config: &wrapped,
        n,
        identifiability: ident,
        spectral_bounds: bounds,
        kl,
        passed,
    };
    print!("{}", to_json(&out)?);
    Ok(if passed { EXIT_OK } else { EXIT_DIAGNOSTIC_FAILED })
}
