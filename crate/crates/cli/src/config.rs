//! Run configuration documents. Every document carries a top-level
//! `command` discriminator; unknown keys are rejected.

use anyhow::{bail, Context};
use invfree_core::estimation::AxisSpec;
use invfree_core::experiments::{ExperimentConfig, DEFAULT_FEATURES};
use invfree_core::kernels::{Anisotropy, AnisotropyForm, KernelFamily, ParamBounds, PhiBounds};
use invfree_core::OptimizerConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::UsageError;

fn default_dim() -> usize {
    2
}

fn default_features() -> usize {
    DEFAULT_FEATURES
}

fn default_form() -> AnisotropyForm {
    AnisotropyForm::Isotropic
}

fn default_radius() -> f64 {
    1.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Simulate(SimulateConfig),
    Estimate(EstimateConfig),
    Sweep(SweepConfig),
    Experiment(ExperimentRun),
    Check(CheckConfig),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Simulate(_) => "simulate",
            RunConfig::Estimate(_) => "estimate",
            RunConfig::Sweep(_) => "sweep",
            RunConfig::Experiment(_) => "experiment",
            RunConfig::Check(_) => "check",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub family: KernelFamily,
    pub anisotropy: Anisotropy,
    pub phi: f64,
    #[serde(rename = "N")]
    pub n_side: usize,
    #[serde(default = "default_dim")]
    pub d: usize,
    pub delta: f64,
    #[serde(default = "default_features")]
    pub p: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub family: KernelFamily,
    #[serde(default = "default_form")]
    pub form: AnisotropyForm,
    #[serde(default)]
    pub bounds: Option<ParamBounds>,
    #[serde(default)]
    pub phi_bounds: PhiBounds,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

impl EstimateConfig {
    /// Fills in the default box so the echoed config is complete.
    pub fn resolve(mut self) -> Self {
        if self.bounds.is_none() {
            self.bounds = Some(ParamBounds::default_theta(self.form.n_params()));
        }
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub family: KernelFamily,
    #[serde(default = "default_form")]
    pub form: AnisotropyForm,
    /// One axis per correlation parameter.
    pub grid: Vec<AxisSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentRun {
    Replicated { experiment: ExperimentConfig },
    Rate { experiment: ExperimentConfig, n_sides: Vec<usize> },
    Normality { experiment: ExperimentConfig },
    QuadraticClt { n_list: Vec<usize>, replicates: usize, seed: u64 },
}

pub const STUDIES: [&str; 4] = ["replicated", "rate", "normality", "quadratic_clt"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub family: KernelFamily,
    #[serde(default = "default_form")]
    pub form: AnisotropyForm,
    #[serde(rename = "N")]
    pub n_side: usize,
    #[serde(default = "default_dim")]
    pub d: usize,
    pub delta: f64,
    pub seed: u64,
    pub theta_grid: Vec<Vec<f64>>,
    /// Neighbourhood radius for the identifiability margin.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// `[theta1, theta2]` pairs for the KL bound.
    #[serde(default)]
    pub kl_pairs: Vec<[Vec<f64>; 2]>,
}

/// Reads a config document and checks that it is meant for `expected`.
/// An unknown `command` or `study` is a usage error; any other schema
/// violation is an input error.
pub fn load(path: &Path, expected: &str) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let command = value.get("command").and_then(|c| c.as_str());
    match command {
        Some(c) if c == expected => {}
        Some(c) => bail!(UsageError(format!("config {} is for command `{c}`, not `{expected}`", path.display()))),
        None => bail!(UsageError(format!("config {} has no string `command` field", path.display()))),
    }
    if expected == "experiment" {
        match value.get("study").and_then(|s| s.as_str()) {
            Some(s) if STUDIES.contains(&s) => {}
            Some(s) => bail!(UsageError(format!("unknown study `{s}`; expected one of {}", STUDIES.join(", ")))),
            None => bail!(UsageError(format!("experiment config must name a study: {}", STUDIES.join(", ")))),
        }
    }
    serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))
}
