use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::SiteSet;
use crate::kernels::{Anisotropy, KernelFamily};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

/// Features per ordered partial sum when evaluating a field at one site.
pub const FEATURE_CHUNK: usize = 4096;

/// Frequencies `omega_k` (row-major `p x d`) and phases `xi_k` of a
/// random-cosine field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFeatures {
    pub dim: usize,
    pub omegas: Vec<f64>,
    pub phases: Vec<f64>,
}

impl SpectralFeatures {
    pub fn new(dim: usize, omegas: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if dim == 0 || phases.is_empty() || omegas.len() != dim * phases.len() {
            return Err(Error::InvalidParameter(format!(
                "need p >= 1 phases and p*d frequencies, got {} phases and {} frequencies (d={dim})",
                phases.len(),
                omegas.len()
            )));
        }
        Ok(SpectralFeatures { dim, omegas, phases })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn omega(&self, k: usize) -> &[f64] {
        &self.omegas[k * self.dim..(k + 1) * self.dim]
    }

    /// Euclidean norms `||omega_k||`.
    pub fn radii(&self) -> Vec<f64> {
        self.omegas.chunks_exact(self.dim).map(|w| w.iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
    }
}

/// Sampler used for Matérn spectral frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaternSampler {
    /// Uniform direction with inverse-CDF radius; two dimensions only.
    Polar,
    /// `z / sqrt(W)`, `z ~ N(0, I)`, `W ~ chi^2(2 nu)`; any dimension.
    StudentMixture,
}

/// Inverse of the radius law `F(r) = 1 - (1 + r^2)^{-nu}` of the
/// two-dimensional Matérn spectral density.
pub fn matern_radius_icdf(u: f64, nu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("radius quantile must lie in [0, 1), got {u}")));
    }
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("Matérn order must be positive, got {nu}")));
    }
    // (1-u)^{-1/nu} - 1 written with exp_m1 to keep precision near u = 0.
    let t = (-(-u).ln_1p() / nu).exp_m1();
    Ok(t.max(0.0).sqrt())
}

/// Draws `p` spectral features for `family` under `aniso` in `dim` dimensions.
/// Matérn uses the polar sampler in two dimensions and the chi-square
/// mixture elsewhere.
pub fn sample_frequencies(
    family: &KernelFamily,
    aniso: &Anisotropy,
    dim: usize,
    p: usize,
    seed: u64,
) -> Result<SpectralFeatures> {
    let sampler = if dim == 2 { MaternSampler::Polar } else { MaternSampler::StudentMixture };
    sample_frequencies_with(family, aniso, dim, p, seed, sampler)
}

pub fn sample_frequencies_with(
    family: &KernelFamily,
    aniso: &Anisotropy,
    dim: usize,
    p: usize,
    seed: u64,
    matern_sampler: MaternSampler,
) -> Result<SpectralFeatures> {
    family.validate()?;
    aniso.validate()?;
    if p == 0 {
        return Err(Error::InvalidParameter("feature count p must be at least 1".into()));
    }
    let b = aniso.matrix(dim)?;
    let mut rng = stream_rng(seed, Stream::Frequencies);
    let mut unit = vec![0.0; dim];
    let mut omegas = Vec::with_capacity(p * dim);

    let push_scaled = |w: &[f64], omegas: &mut Vec<f64>| {
        for i in 0..dim {
            omegas.push((0..dim).map(|j| b[i * dim + j] * w[j]).sum());
        }
    };

    match *family {
        KernelFamily::Matern { nu } => match matern_sampler {
            MaternSampler::Polar => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch { expected: 2, got: dim });
                }
                for _ in 0..p {
                    let norm = loop {
                        unit.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                        let norm = unit.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm > 0.0 {
                            break norm;
                        }
                    };
                    let r = matern_radius_icdf(rng.random::<f64>(), nu)?;
                    unit.iter_mut().for_each(|v| *v *= r / norm);
                    push_scaled(&unit, &mut omegas);
                }
            }
            MaternSampler::StudentMixture => {
                let chi = ChiSquared::new(2.0 * nu).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                for _ in 0..p {
                    let w: f64 = chi.sample(&mut rng);
                    let scale = 1.0 / w.sqrt();
                    unit.iter_mut().for_each(|v| *v = rng.sample::<f64, _>(StandardNormal) * scale);
                    push_scaled(&unit, &mut omegas);
                }
            }
        },
        KernelFamily::RationalQuadratic { nu, dim: kernel_dim } => {
            if kernel_dim != dim {
                return Err(Error::DimensionMismatch { expected: kernel_dim, got: dim });
            }
            // (1 + u^2)^{-a} = E_s[exp(-s u^2)], s ~ Gamma(a, 1), and
            // exp(-s ||h||^2) is the characteristic function of N(0, 2s I).
            let gamma = Gamma::new(0.5 * dim as f64 + nu, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            for _ in 0..p {
                let s: f64 = gamma.sample(&mut rng);
                let sd = (2.0 * s).sqrt();
                unit.iter_mut().for_each(|v| *v = rng.sample::<f64, _>(StandardNormal) * sd);
                push_scaled(&unit, &mut omegas);
            }
        }
        KernelFamily::PoweredExponential { .. } => {
            return Err(Error::SamplerUnavailable("powered exponential family".into()));
        }
    }

    let mut phase_rng = stream_rng(seed, Stream::Phases);
    let phases = (0..p).map(|_| phase_rng.random_range(-PI..=PI)).collect();
    SpectralFeatures::new(dim, omegas, phases)
}

/// `sqrt(phi) * sqrt(2/p) * sum_k cos(<omega_k, s> + xi_k)` at every site.
///
/// Each site is summed by one worker in fixed chunks of [`FEATURE_CHUNK`]
/// features, so the result does not depend on the number of workers.
pub fn field_from_features(sites: &SiteSet, features: &SpectralFeatures, phi: f64) -> Result<Vec<f64>> {
    if sites.dim() != features.dim {
        return Err(Error::DimensionMismatch { expected: features.dim, got: sites.dim() });
    }
    if !(phi > 0.0) {
        return Err(Error::InvalidParameter(format!("variance must be positive, got {phi}")));
    }
    let scale = (phi * 2.0 / features.len() as f64).sqrt();
    let d = features.dim;
    let y = sites
        .coords()
        .par_chunks_exact(d)
        .map(|s| {
            let mut total = 0.0;
            for (w_chunk, xi_chunk) in features.omegas.chunks(FEATURE_CHUNK * d).zip(features.phases.chunks(FEATURE_CHUNK)) {
                let partial: f64 = if d == 2 {
                    let (s0, s1) = (s[0], s[1]);
                    w_chunk.chunks_exact(2).zip(xi_chunk).map(|(w, xi)| (w[0] * s0 + w[1] * s1 + xi).cos()).sum()
                } else {
                    w_chunk
                        .chunks_exact(d)
                        .zip(xi_chunk)
                        .map(|(w, xi)| (w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>() + xi).cos())
                        .sum()
                };
                total += partial;
            }
            scale * total
        })
        .collect();
    Ok(y)
}
