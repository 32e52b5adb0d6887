//! Perturbed-lattice site generation and the spectral (random cosine)
//! simulator for stationary Gaussian fields.

mod io;
mod lattice;
mod spectral;

pub use io::{read_sample_csv, sample_csv_string, write_atomic, write_sample_csv, Provenance, FORMAT_VERSION};
pub use lattice::{make_perturbed_lattice, LatticeMeta, SiteSet};
pub use spectral::{
    field_from_features, matern_radius_icdf, sample_frequencies, sample_frequencies_with, MaternSampler,
    SpectralFeatures, FEATURE_CHUNK,
};

use crate::kernels::{Anisotropy, KernelFamily};
use crate::{Error, Result};

/// One realization `y` of a field observed at `sites`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub sites: SiteSet,
    pub y: Vec<f64>,
    pub provenance: Option<Provenance>,
}

impl FieldSample {
    pub fn new(sites: SiteSet, y: Vec<f64>) -> Result<Self> {
        if y.len() != sites.len() {
            return Err(Error::DimensionMismatch { expected: sites.len(), got: y.len() });
        }
        Ok(FieldSample { sites, y, provenance: None })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// The same sample with `y` multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        FieldSample { y: self.y.iter().map(|v| c * v).collect(), ..self.clone() }
    }
}

/// Simulates the field with covariance `phi * K(||B h||)` at `sites` using
/// `p` random cosine features drawn from the `frequencies` and `phases`
/// streams of `seed`.
pub fn simulate_field(
    sites: &SiteSet,
    family: &KernelFamily,
    aniso: &Anisotropy,
    phi: f64,
    p: usize,
    seed: u64,
) -> Result<FieldSample> {
    let features = sample_frequencies(family, aniso, sites.dim(), p, seed)?;
    let y = field_from_features(sites, &features, phi)?;
    let meta = sites.meta().copied();
    Ok(FieldSample {
        sites: sites.clone(),
        y,
        provenance: Some(Provenance {
            format_version: FORMAT_VERSION,
            family: family.name().to_string(),
            nu: family.nu(),
            anisotropy: aniso.clone(),
            phi,
            p,
            seed,
            n_side: meta.map(|m| m.n_side),
            d: sites.dim(),
            delta: meta.map(|m| m.delta),
        }),
    })
}
