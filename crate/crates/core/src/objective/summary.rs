use rayon::prelude::*;

use crate::kernels::{Anisotropy, AnisotropyForm, KernelFamily, LagMetric, PhiBounds, RadialProfile};
use crate::sampling::SiteSet;
use crate::{Error, Result};

/// Rows per block of the pairwise reduction.
pub const ROW_BLOCK: usize = 256;

/// `Y'K(theta)Y` and `||K(theta)||_F^2` for one `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSummary {
    pub yky: f64,
    pub k_frob_sq: f64,
    pub n: usize,
}

impl QuadraticSummary {
    /// `(1/n) (phi Y'KY - phi^2/2 ||K||_F^2)`.
    pub fn f_n(&self, phi: f64) -> f64 {
        (phi * self.yky - 0.5 * phi * phi * self.k_frob_sq) / self.n as f64
    }

    /// `Y'KY / ||K||_F`.
    pub fn g_n(&self) -> f64 {
        self.yky / self.k_frob_sq.sqrt()
    }

    /// Unconstrained maximizer of `f_n` in `phi`: `Y'KY / ||K||_F^2`.
    pub fn phi_vertex(&self) -> f64 {
        self.yky / self.k_frob_sq
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Kahan accumulator for the hot inner loop.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    #[inline(always)]
    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// A field sample with its sites put in a canonical order, ready for
/// repeated objective evaluation.
///
/// Sites are sorted lexicographically by coordinates (ties broken by `y`),
/// so every permutation of the same sample produces bit-identical sums.
#[derive(Debug, Clone)]
pub struct PreparedField {
    dim: usize,
    coords: Vec<f64>,
    y: Vec<f64>,
}

impl PreparedField {
    pub fn new(sites: &SiteSet, y: &[f64]) -> Result<Self> {
        if y.len() != sites.len() {
            return Err(Error::DimensionMismatch { expected: sites.len(), got: y.len() });
        }
        if sites.is_empty() {
            return Err(Error::Empty("sample has no sites".into()));
        }
        let mut order: Vec<usize> = (0..y.len()).collect();
        order.sort_by(|&a, &b| {
            sites
                .site(a)
                .iter()
                .zip(sites.site(b))
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(y[a].total_cmp(&y[b]))
        });
        let coords = order.iter().flat_map(|&i| sites.site(i).iter().copied()).collect();
        let y = order.iter().map(|&i| y[i]).collect();
        Ok(PreparedField { dim: sites.dim(), coords, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Pairwise sums over all `i < j` in blocks of [`ROW_BLOCK`] rows;
    /// block partials are combined in ascending block order.
    pub fn summary(&self, profile: &RadialProfile, metric: &LagMetric) -> QuadraticSummary {
        let (off_yky, off_frob) = match (metric, self.dim) {
            (LagMetric::Isotropic { inv_range }, 2) => {
                let s = *inv_range;
                self.reduce(profile, |a, b| {
                    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
                    (dx * dx + dy * dy).sqrt() * s
                })
            }
            (LagMetric::Diagonal { inv_ranges }, 2) => {
                let (sx, sy) = (inv_ranges[0], inv_ranges[1]);
                self.reduce(profile, |a, b| {
                    let (dx, dy) = ((a[0] - b[0]) * sx, (a[1] - b[1]) * sy);
                    (dx * dx + dy * dy).sqrt()
                })
            }
            _ => self.reduce(profile, |a, b| {
                let mut buf = [0.0f64; 8];
                if a.len() <= buf.len() {
                    for (k, slot) in buf.iter_mut().enumerate().take(a.len()) {
                        *slot = a[k] - b[k];
                    }
                    metric.norm(&buf[..a.len()])
                } else {
                    let h: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                    metric.norm(&h)
                }
            }),
        };
        let n = self.len();
        let mut yky = CompensatedSum::default();
        for v in &self.y {
            yky.add(v * v);
        }
        yky.add(2.0 * off_yky);
        QuadraticSummary { yky: yky.value(), k_frob_sq: n as f64 + 2.0 * off_frob, n }
    }

    fn reduce<D>(&self, profile: &RadialProfile, dist: D) -> (f64, f64)
    where
        D: Fn(&[f64], &[f64]) -> f64 + Sync,
    {
        let n = self.len();
        let d = self.dim;
        let n_blocks = n.div_ceil(ROW_BLOCK);
        let partials: Vec<(f64, f64)> = (0..n_blocks)
            .into_par_iter()
            .map(|blk| {
                let mut yky = CompensatedSum::default();
                let mut frob = CompensatedSum::default();
                for i in blk * ROW_BLOCK..((blk + 1) * ROW_BLOCK).min(n) {
                    let si = &self.coords[i * d..(i + 1) * d];
                    let mut row_ky = Kahan::default();
                    let mut row_kk = Kahan::default();
                    for j in i + 1..n {
                        let k = profile.eval(dist(si, &self.coords[j * d..(j + 1) * d]));
                        row_ky.add(k * self.y[j]);
                        row_kk.add(k * k);
                    }
                    yky.add(self.y[i] * row_ky.sum);
                    yky.add(-self.y[i] * row_ky.c);
                    frob.add(row_kk.sum);
                    frob.add(-row_kk.c);
                }
                (yky.value(), frob.value())
            })
            .collect();
        let mut yky = CompensatedSum::default();
        let mut frob = CompensatedSum::default();
        for (a, b) in partials {
            yky.add(a);
            frob.add(b);
        }
        (yky.value(), frob.value())
    }
}

/// Correlation model evaluated on a prepared sample: family, anisotropy
/// parametrization, and the sample itself.
#[derive(Debug, Clone)]
pub struct Objective {
    field: PreparedField,
    profile: RadialProfile,
    form: AnisotropyForm,
}

impl Objective {
    pub fn new(sites: &SiteSet, y: &[f64], family: &KernelFamily, form: AnisotropyForm) -> Result<Self> {
        if let Some(d) = form.dim() {
            if d != sites.dim() {
                return Err(Error::DimensionMismatch { expected: d, got: sites.dim() });
            }
        }
        if let KernelFamily::RationalQuadratic { dim, .. } = family {
            if *dim != sites.dim() {
                return Err(Error::DimensionMismatch { expected: *dim, got: sites.dim() });
            }
        }
        Ok(Objective { field: PreparedField::new(sites, y)?, profile: family.profile()?, form })
    }

    pub fn n(&self) -> usize {
        self.field.len()
    }

    pub fn form(&self) -> AnisotropyForm {
        self.form
    }

    pub fn summary_at(&self, aniso: &Anisotropy) -> Result<QuadraticSummary> {
        let metric = aniso.metric(self.field.dim())?;
        Ok(self.field.summary(&self.profile, &metric))
    }

    pub fn summary(&self, theta: &[f64]) -> Result<QuadraticSummary> {
        self.summary_at(&self.form.build(theta)?)
    }

    pub fn f_n(&self, phi: f64, theta: &[f64]) -> Result<f64> {
        if !(phi > 0.0) {
            return Err(Error::InvalidParameter(format!("variance must be positive, got {phi}")));
        }
        Ok(self.summary(theta)?.f_n(phi))
    }

    pub fn g_n(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.summary(theta)?.g_n())
    }

    pub fn phi_hat(&self, theta: &[f64], bounds: &PhiBounds) -> Result<PhiEstimate> {
        bounds.validate()?;
        let (phi, clamped) = bounds.clamp(self.summary(theta)?.phi_vertex());
        Ok(PhiEstimate { phi, clamped })
    }
}

/// Closed-form variance estimate after clamping into the variance interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEstimate {
    pub phi: f64,
    pub clamped: bool,
}

/// `Y'K(theta)Y` and `||K(theta)||_F^2` without forming `K`.
pub fn quadratic_summary(y: &[f64], sites: &SiteSet, family: &KernelFamily, aniso: &Anisotropy) -> Result<QuadraticSummary> {
    aniso.validate()?;
    Objective::new(sites, y, family, aniso.form())?.summary_at(aniso)
}

/// The inversion-free loss `F_n(Y, phi, theta)`.
pub fn f_n(y: &[f64], sites: &SiteSet, family: &KernelFamily, phi: f64, aniso: &Anisotropy) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(Error::InvalidParameter(format!("variance must be positive, got {phi}")));
    }
    Ok(quadratic_summary(y, sites, family, aniso)?.f_n(phi))
}

/// The profile objective `G_n(Y, theta) = Y'KY / ||K||_F`.
pub fn g_n(y: &[f64], sites: &SiteSet, family: &KernelFamily, aniso: &Anisotropy) -> Result<f64> {
    Ok(quadratic_summary(y, sites, family, aniso)?.g_n())
}

/// Closed-form variance `Y'KY / ||K||_F^2`, clamped to `bounds`.
pub fn phi_hat(y: &[f64], sites: &SiteSet, family: &KernelFamily, aniso: &Anisotropy, bounds: &PhiBounds) -> Result<PhiEstimate> {
    bounds.validate()?;
    let (phi, clamped) = bounds.clamp(quadratic_summary(y, sites, family, aniso)?.phi_vertex());
    Ok(PhiEstimate { phi, clamped })
}
