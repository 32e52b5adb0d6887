use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

/// How a [`SiteSet`] was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeMeta {
    /// Grid side `N`; `n = N^d`.
    pub n_side: usize,
    pub dim: usize,
    /// Perturbation amplitude in `[0, 1/2)`.
    pub delta: f64,
    pub seed: u64,
}

/// Ordered sampling locations in `R^d`, stored row-major (`n x d`).
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    dim: usize,
    coords: Vec<f64>,
    meta: Option<LatticeMeta>,
}

impl SiteSet {
    /// Sites from a flat row-major coordinate buffer.
    pub fn from_coords(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("site dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch { expected: dim * (coords.len() / dim + 1), got: coords.len() });
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("site coordinates must be finite".into()));
        }
        Ok(SiteSet { dim, coords, meta: None })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or_else(|| Error::Empty("no sites".into()))?;
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        Self::from_coords(dim, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn meta(&self) -> Option<&LatticeMeta> {
        self.meta.as_ref()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn site(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Smallest distance between two distinct sites (brute force).
    pub fn min_pairwise_distance(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = self.site(i);
            for j in i + 1..n {
                let d2: f64 = a.iter().zip(self.site(j)).map(|(x, y)| (x - y) * (x - y)).sum();
                best = best.min(d2);
            }
        }
        best.sqrt()
    }

    /// The same sites in a different order: `out[k] = self[order[k]]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: order.len() });
        }
        let coords = order.iter().flat_map(|&i| self.site(i).iter().copied()).collect();
        Ok(SiteSet { dim: self.dim, coords, meta: self.meta })
    }
}

/// `delta`-perturbed regular lattice `{v_i + delta p_i}` with `v_i` running
/// over `{1..N}^d` in row-major order (last coordinate fastest) and `p_i`
/// i.i.d. uniform on `[-1, 1]^d` from the `lattice` stream of `seed`.
pub fn make_perturbed_lattice(n_side: usize, dim: usize, delta: f64, seed: u64) -> Result<SiteSet> {
    if n_side == 0 || dim == 0 {
        return Err(Error::InvalidParameter(format!("lattice needs N >= 1 and d >= 1, got N={n_side}, d={dim}")));
    }
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidParameter(format!("perturbation delta must lie in [0, 1/2), got {delta}")));
    }
    let n = n_side
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::InvalidParameter(format!("N^d overflows for N={n_side}, d={dim}")))?;
    let mut rng = stream_rng(seed, Stream::Lattice);
    let mut coords = Vec::with_capacity(n * dim);
    let mut index = vec![1usize; dim];
    for _ in 0..n {
        for &v in &index {
            let p: f64 = rng.random_range(-1.0..=1.0);
            coords.push(v as f64 + delta * p);
        }
        for k in (0..dim).rev() {
            if index[k] < n_side {
                index[k] += 1;
                break;
            }
            index[k] = 1;
        }
    }
    Ok(SiteSet { dim, coords, meta: Some(LatticeMeta { n_side, dim, delta, seed }) })
}
