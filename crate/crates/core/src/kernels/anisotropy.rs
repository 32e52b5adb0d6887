use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Geometric anisotropy: the lag `h` enters the correlation only through
/// `||B h||`, where `B` is the symmetric square root of `A`.
///
/// Ranges are in lattice units; `Isotropic { theta }` is `B = I / theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Anisotropy {
    Isotropic { theta: f64 },
    /// `B = diag(1/theta, 1/rho)`, two dimensions only.
    DiagonalRanges { theta: f64, rho: f64 },
    /// Symmetric positive-definite `B` in inverse-range units.
    FullMatrix { b: Vec<Vec<f64>> },
}

/// Which parametrization of [`Anisotropy`] the estimator searches over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnisotropyForm {
    Isotropic,
    DiagonalRanges,
    /// Upper triangle of `B`, row-major.
    FullMatrix { dim: usize },
}

impl AnisotropyForm {
    /// Length of the correlation-parameter vector `theta`.
    pub fn n_params(&self) -> usize {
        match *self {
            AnisotropyForm::Isotropic => 1,
            AnisotropyForm::DiagonalRanges => 2,
            AnisotropyForm::FullMatrix { dim } => dim * (dim + 1) / 2,
        }
    }

    pub fn build(&self, theta: &[f64]) -> Result<Anisotropy> {
        if theta.len() != self.n_params() {
            return Err(Error::DimensionMismatch { expected: self.n_params(), got: theta.len() });
        }
        let a = match *self {
            AnisotropyForm::Isotropic => Anisotropy::Isotropic { theta: theta[0] },
            AnisotropyForm::DiagonalRanges => Anisotropy::DiagonalRanges { theta: theta[0], rho: theta[1] },
            AnisotropyForm::FullMatrix { dim } => {
                let mut b = vec![vec![0.0; dim]; dim];
                let mut it = theta.iter();
                for i in 0..dim {
                    for j in i..dim {
                        let v = *it.next().expect("length checked");
                        b[i][j] = v;
                        b[j][i] = v;
                    }
                }
                Anisotropy::FullMatrix { b }
            }
        };
        a.validate()?;
        Ok(a)
    }

    /// Spatial dimension this form is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match *self {
            AnisotropyForm::Isotropic => None,
            AnisotropyForm::DiagonalRanges => Some(2),
            AnisotropyForm::FullMatrix { dim } => Some(dim),
        }
    }
}

impl Anisotropy {
    pub fn isotropic(theta: f64) -> Result<Self> {
        let a = Anisotropy::Isotropic { theta };
        a.validate()?;
        Ok(a)
    }

    pub fn diagonal_ranges(theta: f64, rho: f64) -> Result<Self> {
        let a = Anisotropy::DiagonalRanges { theta, rho };
        a.validate()?;
        Ok(a)
    }

    pub fn full_matrix(b: Vec<Vec<f64>>) -> Result<Self> {
        let a = Anisotropy::FullMatrix { b };
        a.validate()?;
        Ok(a)
    }

    pub fn form(&self) -> AnisotropyForm {
        match self {
            Anisotropy::Isotropic { .. } => AnisotropyForm::Isotropic,
            Anisotropy::DiagonalRanges { .. } => AnisotropyForm::DiagonalRanges,
            Anisotropy::FullMatrix { b } => AnisotropyForm::FullMatrix { dim: b.len() },
        }
    }

    /// The parameter vector `theta` under [`Self::form`].
    pub fn params(&self) -> Vec<f64> {
        match self {
            Anisotropy::Isotropic { theta } => vec![*theta],
            Anisotropy::DiagonalRanges { theta, rho } => vec![*theta, *rho],
            Anisotropy::FullMatrix { b } => {
                let d = b.len();
                (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).map(|(i, j)| b[i][j]).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self {
            Anisotropy::Isotropic { theta } if positive(*theta) => Ok(()),
            Anisotropy::DiagonalRanges { theta, rho } if positive(*theta) && positive(*rho) => Ok(()),
            Anisotropy::FullMatrix { b } => {
                let d = b.len();
                if d == 0 || b.iter().any(|row| row.len() != d) {
                    return Err(Error::InvalidParameter("anisotropy matrix must be square and non-empty".into()));
                }
                for i in 0..d {
                    for j in 0..i {
                        if b[i][j] != b[j][i] {
                            return Err(Error::InvalidParameter("anisotropy matrix must be symmetric".into()));
                        }
                    }
                }
                let (lo, _) = self.eigen_range()?;
                if lo > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("anisotropy matrix is not positive definite (min eigenvalue {lo})")))
                }
            }
            other => Err(Error::InvalidParameter(format!("ranges must be positive: {other:?}"))),
        }
    }

    /// Smallest and largest eigenvalue of `B`.
    pub fn eigen_range(&self) -> Result<(f64, f64)> {
        Ok(match self {
            Anisotropy::Isotropic { theta } => (1.0 / theta, 1.0 / theta),
            Anisotropy::DiagonalRanges { theta, rho } => {
                let (a, b) = (1.0 / theta, 1.0 / rho);
                (a.min(b), a.max(b))
            }
            Anisotropy::FullMatrix { b } => {
                let d = b.len();
                let m = DMatrix::from_fn(d, d, |i, j| b[i][j]);
                let eig = SymmetricEigen::new(m).eigenvalues;
                (eig.min(), eig.max())
            }
        })
    }

    /// Checks that the eigenvalues of `A = B^2` lie in `[lambda_min, lambda_max]`.
    pub fn check_eigen_bounds(&self, lambda_min: f64, lambda_max: f64) -> Result<()> {
        let (lo, hi) = self.eigen_range()?;
        let (lo, hi) = (lo * lo, hi * hi);
        if lo >= lambda_min && hi <= lambda_max {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "eigenvalues of A in [{lo}, {hi}] outside declared [{lambda_min}, {lambda_max}]"
            )))
        }
    }

    /// Row-major `B` as a `dim x dim` matrix.
    pub fn matrix(&self, dim: usize) -> Result<Vec<f64>> {
        let mut m = vec![0.0; dim * dim];
        match self {
            Anisotropy::Isotropic { theta } => (0..dim).for_each(|i| m[i * dim + i] = 1.0 / theta),
            Anisotropy::DiagonalRanges { theta, rho } => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch { expected: 2, got: dim });
                }
                m[0] = 1.0 / theta;
                m[3] = 1.0 / rho;
            }
            Anisotropy::FullMatrix { b } => {
                if b.len() != dim {
                    return Err(Error::DimensionMismatch { expected: b.len(), got: dim });
                }
                for i in 0..dim {
                    m[i * dim..(i + 1) * dim].copy_from_slice(&b[i]);
                }
            }
        }
        Ok(m)
    }

    /// Specialized evaluator of `||B h||` for lags of dimension `dim`.
    pub fn metric(&self, dim: usize) -> Result<LagMetric> {
        Ok(match self {
            Anisotropy::Isotropic { theta } => LagMetric::Isotropic { inv_range: 1.0 / theta },
            Anisotropy::DiagonalRanges { theta, rho } => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch { expected: 2, got: dim });
                }
                LagMetric::Diagonal { inv_ranges: vec![1.0 / theta, 1.0 / rho] }
            }
            Anisotropy::FullMatrix { .. } => LagMetric::Full { b: self.matrix(dim)?, dim },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LagMetric {
    Isotropic { inv_range: f64 },
    Diagonal { inv_ranges: Vec<f64> },
    Full { b: Vec<f64>, dim: usize },
}

impl LagMetric {
    #[inline]
    pub fn norm(&self, h: &[f64]) -> f64 {
        match self {
            LagMetric::Isotropic { inv_range } => h.iter().map(|v| v * v).sum::<f64>().sqrt() * inv_range,
            LagMetric::Diagonal { inv_ranges } => {
                h.iter().zip(inv_ranges).map(|(v, s)| (v * s) * (v * s)).sum::<f64>().sqrt()
            }
            LagMetric::Full { b, dim } => (0..*dim)
                .map(|i| {
                    let row = &b[i * dim..(i + 1) * dim];
                    let bh: f64 = row.iter().zip(h).map(|(a, x)| a * x).sum();
                    bh * bh
                })
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// `||B h||_2`, the lag measured in range units.
pub fn scaled_distance(h: &[f64], aniso: &Anisotropy) -> Result<f64> {
    aniso.validate()?;
    Ok(aniso.metric(h.len())?.norm(h))
}
