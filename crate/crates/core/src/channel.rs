//! Spatially correlated Rayleigh channel sampling: h ~ CN(0, R) realized as
//! h = B w with B B^H = R and w a standard complex Gaussian vector.

use crate::error::{Result, SimError};
use crate::linalg;
use crate::scalar::{real, Real};
use crate::{CMat, CVec, Cplx};
use num_traits::Float;
use rand::Rng;

/// Factor B of a covariance matrix with B * B^H = R.
#[derive(Debug, Clone)]
pub struct CovarianceFactor<T: Real> {
    factor: CMat<T>,
}

impl<T: Real> CovarianceFactor<T> {
    pub fn factor(&self) -> &CMat<T> {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// One channel draw h = B w, w ~ CN(0, I).
    pub fn sample(&self, rng: &mut impl Rng) -> CVec<T> {
        &self.factor * standard_complex_gaussian(self.dim(), rng)
    }
}

/// Standard complex Gaussian vector: each entry CN(0, 1), i.e. real and
/// imaginary parts independent N(0, 1/2).
pub fn standard_complex_gaussian<T: Real>(n: usize, rng: &mut impl Rng) -> CVec<T> {
    let scale = Float::sqrt(real::<T>(0.5));
    CVec::from_fn(n, |_, _| {
        Cplx::new(
            T::standard_normal(rng) * scale,
            T::standard_normal(rng) * scale,
        )
    })
}

/// Eigendecomposition-based square root of a Hermitian PSD matrix;
/// eigenvalues below 1e-12 * lambda_max are treated as zero (Jakes matrices
/// at realistic sizes are numerically rank deficient).
pub fn covariance_factor<T: Real>(r: &CMat<T>) -> Result<CovarianceFactor<T>> {
    let scale = r.norm();
    if crate::linalg::hermitian_defect(r) > real::<T>(1e-10) * Float::max(scale, T::one()) {
        return Err(SimError::domain("covariance factor requires a Hermitian input"));
    }
    Ok(CovarianceFactor {
        factor: linalg::hermitian_sqrt(r, real(1e-12)),
    })
}

/// Per-deployment sampler holding one factor per (user, AP) link.
///
/// Draw order is user-major then AP ([k][l]), one fresh standard Gaussian
/// per link, so a fixed seed reproduces the same realization set.
#[derive(Debug, Clone)]
pub struct ChannelSampler<T: Real> {
    factors: Vec<Vec<CMat<T>>>,
    dim: usize,
}

impl<T: Real> ChannelSampler<T> {
    pub fn from_covariances(covariances: &[Vec<CMat<T>>]) -> Result<Self> {
        let mut factors = Vec::with_capacity(covariances.len());
        let mut dim = 0;
        for row in covariances {
            let mut frow = Vec::with_capacity(row.len());
            for r in row {
                let f = covariance_factor(r)?;
                dim = f.dim();
                frow.push(f.factor);
            }
            factors.push(frow);
        }
        Ok(Self { factors, dim })
    }

    pub fn n_users(&self) -> usize {
        self.factors.len()
    }

    pub fn n_aps(&self) -> usize {
        self.factors.first().map_or(0, Vec::len)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Draws h_{k,l} for every link of one coherence block.
    pub fn draw_all(&self, rng: &mut impl Rng) -> Vec<Vec<CVec<T>>> {
        self.factors
            .iter()
            .map(|row| {
                row.iter()
                    .map(|f| f * standard_complex_gaussian(self.dim, rng))
                    .collect()
            })
            .collect()
    }
}
