//! Dense Hermitian helpers shared by the correlation, estimation and
//! combining code paths.

use crate::error::{Result, SimError};
use crate::scalar::{real, Real};
use crate::{CMat, Cplx, RVec};
use nalgebra::{Cholesky, Dyn};
use num_traits::Float;

/// Largest entrywise deviation from Hermitian symmetry, max |M - M^H|.
pub fn hermitian_defect<T: Real>(m: &CMat<T>) -> T {
    let mut worst = T::zero();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
            if d > worst {
                worst = d;
            }
        }
    }
    Float::sqrt(worst)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues plus unitary
/// eigenvectors. The input is symmetrized first so roundoff asymmetry cannot
/// leak complex eigenvalues into the result.
pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> (RVec<T>, CMat<T>) {
    let sym = (m + m.adjoint()).scale(real(0.5));
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(m: &CMat<T>) -> T {
    let (vals, _) = hermitian_eigen(m);
    vals.iter().copied().fold(T::infinity(), |a, b| Float::min(a, b))
}

/// Reassembles V * diag(vals) * V^H.
pub fn assemble_eigen<T: Real>(vals: &RVec<T>, vecs: &CMat<T>) -> CMat<T> {
    let d = CMat::<T>::from_diagonal(&vals.map(|v| Cplx::new(v, T::zero())));
    vecs * d * vecs.adjoint()
}

/// Projects a Hermitian matrix onto the PSD cone by clamping negative
/// eigenvalues at zero.
pub fn clamp_psd<T: Real>(m: &CMat<T>) -> CMat<T> {
    let (mut vals, vecs) = hermitian_eigen(m);
    for v in vals.iter_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    assemble_eigen(&vals, &vecs)
}

/// Factor B with B * B^H = M for Hermitian PSD M, via the eigenvalue square
/// root. Eigenvalues below `rel_floor * lambda_max` are treated as zero.
pub fn hermitian_sqrt<T: Real>(m: &CMat<T>, rel_floor: T) -> CMat<T> {
    let (vals, vecs) = hermitian_eigen(m);
    let lmax = vals.iter().copied().fold(T::zero(), |a, b| Float::max(a, b));
    let floor = rel_floor * lmax;
    let sq = vals.map(|v| {
        if v > floor {
            Cplx::new(Float::sqrt(v), T::zero())
        } else {
            Cplx::new(T::zero(), T::zero())
        }
    });
    &vecs * CMat::<T>::from_diagonal(&sq)
}

/// Cholesky factorization of a Hermitian positive-definite matrix.
pub fn cholesky<T: Real>(m: &CMat<T>) -> Result<Cholesky<Cplx<T>, Dyn>> {
    Cholesky::new(m.clone())
        .ok_or_else(|| SimError::numerical("Cholesky failed: matrix not positive definite"))
}

/// Real part of the trace.
pub fn trace_re<T: Real>(m: &CMat<T>) -> T {
    let mut acc = T::zero();
    for i in 0..m.nrows().min(m.ncols()) {
        acc += m[(i, i)].re;
    }
    acc
}

/// Real part of the quadratic form v^H M v.
pub fn quad_form_re<T: Real>(v: &crate::CVec<T>, m: &CMat<T>) -> T {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Log-determinant of a Hermitian matrix with strictly positive eigenvalues;
/// `None` when any eigenvalue is nonpositive.
pub fn logdet_hermitian<T: Real>(m: &CMat<T>) -> Option<T> {
    if m.nrows() == 0 {
        return Some(T::zero());
    }
    let (vals, _) = hermitian_eigen(m);
    let mut acc = T::zero();
    for v in vals.iter() {
        if *v <= T::zero() {
            return None;
        }
        acc += Float::ln(*v);
    }
    Some(acc)
}

/// Principal submatrix M[idx, idx].
pub fn principal_submatrix<T: Real>(m: &CMat<T>, idx: &[usize]) -> CMat<T> {
    CMat::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}
