//! Small dense linear-algebra helpers shared across the crate.
//!
//! Everything here wraps `nalgebra` with the deterministic conventions the
//! rest of the crate relies on: eigenvalues sorted ascending, eigenvector
//! signs fixed so the first nonzero component is positive, and positive
//! definiteness judged against a tolerance relative to the largest
//! eigenvalue.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue floor for declaring a symmetric matrix positive
/// definite: the smallest eigenvalue must exceed `SPD_RTOL * max|eigenvalue|`.
pub(crate) const SPD_RTOL: f64 = 1e-10;

/// Relative tolerance on `|A - A^T|` entries when validating symmetry.
pub(crate) const SYM_RTOL: f64 = 1e-10;

/// Condition-number ceiling beyond which a matrix is rejected as
/// numerically singular.
pub(crate) const COND_LIMIT: f64 = 1e12;

/// Largest absolute asymmetry `max_ij |A_ij - A_ji|`.
pub(crate) fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Checks symmetry up to a relative tolerance and returns the symmetrized
/// matrix `(A + A^T) / 2` so downstream code never sees stray asymmetry.
pub(crate) fn require_symmetric(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let asym = max_asymmetry(a);
    if asym > SYM_RTOL * scale {
        return Err(Error::NotSymmetric {
            max_asymmetry: asym,
        });
    }
    Ok((a + a.transpose()) * 0.5)
}

/// A symmetric eigendecomposition with eigenvalues sorted ascending and each
/// eigenvector's sign fixed so its first nonzero component is positive.
/// Equal eigenvalues keep the order produced by the stable sort, i.e. ties
/// are broken by the original coordinate index of the decomposition.
pub(crate) struct SortedEigen {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: DMatrix<f64>,
}

/// Symmetric eigendecomposition with the crate's deterministic ordering and
/// sign conventions. The input must already be symmetric.
pub(crate) fn sorted_symmetric_eigen(a: &DMatrix<f64>) -> SortedEigen {
    let se = nalgebra::SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = se.eigenvalues[src];
        let mut col = se.eigenvectors.column(src).clone_owned();
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    SortedEigen { values, vectors }
}

/// Flips a vector in place so its first nonzero component (relative to the
/// vector's largest entry) is positive.
pub(crate) fn fix_sign(v: &mut DVector<f64>) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return;
    }
    for x in v.iter() {
        if x.abs() > 1e-12 * scale {
            if *x < 0.0 {
                *v *= -1.0;
            }
            return;
        }
    }
}

/// Validates that a symmetric matrix is positive definite (smallest
/// eigenvalue above `SPD_RTOL` times the largest magnitude eigenvalue) and
/// returns its sorted eigendecomposition.
pub(crate) fn spd_eigen(a: &DMatrix<f64>) -> Result<SortedEigen> {
    let eig = sorted_symmetric_eigen(a);
    let max_abs = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.values[0];
    if max_abs == 0.0 || min <= SPD_RTOL * max_abs {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(eig)
}

/// Symmetric positive-definite square root `A^{1/2}` via eigendecomposition.
#[cfg(test)]
pub(crate) fn spd_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = spd_eigen(a)?;
    Ok(scaled_outer(&eig, f64::sqrt))
}

/// Inverse symmetric square root `A^{-1/2}` via eigendecomposition.
pub(crate) fn spd_inv_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = spd_eigen(a)?;
    Ok(scaled_outer(&eig, |v| 1.0 / v.sqrt()))
}

fn scaled_outer(eig: &SortedEigen, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = eig.values.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = f(eig.values[i]);
    }
    &eig.vectors * d * eig.vectors.transpose()
}

/// 2-norm condition estimate from the singular values.
pub(crate) fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().fold(0.0f64, |m, v| m.max(*v));
    let min = sv.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Requires `a` to be invertible with condition estimate below
/// [`COND_LIMIT`], returning the inverse.
pub(crate) fn checked_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cond = condition_estimate(a);
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::IllConditioned {
            cond,
            limit: COND_LIMIT,
        });
    }
    a.clone().lu().try_inverse().ok_or(Error::IllConditioned {
        cond: f64::INFINITY,
        limit: COND_LIMIT,
    })
}

/// Orthogonal matrix whose first column equals the given unit vector,
/// completed by a Householder reflector. Deterministic: no randomness, and
/// `v = e1` yields the identity.
pub(crate) fn orthogonal_completion(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    debug_assert!((v.norm() - 1.0).abs() < 1e-8, "v must be a unit vector");
    let mut u = v.clone();
    u[0] -= 1.0;
    let nu = u.norm();
    if nu < 1e-14 {
        return DMatrix::identity(n, n);
    }
    u /= nu;
    // H = I - 2 u u^T maps e1 to v; its columns are an orthonormal basis.
    DMatrix::identity(n, n) - 2.0 * &u * u.transpose()
}
