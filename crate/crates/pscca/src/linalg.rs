//! Small dense linear-algebra helpers shared by the model and the harness.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest eigenvalue are floored
/// before inversion to keep inverse square roots of ill-conditioned blocks
/// finite.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

pub fn is_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = m.amax().max(1e-300);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Inverse symmetric square root `M^(-1/2)` of a symmetric positive-definite
/// matrix, via eigendecomposition with a relative eigenvalue floor.
pub fn sym_inverse_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !is_symmetric(m, 1e-9) {
        return Err(Error::Domain("inverse sqrt of a non-symmetric matrix".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let max_ev = eig.eigenvalues.amax();
    if !(max_ev.is_finite()) {
        return Err(Error::Domain("non-finite eigenvalues".into()));
    }
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(Error::Singular(
            "matrix is not positive definite (non-positive eigenvalue)".into(),
        ));
    }
    let floor = EIGENVALUE_FLOOR * max_ev.max(1e-300);
    let scaled: DVector<f64> =
        eig.eigenvalues.map(|v| 1.0 / v.max(floor).sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&scaled) * q.transpose())
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn sym_eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Symmetric square root of a positive-semidefinite matrix; tiny negative
/// eigenvalues from rounding are clamped to zero.
pub fn sym_sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !is_symmetric(m, 1e-9) {
        return Err(Error::Domain("square root of a non-symmetric matrix".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let max_ev = eig.eigenvalues.amax().max(1e-300);
    if eig.eigenvalues.iter().any(|&v| v < -1e-9 * max_ev) {
        return Err(Error::Singular("matrix is not positive semidefinite".into()));
    }
    let roots: DVector<f64> = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

/// Log-determinant of a symmetric positive-definite matrix via Cholesky.
pub fn spd_log_det(m: &DMatrix<f64>) -> Result<f64> {
    let chol = nalgebra::Cholesky::new(m.clone())
        .ok_or_else(|| Error::Singular("Cholesky factorization failed".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}
