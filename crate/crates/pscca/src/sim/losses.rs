//! Matrix discrepancy losses used to score estimates against ground truth.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Sum of squared elementwise differences.
pub fn frobenius_loss(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            u.shape(),
            v.shape()
        )));
    }
    Ok(u.iter().zip(v.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// [`frobenius_loss`] over plain slices (canonical-correlation lists).
pub fn frobenius_loss_slices(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", u.len(), v.len())));
    }
    Ok(u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Stein loss `trace(V^-1 U) - logdet(V^-1 U) - p` between symmetric
/// positive-definite matrices; non-negative and zero exactly at `U = V`.
pub fn stein_loss(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            u.shape(),
            v.shape()
        )));
    }
    if !u.is_square() {
        return Err(Error::InvalidArgument("Stein loss needs square matrices".into()));
    }
    for (name, m) in [("U", u), ("V", v)] {
        if !linalg::is_symmetric(m, 1e-9) {
            return Err(Error::Domain(format!("{name} is not symmetric")));
        }
    }
    let p = u.nrows() as f64;
    let chol_v = nalgebra::Cholesky::new(v.clone())
        .ok_or_else(|| Error::Domain("V is not positive definite".into()))?;
    let log_det_u =
        linalg::spd_log_det(u).map_err(|_| Error::Domain("U is not positive definite".into()))?;
    let log_det_v = 2.0 * chol_v.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let trace = chol_v.solve(u).trace();
    Ok(trace - (log_det_u - log_det_v) - p)
}
