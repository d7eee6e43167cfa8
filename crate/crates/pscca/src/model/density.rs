//! Log-density evaluations: the Poisson likelihood and the unnormalized
//! log posterior targeted by the sampler.

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

use crate::data::CountDatasetPair;
use crate::error::{Error, Result};
use crate::model::{n_free_cols, Hyperparams, ModelState};

/// Largest natural parameter accepted by the likelihood; `exp` overflows
/// shortly above this.
pub const THETA_MAX: f64 = 700.0;

const LN_2_PI: f64 = 1.8378770664093453;

/// `ln N(x | mean, var)`.
pub fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let diff = x - mean;
    -0.5 * (LN_2_PI + var.ln() + diff * diff / var)
}

/// `ln C+(x | 0, 1)` for x > 0.
pub fn ln_half_cauchy_pdf(x: f64) -> f64 {
    (2.0 / std::f64::consts::PI).ln() - (1.0 + x * x).ln()
}

/// `ln ScaledInvChi2(x | nu, s2)` for x > 0.
pub fn ln_scaled_inv_chi2_pdf(x: f64, nu: f64, s2: f64) -> f64 {
    let half_nu = 0.5 * nu;
    half_nu * (half_nu * s2).ln() - ln_gamma(half_nu) - (1.0 + half_nu) * x.ln()
        - half_nu * s2 / x
}

/// Poisson log-likelihood `sum_ij [y_ij theta_ij - exp(theta_ij) - ln(y_ij!)]`.
///
/// Rejects natural parameters above [`THETA_MAX`] with a domain error.
pub fn poisson_loglik(y: &DMatrix<u64>, theta: &DMatrix<f64>) -> Result<f64> {
    if y.shape() != theta.shape() {
        return Err(Error::DimensionMismatch(format!(
            "count matrix is {:?} but theta is {:?}",
            y.shape(),
            theta.shape()
        )));
    }
    let mut total = 0.0;
    for (y_ij, th) in y.iter().zip(theta.iter()) {
        if *th > THETA_MAX {
            return Err(Error::Domain(format!(
                "theta entry {th} exceeds {THETA_MAX}; exp would overflow"
            )));
        }
        total += (*y_ij as f64) * th - th.exp() - ln_gamma(*y_ij as f64 + 1.0);
    }
    Ok(total)
}

/// Log of the unnormalized posterior density of `state` given `data`:
/// Poisson likelihood, Gaussian theta residuals, horseshoe Gaussian terms for
/// the free loading entries, half-Cauchy terms for the shrinkage scales,
/// standard-normal terms for the latent scores, and the conjugate prior terms
/// for mu and sigma2. Constant in everything state-independent (including the
/// positive-diagonal truncation normalizers).
pub fn log_posterior(state: &ModelState, data: &CountDatasetPair, hp: &Hyperparams) -> Result<f64> {
    state.validate()?;
    hp.validate()?;
    let dims = state.dims();
    if hp.d != dims.d {
        return Err(Error::DimensionMismatch(format!(
            "hyperparameters fit d = {} but the state has d = {}",
            hp.d, dims.d
        )));
    }
    if data.n_samples() != dims.n
        || data.n_features(0) != dims.d1
        || data.n_features(1) != dims.d2
    {
        return Err(Error::DimensionMismatch(
            "data dimensions do not match the state".into(),
        ));
    }

    let mut total = 0.0;
    for m in 0..2 {
        total += poisson_loglik(data.y(m), &state.theta[m])?;

        // theta | mu, W, z, sigma2
        let fitted = &state.w[m] * &state.z;
        let sigma2 = state.sigma2[m];
        for j in 0..dims.n {
            for i in 0..dims.n_features(m) {
                total += ln_normal_pdf(
                    state.theta[m][(i, j)],
                    state.mu[m][i] + fitted[(i, j)],
                    sigma2,
                );
            }
        }

        // free loading entries, local and global scales
        let tau2 = state.tau[m] * state.tau[m];
        for i in 0..dims.n_features(m) {
            let lam = state.lambda[m][i];
            let var = lam * lam * tau2;
            for k in 0..n_free_cols(i, dims.d) {
                total += ln_normal_pdf(state.w[m][(i, k)], 0.0, var);
            }
            total += ln_half_cauchy_pdf(lam);
        }
        total += ln_half_cauchy_pdf(state.tau[m]);

        // mu and sigma2 priors
        for i in 0..dims.n_features(m) {
            total += ln_normal_pdf(state.mu[m][i], 0.0, hp.k_mu[m]);
        }
        total += ln_scaled_inv_chi2_pdf(state.sigma2[m], hp.nu_theta[m], hp.s2_theta[m]);
    }

    // latent scores
    for z in state.z.iter() {
        total += ln_normal_pdf(*z, 0.0, 1.0);
    }
    Ok(total)
}
