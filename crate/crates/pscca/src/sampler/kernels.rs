//! Full-conditional update kernels for the Metropolis-within-Gibbs sweep.
//!
//! Each kernel consumes a state and returns the updated state; all other
//! fields are left untouched. Conjugate blocks (z, w, mu, sigma2, shrinkage
//! scales) are sampled in closed form; the non-conjugate theta entries use
//! univariate slice sampling.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::data::CountDatasetPair;
use crate::error::{Error, Result};
use crate::model::{n_free_cols, Hyperparams, ModelState};
use crate::slice::slice_sample;
use crate::truncnorm::sample_positive_normal;

/// Slice-sampler tuning for the theta updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceTuning {
    pub width: f64,
    pub max_doublings: u32,
}

impl Default for SliceTuning {
    fn default() -> Self {
        Self { width: 1.0, max_doublings: 10 }
    }
}

/// Draw from a scaled inverse-chi-squared distribution with `df` degrees of
/// freedom and scale `scale`.
pub fn sample_scaled_inv_chi2<R: Rng + ?Sized>(df: f64, scale: f64, rng: &mut R) -> f64 {
    let chi2 = Gamma::new(0.5 * df, 2.0).expect("positive df").sample(rng);
    (df * scale / chi2).clamp(1e-290, 1e290)
}

/// Draw from an inverse-gamma distribution with the given shape and rate.
pub fn sample_inv_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0 / rate).expect("positive shape and rate").sample(rng);
    (1.0 / g).clamp(1e-290, 1e290)
}

/// Refresh every natural parameter from its full conditional
/// `p(theta_ij | ...) ∝ exp(y_ij theta - exp(theta)) N(theta | mu_i + w_i. z_j, sigma2)`
/// by slice sampling.
pub fn update_theta<R: Rng + ?Sized>(
    mut state: ModelState,
    data: &CountDatasetPair,
    tuning: &SliceTuning,
    rng: &mut R,
) -> Result<ModelState> {
    state.validate()?;
    let dims = state.dims();
    for m in 0..2 {
        let prior_mean = {
            let mut fitted = &state.w[m] * &state.z;
            for j in 0..dims.n {
                let mut col = fitted.column_mut(j);
                col += &state.mu[m];
            }
            fitted
        };
        let inv_2var = 0.5 / state.sigma2[m];
        let y = data.y(m);
        let theta = &mut state.theta[m];
        for j in 0..dims.n {
            for i in 0..dims.n_features(m) {
                let y_ij = y[(i, j)] as f64;
                let mean = prior_mean[(i, j)];
                let log_target = |t: f64| {
                    let diff = t - mean;
                    y_ij * t - t.exp() - inv_2var * diff * diff
                };
                theta[(i, j)] = slice_sample(
                    theta[(i, j)],
                    log_target,
                    tuning.width,
                    tuning.max_doublings,
                    rng,
                )?;
            }
        }
    }
    Ok(state)
}

/// Refresh the shared latent scores column by column from their Gaussian full
/// conditional with precision `I + sum_m W_m' W_m / sigma2_m`.
pub fn update_z<R: Rng + ?Sized>(mut state: ModelState, rng: &mut R) -> Result<ModelState> {
    state.validate()?;
    let dims = state.dims();
    let mut precision = DMatrix::<f64>::identity(dims.d, dims.d);
    for m in 0..2 {
        precision += state.w[m].transpose() * &state.w[m] / state.sigma2[m];
    }
    let chol = Cholesky::new(precision)
        .ok_or_else(|| Error::Singular("latent-score precision is not positive definite".into()))?;

    let mut rhs = DMatrix::<f64>::zeros(dims.d, dims.n);
    for m in 0..2 {
        let mut resid = state.theta[m].clone();
        for j in 0..dims.n {
            let mut col = resid.column_mut(j);
            col -= &state.mu[m];
        }
        rhs += state.w[m].transpose() * resid / state.sigma2[m];
    }
    let mean = chol.solve(&rhs);
    let noise_std =
        DMatrix::from_fn(dims.d, dims.n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let noise = chol
        .l()
        .transpose()
        .solve_upper_triangular(&noise_std)
        .ok_or_else(|| Error::Singular("triangular solve failed in latent-score update".into()))?;
    state.z = mean + noise;
    Ok(state)
}

/// Refresh every free loading entry from its univariate Gaussian full
/// conditional (Bayesian regression of the theta residuals on the latent
/// scores, prior variance `lambda_i^2 tau^2`); diagonal entries are drawn
/// truncated to the positive half line.
pub fn update_w<R: Rng + ?Sized>(mut state: ModelState, rng: &mut R) -> Result<ModelState> {
    state.validate()?;
    let dims = state.dims();
    for m in 0..2 {
        let z = &state.z;
        let z_norms2: Vec<f64> = (0..dims.d).map(|k| z.row(k).norm_squared()).collect();
        let inv_sigma2 = 1.0 / state.sigma2[m];
        let tau2 = state.tau[m] * state.tau[m];
        for i in 0..dims.n_features(m) {
            let prior_var = state.lambda[m][i] * state.lambda[m][i] * tau2;
            let n_free = n_free_cols(i, dims.d);
            // residual with the current row's contribution removed per entry
            let mut resid = DVector::<f64>::zeros(dims.n);
            for j in 0..dims.n {
                let mut fitted = state.mu[m][i];
                for k in 0..n_free {
                    fitted += state.w[m][(i, k)] * z[(k, j)];
                }
                resid[j] = state.theta[m][(i, j)] - fitted;
            }
            for k in 0..n_free {
                let w_old = state.w[m][(i, k)];
                // projection of the k-partial residual on z_k
                let mut proj = 0.0;
                for j in 0..dims.n {
                    proj += z[(k, j)] * (resid[j] + w_old * z[(k, j)]);
                }
                let precision = z_norms2[k] * inv_sigma2 + 1.0 / prior_var;
                let var = 1.0 / precision;
                let mean = proj * inv_sigma2 * var;
                let w_new = if k == i {
                    sample_positive_normal(mean, var.sqrt(), rng)?
                } else {
                    mean + var.sqrt() * rng.sample::<f64, _>(StandardNormal)
                };
                state.w[m][(i, k)] = w_new;
                for j in 0..dims.n {
                    resid[j] += (w_old - w_new) * z[(k, j)];
                }
            }
        }
    }
    Ok(state)
}

/// Refresh the natural-parameter means from their conjugate normal
/// conditionals.
pub fn update_mu<R: Rng + ?Sized>(
    mut state: ModelState,
    hp: &Hyperparams,
    rng: &mut R,
) -> ModelState {
    let dims = state.dims();
    for m in 0..2 {
        let fitted = &state.w[m] * &state.z;
        let inv_sigma2 = 1.0 / state.sigma2[m];
        for i in 0..dims.n_features(m) {
            let mut resid_sum = 0.0;
            for j in 0..dims.n {
                resid_sum += state.theta[m][(i, j)] - fitted[(i, j)];
            }
            let precision = 1.0 / hp.k_mu[m] + dims.n as f64 * inv_sigma2;
            let var = 1.0 / precision;
            let mean = resid_sum * inv_sigma2 * var;
            state.mu[m][i] = mean + var.sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
    }
    state
}

/// Refresh the error variances from their scaled inverse-chi-squared
/// conditionals.
pub fn update_sigma2<R: Rng + ?Sized>(
    mut state: ModelState,
    hp: &Hyperparams,
    rng: &mut R,
) -> ModelState {
    let dims = state.dims();
    for m in 0..2 {
        let fitted = &state.w[m] * &state.z;
        let mut ssr = 0.0;
        for j in 0..dims.n {
            for i in 0..dims.n_features(m) {
                let diff = state.theta[m][(i, j)] - state.mu[m][i] - fitted[(i, j)];
                ssr += diff * diff;
            }
        }
        let df = hp.nu_theta[m] + (dims.n_features(m) * dims.n) as f64;
        let scale = (hp.nu_theta[m] * hp.s2_theta[m] + ssr) / df;
        state.sigma2[m] = sample_scaled_inv_chi2(df, scale, rng);
    }
    state
}

/// Refresh the horseshoe scales through the inverse-gamma auxiliary
/// decomposition of the half-Cauchy: `lambda^2 | a ~ IG(1/2, 1/a)`,
/// `a ~ IG(1/2, 1)` marginally gives `lambda ~ C+(0,1)`, and all full
/// conditionals are inverse gamma.
pub fn update_horseshoe<R: Rng + ?Sized>(mut state: ModelState, rng: &mut R) -> ModelState {
    let dims = state.dims();
    for m in 0..2 {
        let tau2 = state.tau[m] * state.tau[m];
        let mut n_free_total = 0usize;
        for i in 0..dims.n_features(m) {
            let n_free = n_free_cols(i, dims.d);
            n_free_total += n_free;
            let w_row_sq: f64 =
                (0..n_free).map(|k| state.w[m][(i, k)] * state.w[m][(i, k)]).sum();
            let shape = 0.5 * (n_free as f64 + 1.0);
            let rate = 1.0 / state.aux_lambda[m][i] + 0.5 * w_row_sq / tau2;
            let lambda2 = sample_inv_gamma(shape, rate, rng);
            state.lambda[m][i] = lambda2.sqrt();
            state.aux_lambda[m][i] = sample_inv_gamma(1.0, 1.0 + 1.0 / lambda2, rng);
        }

        let mut weighted_sq = 0.0;
        for i in 0..dims.n_features(m) {
            let lam2 = state.lambda[m][i] * state.lambda[m][i];
            for k in 0..n_free_cols(i, dims.d) {
                weighted_sq += state.w[m][(i, k)] * state.w[m][(i, k)] / lam2;
            }
        }
        let shape = 0.5 * (n_free_total as f64 + 1.0);
        let rate = 1.0 / state.aux_tau[m] + 0.5 * weighted_sq;
        let tau2_new = sample_inv_gamma(shape, rate, rng);
        state.tau[m] = tau2_new.sqrt();
        state.aux_tau[m] = sample_inv_gamma(1.0, 1.0 + 1.0 / tau2_new, rng);
    }
    state
}
