//! Model types and the covariance / correlation / canonical-correlation
//! operations implied by the latent-factor representation of the natural
//! parameters.
//!
//! The generative model couples two views through shared latent scores:
//!
//! ```text
//! theta_.j = mu + W z_j + eps_.j,   eps ~ N(0, sigma2 I)
//! y_ij | theta_ij ~ Poisson(exp(theta_ij))
//! z_j ~ N(0, I_d)
//! w_i. | lambda_i, tau ~ N(0, lambda_i^2 tau^2 I)   (lower-triangular, positive diagonal)
//! lambda_i ~ C+(0,1), tau ~ C+(0,1)
//! mu_i ~ N(0, k), sigma2 ~ scaled-inv-chi2(nu, s2)
//! ```

mod density;

pub use density::{
    ln_half_cauchy_pdf, ln_normal_pdf, ln_scaled_inv_chi2_pdf, log_posterior, poisson_loglik,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Dimensions of one fitted/generated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub d1: usize,
    pub d2: usize,
    pub n: usize,
    pub d: usize,
}

impl ModelDims {
    pub fn n_features(&self, view: usize) -> usize {
        if view == 0 { self.d1 } else { self.d2 }
    }
}

/// Number of free (possibly nonzero) leading columns in row `row` of a
/// loading matrix with `d` columns under the lower-triangular constraint.
pub fn n_free_cols(row: usize, d: usize) -> usize {
    (row + 1).min(d)
}

/// Fixed hyperparameters of the conjugate priors, per view.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Latent dimension fitted.
    pub d: usize,
    /// Prior variance of each mu entry, per view.
    pub k_mu: [f64; 2],
    /// Degrees of freedom of the scaled inverse-chi-squared prior on sigma2.
    pub nu_theta: [f64; 2],
    /// Scale of the scaled inverse-chi-squared prior on sigma2.
    pub s2_theta: [f64; 2],
}

impl Hyperparams {
    /// Weakly informative defaults: k = 100, nu = 2, s2 = 1.
    pub fn new(d: usize) -> Self {
        Self { d, k_mu: [100.0; 2], nu_theta: [2.0; 2], s2_theta: [1.0; 2] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("latent dimension d must be >= 1".into()));
        }
        for v in self.k_mu.iter().chain(&self.nu_theta).chain(&self.s2_theta) {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "hyperparameters must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One full set of latent quantities at one MCMC iteration.
///
/// Loading matrices obey the identifiability constraint: entries above the
/// diagonal are exactly zero and diagonal entries are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    /// Natural parameters, one `D_m x N` matrix per view.
    pub theta: [DMatrix<f64>; 2],
    /// Loading matrices, `D_m x d`.
    pub w: [DMatrix<f64>; 2],
    /// Shared latent scores, `d x N`.
    pub z: DMatrix<f64>,
    /// Natural-parameter means, length `D_m`.
    pub mu: [DVector<f64>; 2],
    /// Error variances of the theta residuals.
    pub sigma2: [f64; 2],
    /// Local shrinkage scales, one per feature row.
    pub lambda: [DVector<f64>; 2],
    /// Global shrinkage scales.
    pub tau: [f64; 2],
    /// Auxiliary inverse-gamma variables of the half-Cauchy hierarchy.
    pub aux_lambda: [DVector<f64>; 2],
    pub aux_tau: [f64; 2],
}

impl ModelState {
    /// A state with the given loadings and error variances, everything else
    /// neutral (theta = mu = 0, z = 0, lambda = tau = aux = 1). Covers every
    /// covariance-level operation; densities see a valid (if bland) state.
    pub fn from_loadings(
        w1: DMatrix<f64>,
        w2: DMatrix<f64>,
        sigma2_1: f64,
        sigma2_2: f64,
        n: usize,
    ) -> Result<Self> {
        let (d1, d2, d) = (w1.nrows(), w2.nrows(), w1.ncols());
        let state = Self {
            theta: [DMatrix::zeros(d1, n), DMatrix::zeros(d2, n)],
            w: [w1, w2],
            z: DMatrix::zeros(d, n),
            mu: [DVector::zeros(d1), DVector::zeros(d2)],
            sigma2: [sigma2_1, sigma2_2],
            lambda: [DVector::from_element(d1, 1.0), DVector::from_element(d2, 1.0)],
            tau: [1.0; 2],
            aux_lambda: [DVector::from_element(d1, 1.0), DVector::from_element(d2, 1.0)],
            aux_tau: [1.0; 2],
        };
        state.validate()?;
        Ok(state)
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            d1: self.theta[0].nrows(),
            d2: self.theta[1].nrows(),
            n: self.theta[0].ncols(),
            d: self.w[0].ncols(),
        }
    }

    /// Check all structural invariants; every operation taking a state calls
    /// this on entry.
    pub fn validate(&self) -> Result<()> {
        let dims = self.dims();
        for m in 0..2 {
            let dm = dims.n_features(m);
            if self.theta[m].nrows() != dm || self.theta[m].ncols() != dims.n {
                return Err(Error::DimensionMismatch(format!("theta{} shape", m + 1)));
            }
            if self.w[m].nrows() != dm || self.w[m].ncols() != dims.d {
                return Err(Error::DimensionMismatch(format!("w{} shape", m + 1)));
            }
            if self.mu[m].len() != dm
                || self.lambda[m].len() != dm
                || self.aux_lambda[m].len() != dm
            {
                return Err(Error::DimensionMismatch(format!("view {} vector lengths", m + 1)));
            }
            if !(self.sigma2[m] > 0.0 && self.sigma2[m].is_finite()) {
                return Err(Error::Domain(format!(
                    "sigma2 of view {} must be strictly positive, got {}",
                    m + 1,
                    self.sigma2[m]
                )));
            }
            for scale in [self.tau[m], self.aux_tau[m]] {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Domain("tau and its auxiliary must be positive".into()));
                }
            }
            for v in self.lambda[m].iter().chain(self.aux_lambda[m].iter()) {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(Error::Domain("lambda scales must be strictly positive".into()));
                }
            }
            // Identifiability: zero strict upper triangle, positive diagonal.
            for i in 0..dm {
                for k in 0..dims.d {
                    let w_ik = self.w[m][(i, k)];
                    if k > i && w_ik != 0.0 {
                        return Err(Error::Domain(format!(
                            "w{}[{i},{k}] above the diagonal must be exactly zero",
                            m + 1
                        )));
                    }
                    if k == i && !(w_ik > 0.0) {
                        return Err(Error::Domain(format!(
                            "w{}[{i},{i}] on the diagonal must be strictly positive",
                            m + 1
                        )));
                    }
                }
            }
        }
        if self.z.nrows() != dims.d || self.z.ncols() != dims.n {
            return Err(Error::DimensionMismatch("z shape".into()));
        }
        Ok(())
    }

    /// `W^(m) W^(m)T + sigma2_m I`, the within-view covariance block.
    pub fn within_view_cov(&self, m: usize) -> DMatrix<f64> {
        let mut block = &self.w[m] * self.w[m].transpose();
        for i in 0..block.nrows() {
            block[(i, i)] += self.sigma2[m];
        }
        block
    }

    /// `W^(1) W^(2)T`, the cross-view covariance block.
    pub fn cross_view_cov(&self) -> DMatrix<f64> {
        &self.w[0] * self.w[1].transpose()
    }
}

/// Joint covariance of the stacked natural parameters of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCovariance {
    /// `(D1 + D2) x (D1 + D2)` symmetric positive-definite matrix.
    pub sigma: DMatrix<f64>,
    /// Size of the leading block.
    pub d1: usize,
}

impl JointCovariance {
    pub fn block_11(&self) -> DMatrix<f64> {
        self.sigma.view((0, 0), (self.d1, self.d1)).into()
    }

    pub fn block_12(&self) -> DMatrix<f64> {
        let d2 = self.sigma.nrows() - self.d1;
        self.sigma.view((0, self.d1), (self.d1, d2)).into()
    }

    pub fn block_22(&self) -> DMatrix<f64> {
        let d2 = self.sigma.nrows() - self.d1;
        self.sigma.view((self.d1, self.d1), (d2, d2)).into()
    }

    /// The joint correlation matrix (unit diagonal).
    pub fn to_correlation(&self) -> DMatrix<f64> {
        let inv_sd: Vec<f64> =
            self.sigma.diagonal().iter().map(|v| 1.0 / v.sqrt()).collect();
        DMatrix::from_fn(self.sigma.nrows(), self.sigma.ncols(), |i, j| {
            self.sigma[(i, j)] * inv_sd[i] * inv_sd[j]
        })
    }
}

/// Marginal covariance of the stacked vector `(theta_.j^(1), theta_.j^(2))`.
pub fn joint_covariance(state: &ModelState) -> Result<JointCovariance> {
    state.validate()?;
    let dims = state.dims();
    let p = dims.d1 + dims.d2;
    let mut sigma = DMatrix::zeros(p, p);
    sigma.view_mut((0, 0), (dims.d1, dims.d1)).copy_from(&state.within_view_cov(0));
    sigma
        .view_mut((dims.d1, dims.d1), (dims.d2, dims.d2))
        .copy_from(&state.within_view_cov(1));
    let cross = state.cross_view_cov();
    sigma.view_mut((0, dims.d1), (dims.d1, dims.d2)).copy_from(&cross);
    sigma.view_mut((dims.d1, 0), (dims.d2, dims.d1)).copy_from(&cross.transpose());
    Ok(JointCovariance { sigma, d1: dims.d1 })
}

/// Correlation between each `theta_i^(1)` and `theta_k^(2)`: the cross block
/// of the joint covariance normalized by the marginal standard deviations.
/// Every entry lies in `[-1, 1]`.
pub fn cross_correlation(state: &ModelState) -> Result<DMatrix<f64>> {
    state.validate()?;
    let cross = state.cross_view_cov();
    let inv_sd = |m: usize| -> Result<Vec<f64>> {
        (0..state.w[m].nrows())
            .map(|i| {
                let var = state.w[m].row(i).norm_squared() + state.sigma2[m];
                if var > 0.0 && var.is_finite() {
                    Ok(1.0 / var.sqrt())
                } else {
                    Err(Error::Singular(format!(
                        "non-positive marginal variance {var} in view {}",
                        m + 1
                    )))
                }
            })
            .collect()
    };
    let s1 = inv_sd(0)?;
    let s2 = inv_sd(1)?;
    Ok(DMatrix::from_fn(cross.nrows(), cross.ncols(), |i, k| cross[(i, k)] * s1[i] * s2[k]))
}

/// The whitened cross-covariance `S11^(-1/2) S12 S22^(-1/2)`; its singular
/// values are the canonical correlations of the two views.
pub fn whitened_cross_covariance(state: &ModelState) -> Result<DMatrix<f64>> {
    let s11 = state.within_view_cov(0);
    let s22 = state.within_view_cov(1);
    let inv1 = linalg::sym_inverse_sqrt(&s11)?;
    let inv2 = linalg::sym_inverse_sqrt(&s22)?;
    Ok(inv1 * state.cross_view_cov() * inv2)
}

/// The `k` largest canonical correlations of the natural parameters, sorted
/// descending, each in `[0, 1]`.
///
/// These are the square roots of the `k` largest eigenvalues of
/// `S11^-1 S12 S22^-1 S21`. The nonzero spectrum of that operator equals the
/// spectrum of the `d x d` product `A B` with
/// `A_m = W_m' S_mm^-1 W_m = G_m (sigma2_m I + G_m)^-1`, `G_m = W_m' W_m`,
/// so only `d x d` symmetric eigenproblems are solved regardless of the
/// feature counts.
pub fn canonical_correlations(state: &ModelState, k: usize) -> Result<Vec<f64>> {
    state.validate()?;
    let dims = state.dims();
    if k == 0 || k > dims.d1.min(dims.d2) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must satisfy 1 <= k <= min(D1, D2) = {}",
            dims.d1.min(dims.d2)
        )));
    }
    if dims.d == 0 {
        return Ok(vec![0.0; k]);
    }

    let projected = |m: usize| -> Result<DMatrix<f64>> {
        let gram = state.w[m].transpose() * &state.w[m];
        let mut shifted = gram.clone();
        for i in 0..dims.d {
            shifted[(i, i)] += state.sigma2[m];
        }
        let chol = nalgebra::Cholesky::new(shifted).ok_or_else(|| {
            Error::Singular(format!("covariance block of view {} is singular", m + 1))
        })?;
        let a = chol.solve(&gram);
        // gram and the shifted gram commute, so a is symmetric up to rounding
        Ok(0.5 * (&a + a.transpose()))
    };
    let a = projected(0)?;
    let b = projected(1)?;
    let a_half = linalg::sym_sqrt_psd(&a)?;
    let symmetric_product = {
        let p = &a_half * b * &a_half;
        0.5 * (&p + p.transpose())
    };
    let mut values = linalg::sym_eigenvalues_desc(&symmetric_product);
    for v in &values {
        if *v > 1.0 + 1e-10 {
            return Err(Error::Domain(format!("squared canonical correlation {v} exceeds 1")));
        }
    }
    values.truncate(k);
    values.resize(k, 0.0);
    Ok(values.into_iter().map(|v| v.clamp(0.0, 1.0).sqrt()).collect())
}
