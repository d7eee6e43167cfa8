//! Metropolis-within-Gibbs sampler: chain configuration, initialization,
//! the per-iteration sweep, and retained-draw storage.

pub mod diagnostics;
pub mod kernels;

pub use diagnostics::{split_psrf, ScalarParam};
pub use kernels::SliceTuning;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::CountDatasetPair;
use crate::error::{Error, Result};
use crate::model::{
    canonical_correlations, cross_correlation, log_posterior, Hyperparams, ModelDims, ModelState,
};
use crate::rng::stream_rng;

/// Above this total feature count, retained draws store derived summaries
/// instead of full states.
pub const DERIVED_STORAGE_THRESHOLD: usize = 500;

/// MCMC protocol configuration. Defaults: two chains of 10,000 iterations
/// with the first 5,000 discarded, no thinning.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub n_chains: usize,
    pub thin: usize,
    pub seed: u64,
    pub slice_width: f64,
    pub slice_max_doublings: u32,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_iter: 10_000,
            burn_in: 5_000,
            n_chains: 2,
            thin: 1,
            seed: 0,
            slice_width: 1.0,
            slice_max_doublings: 10,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_iter {
            return Err(Error::InvalidArgument(format!(
                "burn_in ({}) must be smaller than n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thin must be >= 1".into()));
        }
        if self.n_chains == 0 {
            return Err(Error::InvalidArgument("n_chains must be >= 1".into()));
        }
        if !(self.slice_width > 0.0 && self.slice_width.is_finite()) {
            return Err(Error::InvalidArgument("slice_width must be positive".into()));
        }
        Ok(())
    }

    /// Retained draws per chain.
    pub fn draws_per_chain(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    fn tuning(&self) -> SliceTuning {
        SliceTuning { width: self.slice_width, max_doublings: self.slice_max_doublings }
    }
}

/// How retained draws are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageMode {
    /// Keep every retained `ModelState`.
    FullStates,
    /// Keep per-draw cross-correlation and canonical-correlation summaries
    /// plus scalar traces; used when `D1 + D2` is large.
    DerivedSummaries,
}

#[derive(Debug, Clone)]
pub(crate) enum DrawStorage {
    States(Vec<ModelState>),
    Derived { cross_corr: Vec<DMatrix<f64>>, cca: Vec<Vec<f64>> },
}

/// Retained post-burn-in draws from all chains, in chain order.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub(crate) storage: DrawStorage,
    chain_ids: Vec<usize>,
    sigma2: [Vec<f64>; 2],
    tau: [Vec<f64>; 2],
    log_posteriors: Vec<f64>,
    config: ChainConfig,
    dims: ModelDims,
    divergent_chains: Vec<usize>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.chain_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain_ids.is_empty()
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn chain_ids(&self) -> &[usize] {
        &self.chain_ids
    }

    pub fn storage_mode(&self) -> StorageMode {
        match self.storage {
            DrawStorage::States(_) => StorageMode::FullStates,
            DrawStorage::Derived { .. } => StorageMode::DerivedSummaries,
        }
    }

    /// Retained states, when stored in full.
    pub fn states(&self) -> Option<&[ModelState]> {
        match &self.storage {
            DrawStorage::States(states) => Some(states),
            DrawStorage::Derived { .. } => None,
        }
    }

    /// Chains whose log posterior went non-finite at some retained draw.
    pub fn divergent_chains(&self) -> &[usize] {
        &self.divergent_chains
    }

    /// One always-stored scalar trace across all retained draws.
    pub fn scalar_trace(&self, which: ScalarParam) -> &[f64] {
        match which {
            ScalarParam::Sigma2(view) => &self.sigma2[view],
            ScalarParam::Tau(view) => &self.tau[view],
            ScalarParam::LogPosterior => &self.log_posteriors,
        }
    }

    /// The cross-correlation matrix of retained draw `idx`.
    pub fn cross_correlation_draw(&self, idx: usize) -> Result<DMatrix<f64>> {
        match &self.storage {
            DrawStorage::States(states) => cross_correlation(&states[idx]),
            DrawStorage::Derived { cross_corr, .. } => Ok(cross_corr[idx].clone()),
        }
    }

    /// The `k` leading canonical correlations of retained draw `idx`.
    pub fn canonical_correlations_draw(&self, idx: usize, k: usize) -> Result<Vec<f64>> {
        if k > self.dims.d1.min(self.dims.d2) {
            return Err(Error::InvalidArgument(format!(
                "k = {k} exceeds min(D1, D2) = {}",
                self.dims.d1.min(self.dims.d2)
            )));
        }
        match &self.storage {
            DrawStorage::States(states) => canonical_correlations(&states[idx], k),
            DrawStorage::Derived { cca, .. } => {
                // values beyond the fitted dimension are exactly zero
                let mut values = cca[idx].clone();
                values.resize(k.max(values.len()), 0.0);
                values.truncate(k);
                Ok(values)
            }
        }
    }

    /// Potential scale reduction factor of a scalar extracted from each
    /// retained state. Requires full-state storage and at least two chains.
    pub fn psrf<F: Fn(&ModelState) -> f64>(&self, extract: F) -> Result<f64> {
        let states = self.states().ok_or_else(|| {
            Error::InvalidArgument(
                "psrf over a state extractor needs full-state storage; use psrf_scalar".into(),
            )
        })?;
        let traces = self.group_by_chain(states.iter().map(&extract).collect())?;
        split_psrf(&traces)
    }

    /// Potential scale reduction factor of an always-stored scalar trace.
    pub fn psrf_scalar(&self, which: ScalarParam) -> Result<f64> {
        let traces = self.group_by_chain(self.scalar_trace(which).to_vec())?;
        split_psrf(&traces)
    }

    fn group_by_chain(&self, values: Vec<f64>) -> Result<Vec<Vec<f64>>> {
        if self.config.n_chains < 2 {
            return Err(Error::InvalidArgument(
                "convergence diagnostics need at least 2 chains".into(),
            ));
        }
        let mut traces = vec![Vec::new(); self.config.n_chains];
        for (value, chain) in values.into_iter().zip(&self.chain_ids) {
            traces[*chain].push(value);
        }
        Ok(traces)
    }
}

/// Moment-matched warm start: theta at the count scale, means at row means,
/// small triangular loadings, unit scales. Chains disperse through the
/// seed-dependent jitter on theta.
fn initial_state<R: Rng + ?Sized>(
    data: &CountDatasetPair,
    hp: &Hyperparams,
    rng: &mut R,
) -> ModelState {
    let n = data.n_samples();
    let d = hp.d;
    let mut theta = Vec::with_capacity(2);
    let mut w = Vec::with_capacity(2);
    let mut mu = Vec::with_capacity(2);
    for m in 0..2 {
        let dm = data.n_features(m);
        let y = data.y(m);
        theta.push(DMatrix::from_fn(dm, n, |i, j| {
            ((y[(i, j)] as f64) + 0.5).ln() + 0.5 * rng.sample::<f64, _>(StandardNormal)
        }));
        mu.push(DVector::from_fn(dm, |i, _| {
            let row_mean = (0..n).map(|j| y[(i, j)] as f64).sum::<f64>() / n as f64;
            (row_mean + 0.5).ln()
        }));
        w.push(DMatrix::from_fn(dm, d, |i, k| {
            if k > i {
                0.0
            } else {
                let v = 0.1 * rng.sample::<f64, _>(StandardNormal);
                if k == i { v.abs().max(1e-12) } else { v }
            }
        }));
    }
    let [theta1, theta2] = <[DMatrix<f64>; 2]>::try_from(theta).unwrap();
    let [w1, w2] = <[DMatrix<f64>; 2]>::try_from(w).unwrap();
    let [mu1, mu2] = <[DVector<f64>; 2]>::try_from(mu).unwrap();
    let d1 = data.n_features(0);
    let d2 = data.n_features(1);
    ModelState {
        theta: [theta1, theta2],
        w: [w1, w2],
        z: DMatrix::zeros(d, n),
        mu: [mu1, mu2],
        sigma2: [1.0, 1.0],
        lambda: [DVector::from_element(d1, 1.0), DVector::from_element(d2, 1.0)],
        tau: [1.0, 1.0],
        aux_lambda: [DVector::from_element(d1, 1.0), DVector::from_element(d2, 1.0)],
        aux_tau: [1.0, 1.0],
    }
}

/// One full sweep over all blocks, in the fixed order theta, z, w, mu,
/// sigma2, horseshoe scales.
pub fn sweep<R: Rng + ?Sized>(
    state: ModelState,
    data: &CountDatasetPair,
    hp: &Hyperparams,
    tuning: &SliceTuning,
    rng: &mut R,
) -> Result<ModelState> {
    let state = kernels::update_theta(state, data, tuning, rng)?;
    let state = kernels::update_z(state, rng)?;
    let state = kernels::update_w(state, rng)?;
    let state = kernels::update_mu(state, hp, rng);
    let state = kernels::update_sigma2(state, hp, rng);
    Ok(kernels::update_horseshoe(state, rng))
}

struct ChainOutput {
    storage: DrawStorage,
    sigma2: [Vec<f64>; 2],
    tau: [Vec<f64>; 2],
    log_posteriors: Vec<f64>,
    divergent: bool,
}

fn run_single_chain(
    data: &CountDatasetPair,
    hp: &Hyperparams,
    cfg: &ChainConfig,
    chain: usize,
    mode: StorageMode,
) -> Result<ChainOutput> {
    let mut rng = stream_rng(cfg.seed, chain as u64);
    let mut state = initial_state(data, hp, &mut rng);
    let tuning = cfg.tuning();
    let keep = cfg.draws_per_chain();

    let mut storage = match mode {
        StorageMode::FullStates => DrawStorage::States(Vec::with_capacity(keep)),
        StorageMode::DerivedSummaries => DrawStorage::Derived {
            cross_corr: Vec::with_capacity(keep),
            cca: Vec::with_capacity(keep),
        },
    };
    let mut sigma2 = [Vec::with_capacity(keep), Vec::with_capacity(keep)];
    let mut tau = [Vec::with_capacity(keep), Vec::with_capacity(keep)];
    let mut log_posteriors = Vec::with_capacity(keep);
    let mut divergent = false;

    let d_cca = hp.d.min(data.n_features(0)).min(data.n_features(1));
    for iter in 1..=cfg.n_iter {
        state = sweep(state, data, hp, &tuning, &mut rng)?;
        if iter <= cfg.burn_in || (iter - cfg.burn_in) % cfg.thin != 0 {
            continue;
        }
        let lp = log_posterior(&state, data, hp)?;
        if !lp.is_finite() {
            divergent = true;
        }
        for m in 0..2 {
            sigma2[m].push(state.sigma2[m]);
            tau[m].push(state.tau[m]);
        }
        log_posteriors.push(lp);
        match &mut storage {
            DrawStorage::States(states) => states.push(state.clone()),
            DrawStorage::Derived { cross_corr, cca } => {
                cross_corr.push(cross_correlation(&state)?);
                cca.push(canonical_correlations(&state, d_cca)?);
            }
        }
    }
    Ok(ChainOutput { storage, sigma2, tau, log_posteriors, divergent })
}

/// Run `cfg.n_chains` independent chains and merge the retained draws.
/// Deterministic for a fixed seed and configuration; chains run in parallel.
///
/// Storage switches to derived summaries when `D1 + D2` exceeds
/// [`DERIVED_STORAGE_THRESHOLD`].
pub fn run_chain(
    data: &CountDatasetPair,
    hp: &Hyperparams,
    cfg: &ChainConfig,
) -> Result<PosteriorDraws> {
    let mode = if data.n_features(0) + data.n_features(1) > DERIVED_STORAGE_THRESHOLD {
        StorageMode::DerivedSummaries
    } else {
        StorageMode::FullStates
    };
    run_chain_with_storage(data, hp, cfg, mode)
}

/// [`run_chain`] with an explicit storage mode.
pub fn run_chain_with_storage(
    data: &CountDatasetPair,
    hp: &Hyperparams,
    cfg: &ChainConfig,
    mode: StorageMode,
) -> Result<PosteriorDraws> {
    hp.validate()?;
    cfg.validate()?;
    let min_features = data.n_features(0).min(data.n_features(1));
    if hp.d > min_features {
        return Err(Error::InvalidArgument(format!(
            "latent dimension d = {} exceeds min(D1, D2) = {min_features}",
            hp.d
        )));
    }

    let outputs: Vec<Result<ChainOutput>> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|chain| run_single_chain(data, hp, cfg, chain, mode))
        .collect();

    let keep = cfg.draws_per_chain();
    let mut storage = match mode {
        StorageMode::FullStates => DrawStorage::States(Vec::with_capacity(keep * cfg.n_chains)),
        StorageMode::DerivedSummaries => DrawStorage::Derived {
            cross_corr: Vec::with_capacity(keep * cfg.n_chains),
            cca: Vec::with_capacity(keep * cfg.n_chains),
        },
    };
    let mut chain_ids = Vec::with_capacity(keep * cfg.n_chains);
    let mut sigma2 = [Vec::new(), Vec::new()];
    let mut tau = [Vec::new(), Vec::new()];
    let mut log_posteriors = Vec::new();
    let mut divergent_chains = Vec::new();

    for (chain, output) in outputs.into_iter().enumerate() {
        let output = output?;
        chain_ids.extend(std::iter::repeat_n(chain, keep));
        for m in 0..2 {
            sigma2[m].extend(output.sigma2[m].iter());
            tau[m].extend(output.tau[m].iter());
        }
        log_posteriors.extend(output.log_posteriors);
        if output.divergent {
            divergent_chains.push(chain);
        }
        match (&mut storage, output.storage) {
            (DrawStorage::States(all), DrawStorage::States(one)) => all.extend(one),
            (
                DrawStorage::Derived { cross_corr, cca },
                DrawStorage::Derived { cross_corr: cc_one, cca: cca_one },
            ) => {
                cross_corr.extend(cc_one);
                cca.extend(cca_one);
            }
            _ => unreachable!("chains share one storage mode"),
        }
    }

    Ok(PosteriorDraws {
        storage,
        chain_ids,
        sigma2,
        tau,
        log_posteriors,
        config: cfg.clone(),
        dims: ModelDims {
            d1: data.n_features(0),
            d2: data.n_features(1),
            n: data.n_samples(),
            d: hp.d,
        },
        divergent_chains,
    })
}
