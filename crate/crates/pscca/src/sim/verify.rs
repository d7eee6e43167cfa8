//! Empirical check that correlations measured on raw counts are attenuated
//! relative to the natural-parameter correlations that generated them.

use crate::baselines;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::sim::{generate_with_mu_shift, ScenarioSpec};
use rand::Rng;

/// Aggregate attenuation report over all replicates and all feature pairs
/// with nonzero true correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageReport {
    /// Mean absolute raw-count Pearson correlation.
    pub mean_abs_raw: f64,
    /// Mean absolute true natural-parameter correlation.
    pub mean_abs_natural: f64,
    /// Fraction of entries where the raw-count magnitude is strictly smaller.
    pub dominance_fraction: f64,
    pub n_entries: usize,
    pub n_replicates: usize,
}

pub fn verify_shrinkage(spec: &ScenarioSpec, n_rep: usize) -> Result<ShrinkageReport> {
    verify_shrinkage_with_mu_shift(spec, n_rep, 0.0)
}

/// [`verify_shrinkage`] with shifted natural-parameter means; lower shifts
/// mean smaller counts and stronger Poisson attenuation.
pub fn verify_shrinkage_with_mu_shift(
    spec: &ScenarioSpec,
    n_rep: usize,
    mu_shift: f64,
) -> Result<ShrinkageReport> {
    if spec.d_true == 0 {
        return Err(Error::InvalidArgument(
            "attenuation verification needs d_true >= 1 (nonzero true correlations)".into(),
        ));
    }
    if n_rep == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let mut sum_raw = 0.0;
    let mut sum_nat = 0.0;
    let mut dominated = 0usize;
    let mut total = 0usize;
    for rep in 0..n_rep {
        let rep_seed = stream_rng(spec.seed, rep as u64 + 1).random::<u64>();
        let ds = generate_with_mu_shift(&spec.reseeded(rep_seed), mu_shift)?;
        let raw = baselines::pearson(&ds.data)?;
        let raw = raw.correlation().expect("pearson returns a correlation matrix");
        for i in 0..spec.d1 {
            for k in 0..spec.d2 {
                let truth = ds.true_cross_corr[(i, k)].abs();
                if truth <= 1e-12 {
                    continue;
                }
                let observed = raw[(i, k)].abs();
                sum_raw += observed;
                sum_nat += truth;
                if observed < truth {
                    dominated += 1;
                }
                total += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::InvalidArgument(
            "no entries with nonzero true correlation were generated".into(),
        ));
    }
    Ok(ShrinkageReport {
        mean_abs_raw: sum_raw / total as f64,
        mean_abs_natural: sum_nat / total as f64,
        dominance_fraction: dominated as f64 / total as f64,
        n_entries: total,
        n_replicates: n_rep,
    })
}
