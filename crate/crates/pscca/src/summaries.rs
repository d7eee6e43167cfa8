//! Posterior summaries of retained draws: mean correlation matrices with
//! credible intervals, canonical-correlation summaries, and a long-format
//! export for heatmap rendering.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sampler::{DrawStorage, PosteriorDraws};

/// Posterior mean cross-correlation matrix with elementwise equal-tailed
/// credible bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSummary {
    pub mean: DMatrix<f64>,
    pub lower: DMatrix<f64>,
    pub upper: DMatrix<f64>,
    pub level: f64,
}

/// Rank-wise posterior summary of the canonical correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaSummary {
    pub means: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
}

impl CcaSummary {
    pub fn k(&self) -> usize {
        self.means.len()
    }
}

/// Type-7 (linear interpolation) sample quantile of sorted values.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "credible level must lie strictly inside (0, 1), got {level}"
        )));
    }
    Ok(())
}

fn apply_cross_corr_draws<F: FnMut(usize, &DMatrix<f64>)>(
    draws: &PosteriorDraws,
    mut f: F,
) -> Result<()> {
    match &draws.storage {
        DrawStorage::States(states) => {
            for (idx, state) in states.iter().enumerate() {
                let corr = crate::model::cross_correlation(state)?;
                f(idx, &corr);
            }
        }
        DrawStorage::Derived { cross_corr, .. } => {
            for (idx, corr) in cross_corr.iter().enumerate() {
                f(idx, corr);
            }
        }
    }
    Ok(())
}

/// Per-entry posterior mean and equal-tailed credible bounds of the
/// cross-correlation matrix over all retained draws.
pub fn summarize_correlations(draws: &PosteriorDraws, level: f64) -> Result<CorrelationSummary> {
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no retained draws to summarize".into()));
    }
    check_level(level)?;
    let dims = draws.dims();
    let (d1, d2) = (dims.d1, dims.d2);
    let n_draws = draws.len();
    let n_entries = d1 * d2;

    let mut mean = DMatrix::zeros(d1, d2);
    let mut lower = DMatrix::zeros(d1, d2);
    let mut upper = DMatrix::zeros(d1, d2);
    let p_lo = 0.5 * (1.0 - level);
    let p_hi = 1.0 - p_lo;

    // entries are processed in chunks so the per-entry traces stay bounded
    // in memory even for many draws
    let chunk_entries = (8_000_000 / n_draws).clamp(1, n_entries);
    let mut start = 0;
    while start < n_entries {
        let len = chunk_entries.min(n_entries - start);
        let mut traces = vec![0.0f64; len * n_draws];
        apply_cross_corr_draws(draws, |idx, corr| {
            for e in 0..len {
                let (i, kcol) = ((start + e) % d1, (start + e) / d1);
                traces[e * n_draws + idx] = corr[(i, kcol)];
            }
        })?;
        for e in 0..len {
            let (i, kcol) = ((start + e) % d1, (start + e) / d1);
            let trace = &mut traces[e * n_draws..(e + 1) * n_draws];
            let m = trace.iter().sum::<f64>() / n_draws as f64;
            trace.sort_by(f64::total_cmp);
            mean[(i, kcol)] = m;
            lower[(i, kcol)] = quantile_sorted(trace, p_lo);
            upper[(i, kcol)] = quantile_sorted(trace, p_hi);
        }
        start += len;
    }
    Ok(CorrelationSummary { mean, lower, upper, level })
}

/// Rank-wise posterior mean and equal-tailed credible bounds of the `k`
/// leading canonical correlations.
pub fn summarize_cca(draws: &PosteriorDraws, k: usize, level: f64) -> Result<CcaSummary> {
    if draws.is_empty() {
        return Err(Error::InvalidArgument("no retained draws to summarize".into()));
    }
    check_level(level)?;
    let dims = draws.dims();
    if k == 0 || k > dims.d1.min(dims.d2) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must satisfy 1 <= k <= min(D1, D2) = {}",
            dims.d1.min(dims.d2)
        )));
    }
    let n_draws = draws.len();
    let mut traces = vec![vec![0.0f64; n_draws]; k];
    for idx in 0..n_draws {
        let values = draws.canonical_correlations_draw(idx, k)?;
        for (rank, v) in values.into_iter().enumerate() {
            traces[rank][idx] = v;
        }
    }
    let p_lo = 0.5 * (1.0 - level);
    let p_hi = 1.0 - p_lo;
    let mut means = Vec::with_capacity(k);
    let mut lower = Vec::with_capacity(k);
    let mut upper = Vec::with_capacity(k);
    for trace in &mut traces {
        means.push(trace.iter().sum::<f64>() / n_draws as f64);
        trace.sort_by(f64::total_cmp);
        lower.push(quantile_sorted(trace, p_lo));
        upper.push(quantile_sorted(trace, p_hi));
    }
    Ok(CcaSummary { means, lower, upper, level })
}

/// Write a correlation summary as a long-format delimited table with columns
/// `feature_1, feature_2, mean, lower, upper`, one row per matrix entry in
/// row-major order. Feature labels default to 1-based indices.
pub fn export_heatmap_grid(summary: &CorrelationSummary, path: &Path) -> Result<()> {
    let names_1: Vec<String> = (1..=summary.mean.nrows()).map(|i| i.to_string()).collect();
    let names_2: Vec<String> = (1..=summary.mean.ncols()).map(|i| i.to_string()).collect();
    export_heatmap_grid_with_names(summary, &names_1, &names_2, path)
}

/// [`export_heatmap_grid`] with explicit feature labels.
pub fn export_heatmap_grid_with_names(
    summary: &CorrelationSummary,
    names_1: &[String],
    names_2: &[String],
    path: &Path,
) -> Result<()> {
    if names_1.len() != summary.mean.nrows() || names_2.len() != summary.mean.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} x {} labels for a {} x {} summary",
            names_1.len(),
            names_2.len(),
            summary.mean.nrows(),
            summary.mean.ncols()
        )));
    }
    let io_err = |source: std::io::Error| Error::Io { path: path.display().to_string(), source };
    let mut out = Vec::new();
    writeln!(out, "feature_1,feature_2,mean,lower,upper").map_err(io_err)?;
    for i in 0..summary.mean.nrows() {
        for j in 0..summary.mean.ncols() {
            writeln!(
                out,
                "{},{},{},{},{}",
                names_1[i],
                names_2[j],
                summary.mean[(i, j)],
                summary.lower[(i, j)],
                summary.upper[(i, j)]
            )
            .map_err(io_err)?;
        }
    }
    std::fs::write(path, out).map_err(io_err)
}
