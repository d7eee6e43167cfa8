//! Convergence monitoring: the split-chain potential scale reduction factor.

use crate::error::{Error, Result};

/// Scalar traces stored for every retained draw regardless of storage mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarParam {
    /// Error variance of view 0 or 1.
    Sigma2(usize),
    /// Global shrinkage scale of view 0 or 1.
    Tau(usize),
    LogPosterior,
}

/// Split-chain potential scale reduction factor.
///
/// Each chain is split in half (dropping the middle draw of odd-length
/// chains), and the usual between/within variance ratio is computed over the
/// split halves. Chains in exact agreement with zero variance return 1.0.
pub fn split_psrf(traces: &[Vec<f64>]) -> Result<f64> {
    if traces.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "potential scale reduction needs at least 2 chains, got {}",
            traces.len()
        )));
    }
    let shortest = traces.iter().map(Vec::len).min().unwrap_or(0);
    if shortest < 4 {
        return Err(Error::InvalidArgument(format!(
            "chains of length {shortest} are too short to split"
        )));
    }
    let half = shortest / 2;
    let mut split: Vec<&[f64]> = Vec::with_capacity(2 * traces.len());
    for trace in traces {
        split.push(&trace[..half]);
        split.push(&trace[shortest - half..shortest]);
    }

    let m = split.len() as f64;
    let n = half as f64;
    let means: Vec<f64> = split.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let vars: Vec<f64> = split
        .iter()
        .zip(&means)
        .map(|(c, mean)| c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
        .collect();
    let grand = means.iter().sum::<f64>() / m;
    let between = n / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let within = vars.iter().sum::<f64>() / m;

    if within == 0.0 {
        // degenerate constant chains: exact agreement is convergence,
        // disagreement is divergence
        return Ok(if between == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let var_plus = (n - 1.0) / n * within + between / n;
    Ok((var_plus / within).sqrt())
}
