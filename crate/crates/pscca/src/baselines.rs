//! Classical raw-count estimators used as comparison baselines: elementwise
//! Pearson and Spearman correlation, and ridge-regularized sample CCA.

use nalgebra::DMatrix;

use crate::data::CountDatasetPair;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Pearson,
    Spearman,
    SampleCca,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineEstimate {
    /// `D1 x D2` cross-view correlation matrix.
    Correlation(DMatrix<f64>),
    /// Descending canonical correlations.
    CanonicalCorrelations(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub method: BaselineMethod,
    pub estimate: BaselineEstimate,
    /// Ridge parameter, for the sample-CCA method.
    pub ridge: Option<f64>,
    /// Per-view indices of constant features whose correlations were set to
    /// zero by convention.
    pub constant_features: [Vec<usize>; 2],
}

impl BaselineResult {
    pub fn correlation(&self) -> Option<&DMatrix<f64>> {
        match &self.estimate {
            BaselineEstimate::Correlation(m) => Some(m),
            _ => None,
        }
    }

    pub fn canonical_correlations(&self) -> Option<&[f64]> {
        match &self.estimate {
            BaselineEstimate::CanonicalCorrelations(v) => Some(v),
            _ => None,
        }
    }
}

fn center_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols() as f64;
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        let mean = row.iter().sum::<f64>() / n;
        row.iter_mut().for_each(|v| *v -= mean);
    }
    out
}

/// Elementwise correlation of two row-major data matrices through the
/// sufficient statistics `n sum(xy) - sum(x) sum(y)`; for count (and rank)
/// data all statistics are exact in f64, so constant rows are detected
/// exactly and affine maps with power-of-two slopes leave the result
/// bit-identical. Constant rows yield 0 and are reported back through the
/// flag vectors.
fn cross_corr_of(x: &DMatrix<f64>, y: &DMatrix<f64>) -> (DMatrix<f64>, [Vec<usize>; 2]) {
    let n = x.ncols() as f64;
    let moments = |m: &DMatrix<f64>| -> (Vec<f64>, Vec<f64>, Vec<usize>) {
        let mut flagged = Vec::new();
        let sums: Vec<f64> = (0..m.nrows()).map(|i| m.row(i).iter().sum()).collect();
        let scatter: Vec<f64> = (0..m.nrows())
            .map(|i| {
                let s = n * m.row(i).iter().map(|v| v * v).sum::<f64>() - sums[i] * sums[i];
                if s == 0.0 {
                    flagged.push(i);
                }
                s
            })
            .collect();
        (sums, scatter, flagged)
    };
    let (sx, dx, fx) = moments(x);
    let (sy, dy, fy) = moments(y);
    let prod = x * y.transpose();
    let corr = DMatrix::from_fn(x.nrows(), y.nrows(), |i, k| {
        if dx[i] == 0.0 || dy[k] == 0.0 {
            0.0
        } else {
            let num = n * prod[(i, k)] - sx[i] * sy[k];
            (num / (dx[i].sqrt() * dy[k].sqrt())).clamp(-1.0, 1.0)
        }
    });
    (corr, [fx, fy])
}

fn require_samples(data: &CountDatasetPair) -> Result<()> {
    if data.n_samples() < 3 {
        return Err(Error::InvalidArgument(format!(
            "correlation baselines need at least 3 samples, got {}",
            data.n_samples()
        )));
    }
    Ok(())
}

/// Elementwise sample Pearson correlation between every cross-view feature
/// pair of the raw counts.
pub fn pearson(data: &CountDatasetPair) -> Result<BaselineResult> {
    require_samples(data)?;
    let (corr, constant_features) = cross_corr_of(&data.y_f64(0), &data.y_f64(1));
    Ok(BaselineResult {
        method: BaselineMethod::Pearson,
        estimate: BaselineEstimate::Correlation(corr),
        ridge: None,
        constant_features,
    })
}

/// Mid-ranks of one feature row, with tied values receiving their average
/// rank.
pub(crate) fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            ranks[idx] = avg;
        }
        start = end + 1;
    }
    ranks
}

fn rank_transform(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        let row: Vec<f64> = m.row(i).iter().copied().collect();
        let ranks = mid_ranks(&row);
        for (j, r) in ranks.into_iter().enumerate() {
            out[(i, j)] = r;
        }
    }
    out
}

/// Elementwise Spearman correlation (Pearson on mid-ranks) between every
/// cross-view feature pair of the raw counts.
pub fn spearman(data: &CountDatasetPair) -> Result<BaselineResult> {
    require_samples(data)?;
    let x = rank_transform(&data.y_f64(0));
    let y = rank_transform(&data.y_f64(1));
    let (corr, constant_features) = cross_corr_of(&x, &y);
    Ok(BaselineResult {
        method: BaselineMethod::Spearman,
        estimate: BaselineEstimate::Correlation(corr),
        ridge: None,
        constant_features,
    })
}

/// Sample canonical correlations of two real-valued data matrices
/// (`features x samples`) via the whitened cross-covariance SVD, with the
/// diagonal blocks inflated by `ridge`.
pub fn sample_cca_matrices(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    ridge: f64,
    k: usize,
) -> Result<Vec<f64>> {
    if x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch("views have different sample counts".into()));
    }
    let (d1, d2, n) = (x.nrows(), y.nrows(), x.ncols());
    if k == 0 || k > d1.min(d2) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must satisfy 1 <= k <= min(D1, D2) = {}",
            d1.min(d2)
        )));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge must be non-negative, got {ridge}")));
    }
    if ridge == 0.0 && n < d1 + d2 {
        return Err(Error::Singular(format!(
            "sample covariance blocks are rank deficient with N = {n} < D1 + D2 = {}; \
             pass a positive ridge",
            d1 + d2
        )));
    }
    let xc = center_rows(x);
    let yc = center_rows(y);
    let denom = (n - 1) as f64;
    let mut s11 = &xc * xc.transpose() / denom;
    let mut s22 = &yc * yc.transpose() / denom;
    let s12 = &xc * yc.transpose() / denom;
    for i in 0..d1 {
        s11[(i, i)] += ridge;
    }
    for i in 0..d2 {
        s22[(i, i)] += ridge;
    }
    let whiten = |s: &DMatrix<f64>| {
        linalg::sym_inverse_sqrt(s).map_err(|_| {
            Error::Singular(
                "sample covariance block is singular; pass a positive ridge".into(),
            )
        })
    };
    let kmat = whiten(&s11)? * s12 * whiten(&s22)?;
    let svd = kmat.svd(false, false);
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(k);
    values.resize(k, 0.0);
    Ok(values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Sample canonical correlations of the centered raw counts.
pub fn sample_cca(data: &CountDatasetPair, ridge: f64, k: usize) -> Result<BaselineResult> {
    let values = sample_cca_matrices(&data.y_f64(0), &data.y_f64(1), ridge, k)?;
    Ok(BaselineResult {
        method: BaselineMethod::SampleCca,
        estimate: BaselineEstimate::CanonicalCorrelations(values),
        ridge: Some(ridge),
        constant_features: [Vec::new(), Vec::new()],
    })
}

/// Full joint correlation matrix (both views stacked) of the raw counts,
/// optionally on mid-ranks. Constant features get unit diagonal and zero
/// off-diagonal entries.
pub fn joint_raw_correlation(data: &CountDatasetPair, on_ranks: bool) -> Result<DMatrix<f64>> {
    require_samples(data)?;
    let (mut x, mut y) = (data.y_f64(0), data.y_f64(1));
    if on_ranks {
        x = rank_transform(&x);
        y = rank_transform(&y);
    }
    let p = x.nrows() + y.nrows();
    let n = data.n_samples();
    let mut stacked = DMatrix::zeros(p, n);
    stacked.view_mut((0, 0), (x.nrows(), n)).copy_from(&x);
    stacked.view_mut((x.nrows(), 0), (y.nrows(), n)).copy_from(&y);
    let centered = center_rows(&stacked);
    let norms: Vec<f64> = (0..p).map(|i| centered.row(i).norm()).collect();
    let prod = &centered * centered.transpose();
    Ok(DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else if norms[i] == 0.0 || norms[j] == 0.0 {
            0.0
        } else {
            (prod[(i, j)] / (norms[i] * norms[j])).clamp(-1.0, 1.0)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Poisson};

    fn pair(y1: DMatrix<u64>, y2: DMatrix<u64>) -> CountDatasetPair {
        CountDatasetPair::new(y1, y2).unwrap()
    }

    #[test]
    fn pearson_identical_rows_give_one() {
        let y = DMatrix::from_row_slice(1, 4, &[1u64, 5, 2, 9]);
        let data = pair(y.clone(), y);
        let r = pearson(&data).unwrap();
        assert!((r.correlation().unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_hand_linear_dataset() {
        let y1 = DMatrix::from_row_slice(1, 3, &[1u64, 2, 3]);
        let y2 = DMatrix::from_row_slice(1, 3, &[2u64, 4, 6]);
        let r = pearson(&pair(y1, y2)).unwrap();
        assert!((r.correlation().unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_independent_rows_near_zero() {
        let mut rng = crate::rng::stream_rng(41, 0);
        let pois = Poisson::new(4.0).unwrap();
        let n = 10_000;
        let y1 = DMatrix::from_fn(1, n, |_, _| pois.sample(&mut rng) as u64);
        let y2 = DMatrix::from_fn(1, n, |_, _| pois.sample(&mut rng) as u64);
        let r = pearson(&pair(y1, y2)).unwrap();
        assert!(r.correlation().unwrap()[(0, 0)].abs() < 0.05);
    }

    #[test]
    fn pearson_flags_constant_features() {
        let y1 = DMatrix::from_row_slice(2, 3, &[0u64, 0, 0, 1, 2, 3]);
        let y2 = DMatrix::from_row_slice(1, 3, &[4u64, 5, 6]);
        let r = pearson(&pair(y1, y2)).unwrap();
        assert_eq!(r.constant_features[0], vec![0]);
        assert_eq!(r.correlation().unwrap()[(0, 0)], 0.0);
    }

    #[test]
    fn pearson_invariant_to_increasing_affine_maps() {
        let mut rng = crate::rng::stream_rng(42, 0);
        let y1 = DMatrix::from_fn(2, 12, |_, _| rng.random_range(0u64..9));
        let y2 = DMatrix::from_fn(3, 12, |_, _| rng.random_range(0u64..9));
        let r = pearson(&pair(y1.clone(), y2.clone())).unwrap();
        let y1t = y1.map(|v| 4 * v + 7);
        let y2t = y2.map(|v| 2 * v + 19);
        let rt = pearson(&pair(y1t, y2t)).unwrap();
        assert_eq!(r.correlation().unwrap(), rt.correlation().unwrap());
    }

    #[test]
    fn spearman_monotone_nonlinear_pair() {
        let y1 = DMatrix::from_row_slice(1, 4, &[1u64, 2, 3, 4]);
        let y2 = DMatrix::from_row_slice(1, 4, &[1u64, 8, 27, 64]);
        let r = spearman(&pair(y1, y2)).unwrap();
        assert!((r.correlation().unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_reversed_pair() {
        let y1 = DMatrix::from_row_slice(1, 4, &[1u64, 2, 3, 4]);
        let y2 = DMatrix::from_row_slice(1, 4, &[9u64, 7, 4, 2]);
        let r = spearman(&pair(y1, y2)).unwrap();
        assert!((r.correlation().unwrap()[(0, 0)] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_invariant_to_monotone_transform() {
        let mut rng = crate::rng::stream_rng(43, 0);
        let y1 = DMatrix::from_fn(2, 15, |_, _| rng.random_range(0u64..5));
        let y2 = DMatrix::from_fn(2, 15, |_, _| rng.random_range(0u64..5));
        let r = spearman(&pair(y1.clone(), y2.clone())).unwrap();
        let rt = spearman(&pair(y1.map(|v| v * v * v), y2.map(|v| 5 * v + 2))).unwrap();
        assert_eq!(r.correlation().unwrap(), rt.correlation().unwrap());
    }

    #[test]
    fn spearman_tie_heavy_rows_match_naive_ranking_oracle() {
        let y1 = DMatrix::from_row_slice(1, 8, &[0u64, 0, 1, 0, 2, 1, 0, 2]);
        let y2 = DMatrix::from_row_slice(1, 8, &[1u64, 0, 3, 0, 3, 1, 0, 5]);
        let r = spearman(&pair(y1.clone(), y2.clone())).unwrap();
        // naive oracle: average-rank by scanning equal values
        let naive_ranks = |vals: &[f64]| -> Vec<f64> {
            vals.iter()
                .map(|v| {
                    let below = vals.iter().filter(|u| *u < v).count() as f64;
                    let equal = vals.iter().filter(|u| *u == v).count() as f64;
                    below + (equal + 1.0) / 2.0
                })
                .collect()
        };
        let a: Vec<f64> = y1.iter().map(|v| *v as f64).collect();
        let b: Vec<f64> = y2.iter().map(|v| *v as f64).collect();
        let (ra, rb) = (naive_ranks(&a), naive_ranks(&b));
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&ra), mean(&rb));
        let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
        let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
        let expect = cov / (va * vb).sqrt();
        assert!((r.correlation().unwrap()[(0, 0)] - expect).abs() < 1e-12);
    }

    #[test]
    fn sample_cca_duplicated_feature_is_perfect() {
        let y = DMatrix::from_row_slice(1, 6, &[1u64, 4, 2, 8, 3, 5]);
        let r = sample_cca(&pair(y.clone(), y), 0.0, 1).unwrap();
        assert!((r.canonical_correlations().unwrap()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sample_cca_null_data_small_values() {
        let mut rng = crate::rng::stream_rng(44, 0);
        let pois = Poisson::new(6.0).unwrap();
        let n = 10_000;
        let y1 = DMatrix::from_fn(5, n, |_, _| pois.sample(&mut rng) as u64);
        let y2 = DMatrix::from_fn(5, n, |_, _| pois.sample(&mut rng) as u64);
        let r = sample_cca(&pair(y1, y2), 0.0, 5).unwrap();
        for v in r.canonical_correlations().unwrap() {
            assert!(*v < 0.15, "null canonical correlation {v}");
        }
    }

    #[test]
    fn sample_cca_matches_direction_search_on_tiny_system() {
        // 2 x 2 system checked against maximizing corr(a'x, b'y) over angles
        let x = DMatrix::from_row_slice(2, 6, &[1.0, 2.0, 0.0, 3.0, 1.5, 0.5, 2.0, 1.0, 1.0, 0.0, 2.5, 1.0]);
        let y = DMatrix::from_row_slice(2, 6, &[0.5, 2.5, 0.5, 2.0, 1.0, 1.0, 3.0, 0.0, 2.0, 1.0, 0.5, 2.0]);
        let got = sample_cca_matrices(&x, &y, 0.0, 1).unwrap()[0];
        let xc = center_rows(&x);
        let yc = center_rows(&y);
        let steps = 2000;
        let project = |m: &DMatrix<f64>| -> Vec<(Vec<f64>, f64)> {
            (0..steps)
                .map(|i| {
                    let t = std::f64::consts::PI * i as f64 / steps as f64;
                    let dir = [t.cos(), t.sin()];
                    let proj: Vec<f64> =
                        (0..6).map(|j| dir[0] * m[(0, j)] + dir[1] * m[(1, j)]).collect();
                    let norm = proj.iter().map(|v| v * v).sum::<f64>().sqrt();
                    (proj, norm)
                })
                .collect()
        };
        let xs = project(&xc);
        let ys = project(&yc);
        let mut best: f64 = 0.0;
        for (ax, na) in &xs {
            for (by, nb) in &ys {
                let dot: f64 = ax.iter().zip(by).map(|(u, v)| u * v).sum();
                best = best.max((dot / (na * nb)).abs());
            }
        }
        assert!((got - best).abs() < 1e-4, "svd {got}, search {best}");
    }

    #[test]
    fn sample_cca_requires_ridge_when_underdetermined() {
        let mut rng = crate::rng::stream_rng(45, 0);
        let y1 = DMatrix::from_fn(4, 5, |_, _| rng.random_range(0u64..9));
        let y2 = DMatrix::from_fn(4, 5, |_, _| rng.random_range(0u64..9));
        let data = pair(y1, y2);
        let err = sample_cca(&data, 0.0, 2).unwrap_err();
        assert!(err.to_string().contains("ridge"));
        assert!(sample_cca(&data, 0.5, 2).is_ok());
    }

    #[test]
    fn sample_cca_invariant_to_invertible_linear_maps() {
        let mut rng = crate::rng::stream_rng(46, 0);
        let x = DMatrix::from_fn(3, 40, |_, _| rng.random_range(-4.0..4.0));
        let y = DMatrix::from_fn(4, 40, |_, _| rng.random_range(-4.0..4.0));
        let base = sample_cca_matrices(&x, &y, 0.0, 3).unwrap();
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 1.0, -1.0, 1.0, 0.0, 3.0]);
        let b = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.5, 0.0, 0.0, 0.0, 2.0, 0.0, 1.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 4.0],
        );
        let mapped = sample_cca_matrices(&(&a * &x), &(&b * &y), 0.0, 3).unwrap();
        for (u, v) in base.iter().zip(&mapped) {
            assert!((u - v).abs() < 1e-8, "{u} vs {v}");
        }
    }
}
