//! Shared helpers for the acceptance suite: KS statistics, quadrature
//! reference distributions, and an independent canonical-correlation oracle.

use nalgebra::DMatrix;
use pscca::model::ModelState;
use rand::Rng;
use rand_distr::StandardNormal;

/// Kolmogorov-Smirnov statistic of `draws` against the CDF `f`.
pub fn ks_statistic(draws: &mut [f64], f: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in draws.iter().enumerate() {
        let cdf = f(*x);
        d = d.max((cdf - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - cdf).abs());
    }
    d
}

/// CDF of an unnormalized log density, tabulated by trapezoid quadrature on
/// a uniform grid; evaluation interpolates linearly.
pub struct QuadratureCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl QuadratureCdf {
    pub fn new(lo: f64, hi: f64, points: usize, log_density: impl Fn(f64) -> f64) -> Self {
        let grid: Vec<f64> =
            (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
        let log_dens: Vec<f64> = grid.iter().map(|x| log_density(*x)).collect();
        let max = log_dens.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dens: Vec<f64> = log_dens.iter().map(|l| (l - max).exp()).collect();
        let mut cdf = vec![0.0; points];
        for i in 1..points {
            cdf[i] = cdf[i - 1] + 0.5 * (dens[i - 1] + dens[i]);
        }
        let total = cdf[points - 1];
        for v in &mut cdf {
            *v /= total;
        }
        QuadratureCdf { grid, cdf }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= *self.grid.last().unwrap() {
            return 1.0;
        }
        let step = self.grid[1] - self.grid[0];
        let idx = ((x - self.grid[0]) / step) as usize;
        let idx = idx.min(self.grid.len() - 2);
        let frac = (x - self.grid[idx]) / step;
        self.cdf[idx] + frac * (self.cdf[idx + 1] - self.cdf[idx])
    }
}

// ---------------------------------------------------------------------------
// independent direction-search oracle for the first canonical correlation
// ---------------------------------------------------------------------------

struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    fn new(a: &[Vec<f64>]) -> Lu {
        let n = a.len();
        let mut lu: Vec<Vec<f64>> = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| lu[i][col].abs().total_cmp(&lu[j][col].abs()))
                .unwrap();
            lu.swap(col, pivot);
            perm.swap(col, pivot);
            for row in (col + 1)..n {
                let factor = lu[row][col] / lu[col][col];
                lu[row][col] = factor;
                for k in (col + 1)..n {
                    let delta = factor * lu[col][k];
                    lu[row][k] -= delta;
                }
            }
        }
        Lu { lu, perm }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for row in 1..n {
            for col in 0..row {
                x[row] -= self.lu[row][col] * x[col];
            }
        }
        for row in (0..n).rev() {
            for col in (row + 1)..n {
                x[row] -= self.lu[row][col] * x[col];
            }
            x[row] /= self.lu[row][row];
        }
        x
    }
}

fn block(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect()
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// First canonical correlation by alternating exact coordinate maximization
/// of corr(a' theta1, b' theta2) with random restarts, built on hand-rolled
/// LU solves over the covariance blocks.
pub fn first_canonical_by_direction_search(state: &ModelState, seed: u64) -> f64 {
    let d1 = state.w[0].nrows();
    let d2 = state.w[1].nrows();
    let d = state.w[0].ncols();
    let w = |m: usize, i: usize, k: usize| state.w[m][(i, k)];
    let s11 = block(d1, d1, |i, j| {
        (0..d).map(|k| w(0, i, k) * w(0, j, k)).sum::<f64>()
            + if i == j { state.sigma2[0] } else { 0.0 }
    });
    let s22 = block(d2, d2, |i, j| {
        (0..d).map(|k| w(1, i, k) * w(1, j, k)).sum::<f64>()
            + if i == j { state.sigma2[1] } else { 0.0 }
    });
    let s12 = block(d1, d2, |i, j| (0..d).map(|k| w(0, i, k) * w(1, j, k)).sum::<f64>());
    let s21 = block(d2, d1, |i, j| s12[j][i]);
    let lu11 = Lu::new(&s11);
    let lu22 = Lu::new(&s22);

    let mut rng = pscca::rng::stream_rng(seed, 7);
    let mut best: f64 = 0.0;
    for _ in 0..5 {
        let mut a: Vec<f64> = (0..d1).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mut rho_prev = -1.0;
        for _ in 0..200_000 {
            let s21a = mat_vec(&s21, &a);
            if s21a.iter().all(|v| v.abs() < 1e-300) {
                break;
            }
            let b = lu22.solve(&s21a);
            let s12b = mat_vec(&s12, &b);
            a = lu11.solve(&s12b);
            let num = dot(&a, &mat_vec(&s12, &b));
            let den = (dot(&a, &mat_vec(&s11, &a)) * dot(&b, &mat_vec(&s22, &b))).sqrt();
            let rho = num.abs() / den;
            if (rho - rho_prev).abs() < 1e-15 {
                rho_prev = rho;
                break;
            }
            rho_prev = rho;
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            a.iter_mut().for_each(|v| *v /= norm);
        }
        best = best.max(rho_prev);
    }
    best
}

/// Random valid state with triangular loadings.
pub fn random_state(d1: usize, d2: usize, d: usize, seed: u64) -> ModelState {
    let mut rng = pscca::rng::stream_rng(seed, 0);
    let mut triangular = |rows: usize| {
        DMatrix::from_fn(rows, d, |i, k| {
            let v: f64 = rng.sample(StandardNormal);
            if k > i {
                0.0
            } else if k == i {
                v.abs().max(1e-3)
            } else {
                v
            }
        })
    };
    let w1 = triangular(d1);
    let w2 = triangular(d2);
    let s1 = 0.3 + rng.random::<f64>();
    let s2 = 0.3 + rng.random::<f64>();
    ModelState::from_loadings(w1, w2, s1, s2, 3).unwrap()
}
