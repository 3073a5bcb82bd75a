//! Monte Carlo aggregation helpers.
//!
//! Sums go through [`pairwise_sum`] so that aggregates depend only on the
//! order of the input slice, never on how replicas were scheduled.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanSe { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = pairwise_sum(xs) / n as f64;
        if n == 1 {
            return MeanSe { mean, se: f64::NAN, n };
        }
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        MeanSe { mean, se: (var / n as f64).sqrt(), n }
    }

    /// Number of standard errors separating the mean from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.se == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.se
        }
    }

    pub fn within(&self, target: f64, n_se: f64) -> bool {
        self.z_score(target) <= n_se
    }
}

/// Unbiased sample covariance of paired observations and its jackknife
/// standard error.
pub fn covariance_jackknife(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n >= 3, "jackknife needs at least three observations");
    let nf = n as f64;
    let sx = pairwise_sum(xs);
    let sy = pairwise_sum(ys);
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| x * y).collect();
    let sxy = pairwise_sum(&prods);
    let full = (sxy - sx * sy / nf) / (nf - 1.0);

    let m = nf - 1.0;
    let loo: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let sx_i = sx - x;
            let sy_i = sy - y;
            let sxy_i = sxy - x * y;
            (sxy_i - sx_i * sy_i / m) / (m - 1.0)
        })
        .collect();
    let loo_mean = pairwise_sum(&loo) / nf;
    let dev: Vec<f64> = loo.iter().map(|v| (v - loo_mean) * (v - loo_mean)).collect();
    let se = ((nf - 1.0) / nf * pairwise_sum(&dev)).sqrt();
    (full, se)
}

/// Sample skewness and excess kurtosis with their large-sample standard
/// errors under normality (`sqrt(6/n)` and `sqrt(24/n)`).
pub fn skew_kurtosis(xs: &[f64]) -> ((f64, f64), (f64, f64)) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let m2: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let m3: Vec<f64> = xs.iter().map(|x| (x - mean).powi(3)).collect();
    let m4: Vec<f64> = xs.iter().map(|x| (x - mean).powi(4)).collect();
    let (m2, m3, m4) = (pairwise_sum(&m2) / n, pairwise_sum(&m3) / n, pairwise_sum(&m4) / n);
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2) - 3.0;
    ((skew, (6.0 / n).sqrt()), (kurt, (24.0 / n).sqrt()))
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Guard used by estimators that need a minimum number of replicas.
pub fn require_replicas(got: usize, min: usize) -> Result<()> {
    if got < min {
        Err(Error::TooFewReplicas { got, min })
    } else {
        Ok(())
    }
}
