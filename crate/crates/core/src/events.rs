//! Multiscale lattice bookkeeping, the good/bad split of the GMC estimator,
//! thick points, and the one-dimensional martingale-trick toy model.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field::{FieldSample, GridSpec, Regularization, View};
use crate::gmc::{integrand, GridField, TestFunction};
use crate::hermite::hermite;
use crate::rng;
use crate::stats::{covariance_jackknife, pairwise_sum, require_replicas, MeanSe};

/// The lattice `e^{-n} Z^d` with half-open cells `x + e^{-n}/2 [-1, 1)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleLattice {
    pub n: usize,
    pub cell: f64,
}

impl ScaleLattice {
    pub fn new(n: usize) -> ScaleLattice {
        ScaleLattice { n, cell: (-(n as f64)).exp() }
    }

    /// Lattice coordinate of the cell containing `x`.
    pub fn index(&self, x: f64) -> i64 {
        (x / self.cell + 0.5).floor() as i64
    }

    pub fn rep(&self, x: [f64; 2]) -> [f64; 2] {
        [self.index(x[0]) as f64 * self.cell, self.index(x[1]) as f64 * self.cell]
    }
}

/// Cell representative `x_n` of a point (both coordinates; the second is
/// ignored in one dimension).
pub fn cell_rep(x: [f64; 2], n: usize) -> [f64; 2] {
    ScaleLattice::new(n).rep(x)
}

/// `E_n(x) = {X_n(x_n) <= gamma_hat n}` for `n0 <= n <= N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodEventConfig {
    pub gamma_hat: f64,
    pub n0: usize,
    pub n_fine: usize,
}

impl GoodEventConfig {
    pub fn new(gamma_hat: f64, n0: usize, n_fine: usize) -> Result<GoodEventConfig> {
        if !gamma_hat.is_finite() {
            return Err(Error::param("gamma_hat", "must be finite"));
        }
        if n0 > n_fine {
            return Err(Error::param("n0", "must not exceed the finest index"));
        }
        Ok(GoodEventConfig { gamma_hat, n0, n_fine })
    }

    /// `gamma_hat = gamma + 0.6 (sqrt(2d) - gamma)`.
    pub fn with_default_slope(gamma: f64, dim: usize, n0: usize, n_fine: usize) -> Result<GoodEventConfig> {
        let edge = (2.0 * dim as f64).sqrt();
        GoodEventConfig::new(gamma + 0.6 * (edge - gamma), n0, n_fine)
    }

    pub fn scales(&self) -> core::ops::RangeInclusive<usize> {
        self.n0..=self.n_fine
    }
}

/// Grid site holding `x_n` for every site and scale, `table[n - n0][site]`.
pub fn representative_sites(grid: GridSpec, cfg: &GoodEventConfig) -> Vec<Vec<usize>> {
    cfg.scales()
        .map(|n| {
            let lat = ScaleLattice::new(n);
            (0..grid.points()).map(|i| grid.nearest(&lat.rep(grid.coords(i)))).collect()
        })
        .collect()
}

/// Smallest failing scale at every site (`None` when the good event holds).
pub fn failure_map(sample: &FieldSample, cfg: &GoodEventConfig) -> Result<Vec<Option<usize>>> {
    let sampler = sample.sampler();
    if (cfg.n_fine as f64) > sampler.t_max() {
        return Err(Error::param("n_fine", "exceeds the sample depth"));
    }
    let views = cfg
        .scales()
        .map(|n| sampler.view(Regularization::Truncated(n as f64)))
        .collect::<Result<Vec<View>>>()?;
    let fields = sample.views(&views)?;
    let reps = representative_sites(sample.grid(), cfg);
    Ok(failure_from_fields(&fields, &reps, cfg))
}

/// `fields[n - n0]` is `X_n` on the grid.
pub fn failure_from_fields(fields: &[Vec<f64>], reps: &[Vec<usize>], cfg: &GoodEventConfig) -> Vec<Option<usize>> {
    let sites = reps.first().map_or(0, |r| r.len());
    (0..sites)
        .map(|i| {
            cfg.scales()
                .zip(fields.iter().zip(reps))
                .find(|(n, (x, r))| x[r[i]] > cfg.gamma_hat * *n as f64)
                .map(|(n, _)| n)
        })
        .collect()
}

/// First failing scale for a single torus point.
pub fn first_failure_scale(sample: &FieldSample, x: [f64; 2], cfg: &GoodEventConfig) -> Result<Option<usize>> {
    let grid = sample.grid();
    Ok(failure_map(sample, cfg)?[grid.nearest(&x)])
}

/// Occupation counts of `{G, F_n0, ..., F_N}` from a failure map.
pub fn partition_counts(map: &[Option<usize>], cfg: &GoodEventConfig) -> Vec<usize> {
    let mut counts = vec![0; cfg.n_fine - cfg.n0 + 2];
    for f in map {
        match f {
            None => counts[0] += 1,
            Some(n) => counts[n - cfg.n0 + 1] += 1,
        }
    }
    counts
}

/// Good and bad parts of `I_eps(f, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodBad {
    pub good: Complex64,
    pub bad: Complex64,
    /// `I_eps(f, k)` summed over all sites in the same order.
    pub total: Complex64,
    pub bad_sites: usize,
    /// Worst-case pairwise-summation error of `good + bad - total`.
    pub rounding_bound: f64,
}

impl GoodBad {
    pub fn reassembly_error(&self) -> f64 {
        (self.good + self.bad - self.total).norm()
    }
}

/// Splits every site contribution into exactly one of the two sums.
pub fn split_good_bad(
    f: &TestFunction,
    x: GridField,
    failures: &[Option<usize>],
    k: usize,
    gamma: Complex64,
    sigma: f64,
) -> Result<GoodBad> {
    let c = integrand(f, x, k, gamma, sigma)?;
    if failures.len() != c.len() {
        return Err(Error::param("failures", "length differs from the grid"));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut good = Vec::with_capacity(c.len());
    let mut bad = Vec::with_capacity(c.len());
    for (v, fail) in c.iter().zip(failures) {
        let (g, b) = if fail.is_none() { (*v, zero) } else { (zero, *v) };
        good.push(g);
        bad.push(b);
    }
    let n = c.len() as f64;
    let abs: Vec<f64> = c.iter().map(|v| v.re.abs() + v.im.abs()).collect();
    let depth = n.log2().ceil() + 1.0;
    let rounding_bound = 3.0 * depth * f64::EPSILON * pairwise_sum(&abs) / n;
    Ok(GoodBad {
        good: crate::gmc::grid_mean(&good),
        bad: crate::gmc::grid_mean(&bad),
        total: crate::gmc::grid_mean(&c),
        bad_sites: failures.iter().filter(|f| f.is_some()).count(),
        rounding_bound,
    })
}

/// `max_x X_t(x) / t`.
pub fn thickness_max(sample: &FieldSample, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param("t", "must be positive"));
    }
    let x = sample.field(Regularization::Truncated(t))?;
    Ok(x.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) / t)
}

/// Minimum replica count for the toy martingale statistics.
pub const MIN_TOY_REPLICAS: usize = 10_000;

/// `T^{k/2} E[H_k(B_T / sqrt T) 1{B_t <= t for t = 0..T}]` by Monte Carlo,
/// returned as (estimate, standard error).
pub fn toy_martingale_stat(k: usize, big_t: usize, replicas: usize, seed: u64) -> Result<(f64, f64)> {
    require_replicas(replicas, MIN_TOY_REPLICAS)?;
    if big_t == 0 {
        return Err(Error::param("T", "must be positive"));
    }
    let scale = (big_t as f64).powf(k as f64 / 2.0);
    let root = (big_t as f64).sqrt();
    let xs: Vec<f64> = (0..replicas as u64)
        .map(|r| {
            let mut g = rng::stream(seed, r);
            let mut b = 0.0;
            let mut alive = true;
            for t in 1..=big_t {
                let z: f64 = StandardNormal.sample(&mut g);
                b += z;
                alive &= b <= t as f64;
            }
            if alive {
                scale * hermite(k, b / root)
            } else {
                0.0
            }
        })
        .collect();
    let ms = MeanSe::of(&xs);
    Ok((ms.mean, ms.se))
}

/// Martingale checks for `M_t = t^{k/2} H_k(B_t / sqrt t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleEcho {
    /// Mean of `M_{t2}`.
    pub mean: MeanSe,
    /// Covariance of `M_{t2} - M_{t1}` with `H_k(B_{t1} / sqrt t1)`, with SE.
    pub increment_cov: (f64, f64),
}

pub fn martingale_echo(k: usize, t1: f64, t2: f64, replicas: usize, seed: u64) -> Result<MartingaleEcho> {
    require_replicas(replicas, MIN_TOY_REPLICAS)?;
    if !(0.0 < t1 && t1 < t2) {
        return Err(Error::param("t1", "need 0 < t1 < t2"));
    }
    let m = |t: f64, b: f64| t.powf(k as f64 / 2.0) * hermite(k, b / t.sqrt());
    let mut end = Vec::with_capacity(replicas);
    let mut inc = Vec::with_capacity(replicas);
    let mut early = Vec::with_capacity(replicas);
    for r in 0..replicas as u64 {
        let mut g = rng::stream(seed, r);
        let (z1, z2): (f64, f64) = (StandardNormal.sample(&mut g), StandardNormal.sample(&mut g));
        let b1 = t1.sqrt() * z1;
        let b2 = b1 + (t2 - t1).sqrt() * z2;
        end.push(m(t2, b2));
        inc.push(m(t2, b2) - m(t1, b1));
        early.push(hermite(k, z1));
    }
    Ok(MartingaleEcho { mean: MeanSe::of(&end), increment_cov: covariance_jackknife(&inc, &early) })
}
