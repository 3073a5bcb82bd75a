//! Regularised GMC-derivative functionals `I_eps(f, k) = int f :X_eps^k e^{gamma X_eps}:`
//! on the grid, their Gaussian moment oracles, the complex power-series
//! evaluator and the eye-domain geometry.
//!
//! Every integral is the grid mean `N^{-1} sum_x`, and the oracles use the
//! same grid measure, so estimator and oracle differ only by Monte Carlo
//! error.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::GridFft;
use crate::field::GridSpec;
use crate::hermite::{factorial, scaled_hermite_complex, wick_exp, wick_pair_moment};
use crate::stats::{pairwise_sum, MeanSe};

/// Second-moment double sums are refused above this many grid points.
pub const MAX_ORACLE_POINTS: usize = 512 * 512;
const PAIR_TOL: f64 = 1e-17;

/// A field realisation tied to its grid.
#[derive(Debug, Clone, Copy)]
pub struct GridField<'a> {
    pub grid: GridSpec,
    pub values: &'a [f64],
}

impl<'a> GridField<'a> {
    pub fn new(grid: GridSpec, values: &'a [f64]) -> Result<GridField<'a>> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch {
                left: format!("{grid:?}"),
                right: format!("field with {} values", values.len()),
            });
        }
        Ok(GridField { grid, values })
    }
}

/// Grid values of a bounded test function with box support.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    grid: GridSpec,
    values: Vec<f64>,
    support: (f64, f64),
    sup_norm: f64,
}

/// `C^inf` step: 0 for `t <= 0`, 1 for `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let (a, b) = (psi(t), psi(1.0 - t));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

impl TestFunction {
    /// `f` given by its grid values, asserted to vanish outside `[lo, hi]^d`.
    pub fn from_values(grid: GridSpec, values: Vec<f64>, lo: f64, hi: f64) -> Result<TestFunction> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch {
                left: format!("{grid:?}"),
                right: format!("test function with {} values", values.len()),
            });
        }
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::param("support_box", "need 0 <= lo <= hi <= 1"));
        }
        for (i, v) in values.iter().enumerate() {
            let x = grid.coords(i);
            let inside = x[..grid.dim].iter().all(|c| (lo..=hi).contains(c));
            if *v != 0.0 && !inside {
                return Err(Error::param("values", "nonzero outside the support box"));
            }
            if !v.is_finite() {
                return Err(Error::param("values", "must be finite"));
            }
        }
        let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(TestFunction { grid, values, support: (lo, hi), sup_norm })
    }

    /// Indicator of `[lo, hi]^d` with `C^inf` ramps of width `ramp` inside
    /// the box.
    pub fn smoothed_indicator(grid: GridSpec, lo: f64, hi: f64, ramp: f64) -> Result<TestFunction> {
        if !(ramp > 0.0 && 2.0 * ramp <= hi - lo) {
            return Err(Error::param("ramp", "must be positive and fit twice in the box"));
        }
        let values = (0..grid.points())
            .map(|i| {
                let x = grid.coords(i);
                x[..grid.dim].iter().map(|&c| smooth_step((c - lo) / ramp) * smooth_step((hi - c) / ramp)).product()
            })
            .collect();
        TestFunction::from_values(grid, values, lo, hi)
    }

    pub fn constant(grid: GridSpec, c: f64) -> TestFunction {
        TestFunction::from_values(grid, vec![c; grid.points()], 0.0, 1.0).expect("constant is valid")
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_box(&self) -> (f64, f64) {
        self.support
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Grid integral `N^{-1} sum f`.
    pub fn integral(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn abs_integral(&self) -> f64 {
        let a: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        pairwise_sum(&a) / a.len() as f64
    }

    fn check(&self, x: &GridField) -> Result<()> {
        self.grid.ensure_same(&x.grid)
    }
}

/// One value of `I_eps(f, k)` with what is needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct GmcEstimate {
    pub value: Complex64,
    pub k: usize,
    pub gamma: Complex64,
    pub epsilon: f64,
    pub reg: &'static str,
    pub seed: u64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::param("sigma_eps", "must be positive and finite"))
    }
}

/// `:X^k e^{gamma X}:` at every site, closed form
/// `sigma^k H_k((X - gamma sigma^2)/sigma) e^{gamma X - gamma^2 sigma^2/2}`.
pub fn wick_field_grid(x: &[f64], k: usize, gamma: Complex64, sigma: f64) -> Result<Vec<Complex64>> {
    check_sigma(sigma)?;
    let s2 = sigma * sigma;
    Ok(x
        .iter()
        .map(|&z| scaled_hermite_complex(k, Complex64::new(z, 0.0) - gamma * s2, sigma) * wick_exp(z, gamma, sigma))
        .collect())
}

/// Grid mean of complex site values.
pub(crate) fn grid_mean(v: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = v.iter().map(|c| c.re).collect();
    let im: Vec<f64> = v.iter().map(|c| c.im).collect();
    let n = v.len() as f64;
    Complex64::new(pairwise_sum(&re) / n, pairwise_sum(&im) / n)
}

/// Per-site contributions `f(x) :X^k e^{gamma X}:(x)`.
pub fn integrand(f: &TestFunction, x: GridField, k: usize, gamma: Complex64, sigma: f64) -> Result<Vec<Complex64>> {
    f.check(&x)?;
    let w = wick_field_grid(x.values, k, gamma, sigma)?;
    Ok(w.iter().zip(&f.values).map(|(w, f)| w * f).collect())
}

/// `I_eps(f, k)` as a grid Riemann sum.
pub fn estimate_i(f: &TestFunction, x: GridField, k: usize, gamma: Complex64, sigma: f64) -> Result<Complex64> {
    Ok(grid_mean(&integrand(f, x, k, gamma, sigma)?))
}

/// `int f :e^{gamma' X}:` computed directly.
pub fn direct_complex(f: &TestFunction, x: GridField, gamma_prime: Complex64, sigma: f64) -> Result<Complex64> {
    estimate_i(f, x, 0, gamma_prime, sigma)
}

/// `sum_k (gamma' - gamma)^k / k! I_eps(f, k)` with the stopping rule: three
/// consecutive increments below `tol` times the partial sum; the term cap
/// starts at 16 and doubles up to 1024.
pub fn series_eval(
    f: &TestFunction,
    x: GridField,
    gamma: f64,
    gamma_prime: Complex64,
    sigma: f64,
    tol: f64,
) -> Result<(Complex64, usize)> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    const MAX_TERMS: usize = 1024;
    let base = integrand(f, x, 0, Complex64::new(gamma, 0.0), sigma)?;
    let s2 = sigma * sigma;
    let delta = gamma_prime - gamma;
    let dd = delta * delta * s2;
    // q_k = delta^k / k! sigma^k H_k(y / sigma), y = X - gamma sigma^2.
    let ys: Vec<f64> = x.values.iter().map(|z| z - gamma * s2).collect();
    let mut q_prev = vec![Complex64::new(0.0, 0.0); ys.len()];
    let mut q_cur = vec![Complex64::new(1.0, 0.0); ys.len()];
    let mut sum = grid_mean(&base);
    let mut quiet = 0;
    let mut cap = 16;
    let mut k = 0;
    let mut contrib = vec![Complex64::new(0.0, 0.0); ys.len()];
    loop {
        if quiet >= 3 {
            return Ok((sum, k + 1));
        }
        if k + 1 >= cap {
            cap *= 2;
            if cap > MAX_TERMS {
                return Err(Error::SeriesDiverged { cap: MAX_TERMS });
            }
        }
        let kf = (k + 1) as f64;
        for i in 0..ys.len() {
            let next = (delta * ys[i] * q_cur[i] - dd * q_prev[i]) / kf;
            q_prev[i] = q_cur[i];
            q_cur[i] = next;
            contrib[i] = base[i] * next;
        }
        let inc = grid_mean(&contrib);
        sum += inc;
        k += 1;
        if inc.norm() <= tol * sum.norm() {
            quiet += 1;
        } else {
            quiet = 0;
        }
    }
}

/// `|I_eps(f, k)|` for `k = 0..=k_max`, real `gamma`.
pub fn abs_coefficients(f: &TestFunction, x: GridField, gamma: f64, sigma: f64, k_max: usize) -> Result<Vec<f64>> {
    f.check(&x)?;
    check_sigma(sigma)?;
    let s2 = sigma * sigma;
    let n = x.values.len();
    let base: Vec<f64> = x
        .values
        .iter()
        .zip(&f.values)
        .map(|(z, fv)| fv * (gamma * z - 0.5 * gamma * gamma * s2).exp())
        .collect();
    let ys: Vec<f64> = x.values.iter().map(|z| z - gamma * s2).collect();
    let mut prev = vec![0.0; n];
    let mut cur = vec![1.0; n];
    let mut contrib = vec![0.0; n];
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k > 0 {
            for i in 0..n {
                let next = ys[i] * cur[i] - (k - 1) as f64 * s2 * prev[i];
                prev[i] = cur[i];
                cur[i] = next;
            }
        }
        for i in 0..n {
            contrib[i] = base[i] * cur[i];
        }
        out.push((pairwise_sum(&contrib) / n as f64).abs());
    }
    Ok(out)
}

/// Which moment to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentMode {
    /// `E[I(f, k)]`.
    Mean { k: usize },
    /// `E[|I(f, k)|^2]`.
    Second { k: usize },
    /// `E[I(f, j) conj(I(f, k))]`.
    Cross { j: usize, k: usize },
    /// `E[|int f :e^{gamma' X}:|^2]`.
    ComplexL2 { gamma_prime: Complex64 },
}

/// Moment of `I(f, .)` under a stationary grid covariance `cov[o]`
/// (`Cov(X(x + o), X(x))`, indexed like the grid). `Mean` ignores `cov`.
pub fn moment_oracle(mode: MomentMode, f: &TestFunction, gamma: Complex64, cov: &[f64]) -> Result<Complex64> {
    match mode {
        MomentMode::Mean { k } => Ok(Complex64::new(if k == 0 { f.integral() } else { 0.0 }, 0.0)),
        MomentMode::Second { k } => mixed_moment(f, k, k, gamma, gamma, cov),
        MomentMode::Cross { j, k } => mixed_moment(f, j, k, gamma, gamma, cov),
        MomentMode::ComplexL2 { gamma_prime } => {
            let g2 = gamma_prime.norm_sqr();
            pair_sum(f, cov, |c| Ok(Complex64::new((g2 * c).exp(), 0.0)))
        }
    }
}

/// `E[I_A(f, j; gamma_a) conj(I_B(f, k; gamma_b))]` for two jointly Gaussian
/// regularisations with cross covariance `cov[o] = Cov(A(x + o), B(x))`.
pub fn mixed_moment(
    f: &TestFunction,
    j: usize,
    k: usize,
    gamma_a: Complex64,
    gamma_b: Complex64,
    cov: &[f64],
) -> Result<Complex64> {
    let gb = gamma_b.conj();
    pair_sum(f, cov, |c| wick_pair_moment(j, k, gamma_a, gb, c, PAIR_TOL))
}

/// `E[|I_A(f, 0) - I_B(f, 0)|^2]` from the two covariances and the cross
/// covariance.
pub fn cauchy_oracle(f: &TestFunction, gamma: Complex64, cov_a: &[f64], cov_b: &[f64], cov_ab: &[f64]) -> Result<f64> {
    let aa = mixed_moment(f, 0, 0, gamma, gamma, cov_a)?;
    let bb = mixed_moment(f, 0, 0, gamma, gamma, cov_b)?;
    let ab = mixed_moment(f, 0, 0, gamma, gamma, cov_ab)?;
    Ok(aa.re + bb.re - 2.0 * ab.re)
}

/// `N^{-2} sum_{x, y} f(x) f(y) g(cov[x - y])` through the autocorrelation
/// of `f`.
fn pair_sum(f: &TestFunction, cov: &[f64], g: impl Fn(f64) -> Result<Complex64>) -> Result<Complex64> {
    let grid = f.grid;
    let n = grid.points();
    if n > MAX_ORACLE_POINTS {
        return Err(Error::param("grid", format!("{n} points exceed the double-sum guard of {MAX_ORACLE_POINTS}")));
    }
    if cov.len() != n {
        return Err(Error::GridMismatch {
            left: format!("{grid:?}"),
            right: format!("covariance with {} offsets", cov.len()),
        });
    }
    let fft = GridFft::new(grid.dim, grid.m);
    let mut buf: Vec<Complex64> = f.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fft.forward(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex64::new(z.norm_sqr(), 0.0);
    }
    fft.inverse(&mut buf);
    let mut terms = Vec::with_capacity(n);
    for (a, c) in buf.iter().zip(cov) {
        // autocorrelation A(o) = sum_y f(y + o) f(y)
        let a = a.re / n as f64;
        terms.push(g(*c)? * a);
    }
    let m = grid_mean(&terms);
    Ok(m / n as f64)
}

/// Eye domain: union over `gamma in (-sqrt(2d), sqrt(2d))` of the discs
/// `|gamma' - gamma| < sqrt(d) - |gamma|/sqrt(2)`, i.e. the open convex hull
/// of the interval and the disc of radius `sqrt(d)`.
pub fn eye_contains(point: Complex64, d: usize) -> bool {
    let df = d as f64;
    let (a, b) = (point.re.abs(), point.im.abs());
    if b <= a {
        a + b < (2.0 * df).sqrt()
    } else {
        a * a + b * b < df
    }
}

/// Direct membership in the disc union, scanning `n_centers` centres.
pub fn eye_contains_scan(point: Complex64, d: usize, n_centers: usize) -> bool {
    let edge = (2.0 * d as f64).sqrt();
    (1..n_centers).any(|i| {
        let g = -edge + 2.0 * edge * i as f64 / n_centers as f64;
        (point - g).norm() < (d as f64).sqrt() - g.abs() / SQRT_2
    })
}

/// `sqrt(d) - |gamma|/sqrt(2)`.
pub fn disc_radius(gamma: f64, d: usize) -> Result<f64> {
    let edge = (2.0 * d as f64).sqrt();
    if !(gamma.abs() < edge) {
        return Err(Error::param("gamma", format!("|gamma| must be below sqrt(2d) = {edge}")));
    }
    Ok((d as f64).sqrt() - gamma.abs() / SQRT_2)
}

/// `k! ((1 + eta) sqrt(2) / (sqrt(2d) - |gamma|))^k`.
pub fn growth_normalizer(k: usize, gamma: f64, d: usize, eta: f64) -> f64 {
    let c = (1.0 + eta) * SQRT_2 / ((2.0 * d as f64).sqrt() - gamma.abs());
    factorial(k) * c.powi(k as i32)
}

/// One cell of the coefficient-growth table.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub epsilon: f64,
    pub k: usize,
    pub mean_abs: f64,
    pub se: f64,
    pub normalized: f64,
    pub normalized_se: f64,
}

/// Aggregates `samples[replica][level][k] = |I_{eps_level}(f, k)|`.
pub fn growth_rows(epsilons: &[f64], samples: &[Vec<Vec<f64>>], gamma: f64, d: usize, eta: f64) -> Result<Vec<GrowthRow>> {
    if !(eta > 0.0) {
        return Err(Error::param("eta", "must be positive"));
    }
    crate::stats::require_replicas(samples.len(), 2)?;
    let k_len = samples[0].first().map_or(0, |v| v.len());
    let mut rows = Vec::new();
    for (l, &epsilon) in epsilons.iter().enumerate() {
        for k in 0..k_len {
            let xs: Vec<f64> = samples.iter().map(|s| s[l][k]).collect();
            let ms = MeanSe::of(&xs);
            let norm = growth_normalizer(k, gamma, d, eta);
            rows.push(GrowthRow {
                epsilon,
                k,
                mean_abs: ms.mean,
                se: ms.se,
                normalized: ms.mean / norm,
                normalized_se: ms.se / norm,
            });
        }
    }
    Ok(rows)
}

/// Sequential convenience over replica fields; `fields[replica][level]`.
pub fn coefficient_growth_report(
    f: &TestFunction,
    levels: &[(f64, f64)],
    fields: &[Vec<Vec<f64>>],
    gamma: f64,
    k_max: usize,
    eta: f64,
) -> Result<Vec<GrowthRow>> {
    let grid = f.grid;
    let samples = fields
        .iter()
        .map(|rep| {
            levels
                .iter()
                .zip(rep)
                .map(|(&(_, sigma), x)| abs_coefficients(f, GridField::new(grid, x)?, gamma, sigma, k_max))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = levels.iter().map(|l| l.0).collect();
    growth_rows(&eps, &samples, gamma, grid.dim, eta)
}

#[cfg(test)]
mod tests;
