//! Seed covariance, mollifier, and the scale-integrated covariances built
//! from them.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{Fft, Fft2};
use crate::quadrature::{adaptive_simpson, Rule};

pub const MIN_RESOLUTION: usize = 256;
/// Absolute tolerance for the scale integrals.
pub const COV_TOL: f64 = 1e-10;
/// Construction fails below this; the documented invariant is `>= -1e-8`.
pub const SPECTRAL_FLOOR: f64 = -1e-6;
/// Frozen from `pilot_log_defect` over a in {0, 0.5, 1}, alpha in {1, 2} and
/// r in {e^-2, ..., e^-9}: worst |defect| 2.15 (d = 1) and 2.23 (d = 2). The
/// defect tends to -int_0^1 (1 - K(s))/s ds - a/alpha as r -> 0.
pub const LOG_DEFECT_BOUND: f64 = 2.5;

/// `exp(-1/(1-s^2))` for `|s| < 1`, else 0.
#[inline]
fn bump(s2: f64) -> f64 {
    if s2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s2)).exp()
    }
}

/// Seed profile supported in the ball of radius 1/2 (unnormalised).
#[inline]
fn seed_profile(r2: f64) -> f64 {
    bump(4.0 * r2)
}

/// Radial seed covariance `K = phi * phi`, tabulated on `r_i = i / resolution`.
#[derive(Debug, Clone)]
pub struct SeedKernel {
    dim: usize,
    resolution: usize,
    table: Vec<f64>,
    spectral_min: f64,
    decay_slope: f64,
}

impl SeedKernel {
    pub fn build(dim: usize, resolution: usize) -> Result<SeedKernel> {
        check_dim(dim)?;
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall { got: resolution, min: MIN_RESOLUTION });
        }
        let raw: Vec<f64> = match dim {
            1 => {
                let rule = Rule::gauss_legendre(128);
                (0..=resolution).map(|i| self_overlap_1d(&rule, i as f64 / resolution as f64)).collect()
            }
            _ => {
                let outer = Rule::gauss_legendre(96);
                let inner = Rule::gauss_legendre(64);
                (0..=resolution)
                    .map(|i| self_overlap_2d(&outer, &inner, i as f64 / resolution as f64))
                    .collect()
            }
        };
        let k0 = raw[0];
        let mut table: Vec<f64> = raw.iter().map(|v| (v / k0).max(0.0)).collect();
        table[0] = 1.0;
        table[resolution] = 0.0;
        let mut kernel = SeedKernel { dim, resolution, table, spectral_min: 0.0, decay_slope: 0.0 };
        let (min, slope) = kernel.spectrum_diagnostics();
        kernel.spectral_min = min;
        kernel.decay_slope = slope;
        if min < SPECTRAL_FLOOR {
            return Err(Error::NegativeSpectrum { spectral_min: min });
        }
        Ok(kernel)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Smallest real part of the sampled kernel's Fourier transform.
    pub fn spectral_min(&self) -> f64 {
        self.spectral_min
    }

    /// Log-log slope of the (monotone envelope of the) Fourier transform
    /// over the decade `|xi| in [2, 20]`.
    pub fn decay_slope(&self) -> f64 {
        self.decay_slope
    }

    /// `(r, K(r))` pairs of the table.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.resolution as f64;
        self.table.iter().enumerate().map(move |(i, v)| (i as f64 / n, *v))
    }

    /// `K(r)` by 4-point Lagrange interpolation, using evenness at 0.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= 1.0 {
            return 0.0;
        }
        let x = r * self.resolution as f64;
        let i = x.floor() as isize;
        let f = x - i as f64;
        if f == 0.0 {
            return self.node(i);
        }
        let (y0, y1, y2, y3) = (self.node(i - 1), self.node(i), self.node(i + 1), self.node(i + 2));
        let v = -f * (f - 1.0) * (f - 2.0) / 6.0 * y0 + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * y1
            - (f + 1.0) * f * (f - 2.0) / 2.0 * y2
            + (f + 1.0) * f * (f - 1.0) / 6.0 * y3;
        v.max(0.0)
    }

    #[inline]
    fn node(&self, i: isize) -> f64 {
        let i = i.unsigned_abs();
        if i >= self.table.len() {
            0.0
        } else {
            self.table[i]
        }
    }

    fn spectrum_diagnostics(&self) -> (f64, f64) {
        // Period 4 in every direction; the 1D grid lands on table nodes.
        let period = 4.0;
        match self.dim {
            1 => {
                let dx = 1.0 / 1024.0;
                let n = (period / dx) as usize;
                let mut buf: Vec<Complex64> = (0..n)
                    .map(|j| {
                        let o = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                        Complex64::new(self.eval(o * dx) * dx, 0.0)
                    })
                    .collect();
                Fft::new(n).forward(&mut buf);
                let min = buf.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
                let line: Vec<f64> = buf[..n / 2].iter().map(|c| c.re).collect();
                (min, envelope_slope(&line, period))
            }
            _ => {
                let dx = 1.0 / 64.0;
                let m = (period / dx) as usize;
                let mut buf = alloc::vec![Complex64::new(0.0, 0.0); m * m];
                for a in 0..m {
                    let oa = if a <= m / 2 { a as f64 } else { a as f64 - m as f64 };
                    for b in 0..m {
                        let ob = if b <= m / 2 { b as f64 } else { b as f64 - m as f64 };
                        let r = (oa * oa + ob * ob).sqrt() * dx;
                        buf[a * m + b] = Complex64::new(self.eval(r) * dx * dx, 0.0);
                    }
                }
                Fft2::new(m).forward(&mut buf);
                let min = buf.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
                let line: Vec<f64> = (0..m / 2).map(|k| buf[k].re).collect();
                (min, envelope_slope(&line, period))
            }
        }
    }
}

fn self_overlap_1d(rule: &Rule, r: f64) -> f64 {
    if r >= 1.0 {
        return 0.0;
    }
    // Symmetric about r/2.
    2.0 * rule.integrate(0.5 * r, 0.5, |y| seed_profile(y * y) * seed_profile((y - r) * (y - r)))
}

fn self_overlap_2d(outer: &Rule, inner: &Rule, r: f64) -> f64 {
    if r >= 1.0 {
        return 0.0;
    }
    // Lens of two discs of radius 1/2; mirror symmetric about y1 = r/2, and
    // on y1 > r/2 the disc centred at the origin is the binding one.
    4.0 * outer.integrate(0.5 * r, 0.5, |y1| {
        let h = (0.25 - y1 * y1).max(0.0).sqrt();
        inner.integrate(0.0, h, |y2| {
            let a = y1 * y1 + y2 * y2;
            let b = (y1 - r) * (y1 - r) + y2 * y2;
            seed_profile(a) * seed_profile(b)
        })
    })
}

/// Least-squares slope of `log E(xi)` against `log xi` on `[2, 20]`, where
/// `E` is the decreasing envelope `max_{xi' >= xi} |F(xi')|`.
fn envelope_slope(spectrum: &[f64], period: f64) -> f64 {
    let mut env = alloc::vec![0.0; spectrum.len()];
    let mut run = 0.0f64;
    for k in (0..spectrum.len()).rev() {
        run = run.max(spectrum[k].abs());
        env[k] = run;
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, e) in env.iter().enumerate() {
        let xi = k as f64 / period;
        if (2.0..=20.0).contains(&xi) && *e > 0.0 {
            xs.push(xi.ln());
            ys.push(e.ln());
        }
    }
    crate::stats::ls_slope(&xs, &ys)
}

/// Normalised radial bump `c exp(-1/(1-r^2))` on the unit ball.
#[derive(Debug, Clone)]
pub struct Mollifier {
    dim: usize,
    norm: f64,
    table: Vec<f64>,
}

impl Mollifier {
    pub fn build(dim: usize, resolution: usize) -> Result<Mollifier> {
        check_dim(dim)?;
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall { got: resolution, min: MIN_RESOLUTION });
        }
        let rule = Rule::gauss_legendre(128);
        let mass = match dim {
            1 => 2.0 * rule.integrate(0.0, 1.0, |r| bump(r * r)),
            _ => 2.0 * PI * rule.integrate(0.0, 1.0, |r| r * bump(r * r)),
        };
        let norm = 1.0 / mass;
        let table = (0..=resolution)
            .map(|i| {
                let r = i as f64 / resolution as f64;
                norm * bump(r * r)
            })
            .collect();
        Ok(Mollifier { dim, norm, table })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = (self.table.len() - 1) as f64;
        self.table.iter().enumerate().map(move |(i, v)| (i as f64 / n, *v))
    }

    /// `phi(r)`, evaluated from the closed form.
    pub fn eval(&self, r: f64) -> f64 {
        self.norm * bump(r * r)
    }

    /// `phi_eps(r) = eps^{-d} phi(r / eps)`.
    pub fn eval_scaled(&self, eps: f64, r: f64) -> f64 {
        self.eval(r / eps) / eps.powi(self.dim as i32)
    }

    /// Total mass by an independent quadrature (diagnostic).
    pub fn mass(&self) -> f64 {
        let rule = Rule::gauss_legendre(200);
        match self.dim {
            1 => rule.integrate(-1.0, 1.0, |r| self.eval(r)),
            _ => 2.0 * PI * rule.integrate(0.0, 1.0, |r| r * self.eval(r)),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::Unsupported("only d = 1 and d = 2 are supported"))
    }
}

/// Parameters of the almost star-scale invariant field.
#[derive(Debug, Clone)]
pub struct FieldParams {
    pub dim: usize,
    pub alpha: f64,
    pub frak_a: f64,
    pub seed: Arc<SeedKernel>,
}

impl FieldParams {
    pub fn new(alpha: f64, frak_a: f64, seed: Arc<SeedKernel>) -> Result<FieldParams> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", "must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&frak_a) {
            return Err(Error::param("frak_a", "must lie in [0, 1]"));
        }
        Ok(FieldParams { dim: seed.dim(), alpha, frak_a, seed })
    }

    /// Same kernel with a different scaling parameter.
    pub fn with_frak_a(&self, frak_a: f64) -> Result<FieldParams> {
        FieldParams::new(self.alpha, frak_a, self.seed.clone())
    }

    /// Scale weight `1 - a e^{-alpha u}`.
    #[inline]
    pub fn weight(&self, u: f64) -> f64 {
        1.0 - self.frak_a * (-self.alpha * u).exp()
    }
}

/// `C_{s,t}(r) = int_0^{min(s,t)} K(e^u r) (1 - a e^{-alpha u}) du`.
///
/// `s` and `t` may be infinite; at `r = 0` with both infinite the result is
/// `+inf`.
pub fn cov_star(p: &FieldParams, s: f64, t: f64, r: f64) -> f64 {
    assert!(r >= 0.0 && s >= 0.0 && t >= 0.0);
    let mut upper = s.min(t);
    if r > 0.0 {
        upper = upper.min(-r.ln());
        if upper <= 0.0 {
            return 0.0;
        }
    } else if upper.is_infinite() {
        return f64::INFINITY;
    }
    if upper == 0.0 {
        return 0.0;
    }
    adaptive_simpson(&|u: f64| p.seed.eval(u.exp() * r) * p.weight(u), 0.0, upper, COV_TOL)
}

/// `sigma_t^2 = t - a (1 - e^{-alpha t}) / alpha`.
pub fn sigma_sq(p: &FieldParams, t: f64) -> f64 {
    assert!(t >= 0.0);
    if t.is_infinite() {
        return f64::INFINITY;
    }
    t - p.frak_a * (-(-p.alpha * t).exp_m1()) / p.alpha
}

/// `C_{inf,inf}(r) - log(1/r)`; bounded uniformly in `r` (log asymptotics).
pub fn log_defect(p: &FieldParams, r: f64) -> f64 {
    cov_star(p, f64::INFINITY, f64::INFINITY, r) + r.ln()
}

/// Largest covariance defect of the scale-splitting identity
/// `C^a_t(r0 r) = C^{a r0^alpha}_{t-t0}(r) + C^a_{t0}(r0 r)`, `r0 = e^{-t0}`,
/// over the given separations.
pub fn scaling_check(p: &FieldParams, t0: f64, t: f64, delta_u: f64, separations: &[f64]) -> Result<f64> {
    check_band_multiple("t0", t0, delta_u)?;
    if t < t0 {
        return Err(Error::param("t", "must be at least t0"));
    }
    let r0 = (-t0).exp();
    let shifted = p.with_frak_a(p.frak_a * r0.powf(p.alpha))?;
    let mut worst = 0.0f64;
    for &r in separations {
        let lhs = cov_star(p, t, t, r0 * r);
        let rhs = cov_star(&shifted, t - t0, t - t0, r) + cov_star(p, t0, t0, r0 * r);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

pub(crate) fn check_band_multiple(what: &'static str, value: f64, delta_u: f64) -> Result<()> {
    let q = value / delta_u;
    if (q - q.round()).abs() > 1e-9 * q.abs().max(1.0) {
        Err(Error::BandMisaligned { what, value, delta_u })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests;
