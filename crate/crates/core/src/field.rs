//! Layered spectral synthesis of the almost star-scale invariant field on the
//! periodic grid.
//!
//! Band `j` covers `u in (j du, (j+1) du]` and is a stationary Gaussian layer
//! with covariance `w_j du K(e^{u_j} |x - y|)` (midpoint `u_j`). Each layer
//! is drawn as `Re sum_k sqrt(lambda_k / N) xi_k e^{2 pi i k.x}` with complex
//! normals `xi`, where `lambda` is the DFT of the periodised band covariance.
//!
//! A [`FieldSample`] stores only its seed: band `j` always reads its noise
//! from stream `(seed, j)`, so every truncation, mollification or single
//! layer of one sample is built from the same draws and agrees exactly.

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft::GridFft;
use crate::kernels::{check_band_multiple, FieldParams, Mollifier};
use crate::rng;
use crate::stats::{covariance_jackknife, require_replicas};

pub const MIN_POINTS_PER_DIM: usize = 64;
/// Clipped negative spectral mass allowed, relative to the total variance.
pub const CLIP_BUDGET: f64 = 1e-6;
/// Mollification scales must span at least this many grid spacings.
pub const MIN_EPS_CELLS: f64 = 4.0;

/// Periodic grid with `m` points per dimension on `[0, 1)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub dim: usize,
    pub m: usize,
}

impl GridSpec {
    pub fn new(dim: usize, m: usize) -> Result<GridSpec> {
        if dim != 1 && dim != 2 {
            return Err(Error::Unsupported("only d = 1 and d = 2 are supported"));
        }
        if !m.is_power_of_two() || m < MIN_POINTS_PER_DIM {
            return Err(Error::param("points_per_dim", format!("must be a power of two >= 64, got {m}")));
        }
        Ok(GridSpec { dim, m })
    }

    pub fn points(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Coordinates of site `idx` (row-major, first coordinate slowest).
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [idx as f64 * h, 0.0],
            _ => [(idx / self.m) as f64 * h, (idx % self.m) as f64 * h],
        }
    }

    /// Nearest site to a torus point, rounding halves up.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let m = self.m as f64;
        let snap = |v: f64| ((v * m + 0.5).floor() as i64).rem_euclid(self.m as i64) as usize;
        match self.dim {
            1 => snap(x[0]),
            _ => snap(x[0]) * self.m + snap(x[1]),
        }
    }

    /// Site index of the integer offset vector `o` (taken modulo `m`).
    pub fn wrap(&self, o: [i64; 2]) -> usize {
        let m = self.m as i64;
        match self.dim {
            1 => o[0].rem_euclid(m) as usize,
            _ => (o[0].rem_euclid(m) * m + o[1].rem_euclid(m)) as usize,
        }
    }

    /// Minimal-image distance between two sites.
    pub fn torus_distance(&self, a: usize, b: usize) -> f64 {
        let (xa, xb) = (self.coords(a), self.coords(b));
        let mut s = 0.0;
        for i in 0..self.dim {
            let mut d = (xa[i] - xb[i]).abs();
            d = d.min(1.0 - d);
            s += d * d;
        }
        s.sqrt()
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch { left: format!("{self:?}"), right: format!("{other:?}") })
        }
    }
}

/// One scale layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub u_center: f64,
    pub delta_u: f64,
    pub weight: f64,
}

/// Which regularisation of the field to realise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// `X_t`: all bands below `t`.
    Truncated(f64),
    /// `X_eps = X * phi_eps`, with the full stored depth standing in for `X`.
    Mollified(f64),
    /// `X_{t, eps} = X_t * phi_eps`.
    TruncatedMollified(f64, f64),
}

/// A contiguous run of bands, optionally mollified. Every regularisation and
/// every single layer is one of these.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub bands: Range<usize>,
    pub eps: Option<f64>,
}

impl View {
    pub fn layer(j: usize) -> View {
        View { bands: j..j + 1, eps: None }
    }
}

#[derive(Debug, Clone)]
enum BandSpectrum {
    /// `sqrt(lambda_k / N)` per frequency.
    Full(Vec<f64>),
    /// Sub-grid band: white noise, constant spectrum.
    Flat(f64),
}

impl BandSpectrum {
    #[inline]
    fn amp(&self, k: usize) -> f64 {
        match self {
            BandSpectrum::Full(v) => v[k],
            BandSpectrum::Flat(a) => *a,
        }
    }
}

/// Precomputed band spectra for one `(params, grid, t_max, delta_u)`.
#[derive(Debug)]
pub struct FieldSampler {
    params: FieldParams,
    grid: GridSpec,
    t_max: f64,
    delta_u: f64,
    bands: Vec<BandSpec>,
    spectra: Vec<BandSpectrum>,
    psd_clip_mass: f64,
    total_variance: f64,
    fft: GridFft,
    mollifier: Mollifier,
}

impl FieldSampler {
    pub fn new(params: FieldParams, grid: GridSpec, t_max: f64, delta_u: f64) -> Result<FieldSampler> {
        if params.dim != grid.dim {
            return Err(Error::GridMismatch {
                left: format!("field dimension {}", params.dim),
                right: format!("{grid:?}"),
            });
        }
        if !(delta_u > 0.0 && delta_u <= 0.5) {
            return Err(Error::param("delta_u", "must lie in (0, 0.5]"));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::param("t_max", "must be finite and nonnegative"));
        }
        check_band_multiple("t_max", t_max, delta_u)?;
        let n_bands = (t_max / delta_u).round() as usize;
        let n = grid.points();
        let m = grid.m as f64;
        let fft = GridFft::new(grid.dim, grid.m);
        let mut bands = Vec::with_capacity(n_bands);
        let mut spectra = Vec::with_capacity(n_bands);
        let mut clipped = 0.0;
        let mut total = 0.0;
        for j in 0..n_bands {
            let u = (j as f64 + 0.5) * delta_u;
            let weight = params.weight(u);
            let c0 = weight * delta_u;
            bands.push(BandSpec { u_center: u, delta_u, weight });
            total += c0;
            let scale = u.exp();
            let reach = (m / scale).ceil() as i64;
            if scale >= m {
                spectra.push(BandSpectrum::Flat((c0 / n as f64).sqrt()));
                continue;
            }
            // Periodised covariance: enumerate every integer offset inside the
            // support; offsets beyond one period fold back onto the torus.
            let mut cov = vec![Complex64::new(0.0, 0.0); n];
            let lo = -reach;
            match grid.dim {
                1 => {
                    for o in lo..=reach {
                        let v = params.seed.eval(scale * o as f64 / m);
                        if v > 0.0 {
                            cov[grid.wrap([o, 0])].re += c0 * v;
                        }
                    }
                }
                _ => {
                    for a in lo..=reach {
                        for b in lo..=reach {
                            let r = ((a * a + b * b) as f64).sqrt() / m;
                            let v = params.seed.eval(scale * r);
                            if v > 0.0 {
                                cov[grid.wrap([a, b])].re += c0 * v;
                            }
                        }
                    }
                }
            }
            fft.forward(&mut cov);
            let amps = cov
                .iter()
                .map(|lam| {
                    let l = lam.re;
                    if l < 0.0 {
                        clipped += -l / n as f64;
                        0.0
                    } else {
                        (l / n as f64).sqrt()
                    }
                })
                .collect();
            spectra.push(BandSpectrum::Full(amps));
        }
        if clipped > CLIP_BUDGET * total {
            return Err(Error::ClipBudgetExceeded { clipped, budget: CLIP_BUDGET * total });
        }
        let mollifier = Mollifier::build(grid.dim, 1024)?;
        Ok(FieldSampler {
            params,
            grid,
            t_max,
            delta_u,
            bands,
            spectra,
            psd_clip_mass: clipped,
            total_variance: total,
            fft,
            mollifier,
        })
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn delta_u(&self) -> f64 {
        self.delta_u
    }

    pub fn bands(&self) -> &[BandSpec] {
        &self.bands
    }

    pub fn psd_clip_mass(&self) -> f64 {
        self.psd_clip_mass
    }

    /// Per-site variance of the full stored depth, before clipping.
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn sample(self: &Arc<Self>, seed: u64) -> FieldSample {
        FieldSample { sampler: self.clone(), seed }
    }

    /// Number of bands below depth `t`; `t` must sit on a band boundary.
    pub fn bands_below(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.t_max + 1e-12).contains(&t) {
            return Err(Error::param("t", format!("must lie in [0, t_max = {}], got {t}", self.t_max)));
        }
        check_band_multiple("t", t, self.delta_u)?;
        Ok((t / self.delta_u).round() as usize)
    }

    pub fn view(&self, reg: Regularization) -> Result<View> {
        let (t, eps) = match reg {
            Regularization::Truncated(t) => (t, None),
            Regularization::Mollified(e) => (self.t_max, Some(e)),
            Regularization::TruncatedMollified(t, e) => (t, Some(e)),
        };
        let nb = self.bands_below(t)?;
        if let Some(e) = eps {
            self.check_eps(e)?;
        }
        Ok(View { bands: 0..nb, eps })
    }

    fn check_eps(&self, eps: f64) -> Result<()> {
        if !(eps >= MIN_EPS_CELLS * self.grid.spacing()) || eps > 0.5 {
            return Err(Error::param(
                "epsilon",
                format!("{eps} outside [{} grid spacings, 1/2]", MIN_EPS_CELLS),
            ));
        }
        Ok(())
    }

    fn check_view(&self, v: &View) -> Result<()> {
        if v.bands.end > self.bands.len() || v.bands.start > v.bands.end {
            return Err(Error::param("bands", format!("{:?} outside 0..{}", v.bands, self.bands.len())));
        }
        if let Some(e) = v.eps {
            self.check_eps(e)?;
        }
        Ok(())
    }

    /// DFT of the grid mollifier `phi_eps`, weights normalised to sum to 1.
    pub fn mollifier_spectrum(&self, eps: f64) -> Result<Vec<f64>> {
        self.check_eps(eps)?;
        let g = self.grid;
        let m = g.m as f64;
        let reach = (eps * m).ceil() as i64;
        let mut w = vec![Complex64::new(0.0, 0.0); g.points()];
        let mut mass = 0.0;
        let mut put = |o: [i64; 2], r: f64| {
            let v = self.mollifier.eval(r / eps);
            if v > 0.0 {
                w[g.wrap(o)].re += v;
                mass += v;
            }
        };
        match g.dim {
            1 => {
                for a in -reach..=reach {
                    put([a, 0], (a as f64 / m).abs());
                }
            }
            _ => {
                for a in -reach..=reach {
                    for b in -reach..=reach {
                        put([a, b], ((a * a + b * b) as f64).sqrt() / m);
                    }
                }
            }
        }
        for c in w.iter_mut() {
            c.re /= mass;
        }
        self.fft.forward(&mut w);
        Ok(w.iter().map(|c| c.re).collect())
    }

    /// Exact grid covariance `Cov(A(x + o), B(x))` indexed by the offset
    /// site `o`, for two views of the same sample.
    pub fn cross_covariance(&self, a: &View, b: &View) -> Result<Vec<f64>> {
        self.check_view(a)?;
        self.check_view(b)?;
        let n = self.grid.points();
        let common = a.bands.start.max(b.bands.start)..a.bands.end.min(b.bands.end);
        let mut spec = vec![0.0; n];
        for j in common {
            for (k, s) in spec.iter_mut().enumerate() {
                let amp = self.spectra[j].amp(k);
                *s += amp * amp;
            }
        }
        for eps in [a.eps, b.eps].into_iter().flatten() {
            let mh = self.mollifier_spectrum(eps)?;
            for (s, f) in spec.iter_mut().zip(&mh) {
                *s *= f;
            }
        }
        let mut buf: Vec<Complex64> = spec.iter().map(|s| Complex64::new(*s, 0.0)).collect();
        self.fft.inverse(&mut buf);
        Ok(buf.iter().map(|c| c.re).collect())
    }

    pub fn covariance(&self, v: &View) -> Result<Vec<f64>> {
        self.cross_covariance(v, v)
    }

    /// Exact per-site variance of a view.
    pub fn variance(&self, v: &View) -> Result<f64> {
        self.check_view(v)?;
        let n = self.grid.points();
        let mut spec = vec![0.0; n];
        for j in v.bands.clone() {
            for (k, s) in spec.iter_mut().enumerate() {
                let amp = self.spectra[j].amp(k);
                *s += amp * amp;
            }
        }
        if let Some(e) = v.eps {
            let mh = self.mollifier_spectrum(e)?;
            for (s, f) in spec.iter_mut().zip(&mh) {
                *s *= f * f;
            }
        }
        Ok(crate::stats::pairwise_sum(&spec))
    }
}

/// One realisation: the sampler plus the seed that keys its band streams.
#[derive(Debug, Clone)]
pub struct FieldSample {
    sampler: Arc<FieldSampler>,
    seed: u64,
}

impl FieldSample {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> &FieldSampler {
        &self.sampler
    }

    pub fn grid(&self) -> GridSpec {
        self.sampler.grid
    }

    pub fn psd_clip_mass(&self) -> f64 {
        self.sampler.psd_clip_mass
    }

    pub fn field(&self, reg: Regularization) -> Result<Vec<f64>> {
        Ok(self.fields(&[reg])?.pop().unwrap())
    }

    pub fn fields(&self, regs: &[Regularization]) -> Result<Vec<Vec<f64>>> {
        let views = regs.iter().map(|r| self.sampler.view(*r)).collect::<Result<Vec<_>>>()?;
        self.views(&views)
    }

    /// Realises several views from a single pass over the band noise.
    pub fn views(&self, views: &[View]) -> Result<Vec<Vec<f64>>> {
        let s = &*self.sampler;
        for v in views {
            s.check_view(v)?;
        }
        let n = s.grid.points();
        let mut acc = vec![vec![Complex64::new(0.0, 0.0); n]; views.len()];
        let last = views.iter().map(|v| v.bands.end).max().unwrap_or(0);
        let first = views.iter().map(|v| v.bands.start).min().unwrap_or(0);
        let mut xi = vec![Complex64::new(0.0, 0.0); n];
        for j in first..last {
            let users: Vec<usize> = (0..views.len()).filter(|&i| views[i].bands.contains(&j)).collect();
            if users.is_empty() {
                continue;
            }
            let mut r = rng::stream(self.seed, j as u64);
            for (k, z) in xi.iter_mut().enumerate() {
                let a = s.spectra[j].amp(k);
                let re: f64 = StandardNormal.sample(&mut r);
                let im: f64 = StandardNormal.sample(&mut r);
                *z = Complex64::new(a * re, a * im);
            }
            for &i in &users {
                for (o, z) in acc[i].iter_mut().zip(&xi) {
                    *o += z;
                }
            }
        }
        let mut out = Vec::with_capacity(views.len());
        for (v, mut buf) in views.iter().zip(acc) {
            if let Some(e) = v.eps {
                let mh = s.mollifier_spectrum(e)?;
                for (z, f) in buf.iter_mut().zip(&mh) {
                    *z *= f;
                }
            }
            s.fft.inverse(&mut buf);
            out.push(buf.iter().map(|z| z.re).collect());
        }
        Ok(out)
    }

    /// A single band as a grid field.
    pub fn layer(&self, j: usize) -> Result<Vec<f64>> {
        Ok(self.views(&[View::layer(j)])?.pop().unwrap())
    }
}

/// Builds a sampler and draws one sample from it.
pub fn sample_field(params: FieldParams, grid: GridSpec, t_max: f64, delta_u: f64, seed: u64) -> Result<FieldSample> {
    Ok(Arc::new(FieldSampler::new(params, grid, t_max, delta_u)?).sample(seed))
}

/// Sample covariance and jackknife standard error at each pair of sites.
pub fn empirical_cov<F: AsRef<[f64]>>(replicas: &[F], pairs: &[(usize, usize)]) -> Result<Vec<(f64, f64)>> {
    require_replicas(replicas.len(), 100)?;
    Ok(pairs
        .iter()
        .map(|&(a, b)| {
            let xs: Vec<f64> = replicas.iter().map(|r| r.as_ref()[a]).collect();
            let ys: Vec<f64> = replicas.iter().map(|r| r.as_ref()[b]).collect();
            covariance_jackknife(&xs, &ys)
        })
        .collect())
}
