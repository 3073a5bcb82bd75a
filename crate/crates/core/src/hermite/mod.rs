//! Probabilists' Hermite polynomials and Wick calculus.
//!
//! `H_k` is the monic degree-`k` polynomial orthogonal for the weight
//! `exp(-x^2/2)`. For a centred Gaussian `Z` of standard deviation `sigma`
//! the Wick power is `:Z^k: = sigma^k H_k(Z/sigma)` and the normalised
//! power-exponential is
//!
//! ```text
//! :Z^k e^{gZ}: = sigma^k H_k((Z - g sigma^2)/sigma) exp(gZ - g^2 sigma^2/2).
//! ```
//!
//! The same object can be written as a series in Wick powers or as the
//! `k`-th `g`-derivative of `:e^{gZ}:`; [`wick_power_exp`] evaluates all three
//! forms so they can be checked against one another.

mod dd;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use dd::{CDd, Dd};

/// Largest degree whose explicit coefficients are kept as exact integers.
pub const EXACT_MAX_DEGREE: usize = 20;

/// Relative size below which series terms are dropped.
pub const SERIES_REL_TOL: f64 = 1e-16;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 400;

/// `n!` as a float; exact up to `n = 22`, `inf` past 170.
pub fn factorial(n: usize) -> f64 {
    let mut acc = 1.0;
    for i in 2..=n {
        acc *= i as f64;
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `H_k(x)` by the three-term recurrence `H_{k+1} = x H_k - k H_{k-1}`.
pub fn hermite(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_0(x), ..., H_{k_max}(x)` written into `out[..=k_max]`.
pub fn hermite_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for j in 1..out.len().saturating_sub(1) {
        out[j + 1] = x * out[j] - j as f64 * out[j - 1];
    }
}

/// `H_k(z)` at a complex argument.
pub fn hermite_complex(k: usize, z: Complex64) -> Complex64 {
    let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), z);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = z * cur - prev * j as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Scaled Hermite polynomial `sigma^k H_k(y/sigma)` at a complex argument,
/// via `P_{k+1} = y P_k - k sigma^2 P_{k-1}`.
pub fn scaled_hermite_complex(k: usize, y: Complex64, sigma: f64) -> Complex64 {
    let s2 = sigma * sigma;
    let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), y);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = y * cur - prev * (j as f64 * s2);
        prev = cur;
        cur = next;
    }
    cur
}

/// Coefficient table of the explicit sum
/// `H_k(x) = sum_m (-1)^m k! / (m! (k-2m)! 2^m) x^{k-2m}`.
///
/// Rows up to degree [`EXACT_MAX_DEGREE`] are stored as exact integers.
#[derive(Debug, Clone)]
pub struct HermiteWorkspace {
    k_max: usize,
    exact: Vec<Vec<i64>>,
    float: Vec<Vec<f64>>,
}

impl HermiteWorkspace {
    pub fn new(k_max: usize) -> Self {
        let mut exact = Vec::new();
        let mut float = Vec::new();
        for k in 0..=k_max {
            if k <= EXACT_MAX_DEGREE {
                let row: Vec<i64> = (0..=k / 2)
                    .map(|m| {
                        // k! / (m! (k-2m)! 2^m) counts partial matchings, so it is an integer.
                        let mut num: i128 = 1;
                        for i in (k - 2 * m + 1)..=k {
                            num *= i as i128;
                        }
                        let mut den: i128 = 1 << m;
                        for i in 2..=m {
                            den *= i as i128;
                        }
                        let c = (num / den) as i64;
                        if m % 2 == 0 {
                            c
                        } else {
                            -c
                        }
                    })
                    .collect();
                exact.push(row);
            } else {
                let row: Vec<f64> = (0..=k / 2)
                    .map(|m| {
                        let ln = ln_factorial(k) - ln_factorial(m) - ln_factorial(k - 2 * m)
                            - m as f64 * core::f64::consts::LN_2;
                        let c = ln.exp();
                        if m % 2 == 0 {
                            c
                        } else {
                            -c
                        }
                    })
                    .collect();
                float.push(row);
            }
        }
        HermiteWorkspace { k_max, exact, float }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Coefficient of `x^{k-2m}` in `H_k`.
    pub fn coefficient(&self, k: usize, m: usize) -> f64 {
        assert!(k <= self.k_max && 2 * m <= k);
        if k <= EXACT_MAX_DEGREE {
            self.exact[k][m] as f64
        } else {
            self.float[k - EXACT_MAX_DEGREE - 1][m]
        }
    }

    /// Exact integer row, available for `k <= EXACT_MAX_DEGREE`.
    pub fn exact_row(&self, k: usize) -> Option<&[i64]> {
        self.exact.get(k).map(|r| r.as_slice())
    }

    /// `H_k(x)` from the explicit sum (Horner in `x^2`).
    pub fn explicit(&self, k: usize, x: f64) -> f64 {
        let y = x * x;
        let mut acc = 0.0;
        for m in 0..=k / 2 {
            acc = acc * y + self.coefficient(k, m);
        }
        if k % 2 == 1 {
            acc * x
        } else {
            acc
        }
    }

    /// Sum of the absolute values of the explicit-sum terms at `x`; the
    /// natural scale for judging relative accuracy near roots.
    pub fn explicit_abs(&self, k: usize, x: f64) -> f64 {
        let y = x * x;
        let mut acc = 0.0;
        for m in 0..=k / 2 {
            acc = acc * y + self.coefficient(k, m).abs();
        }
        if k % 2 == 1 {
            acc * x.abs()
        } else {
            acc
        }
    }

    /// `H_k(x)`: exact coefficients for small degrees, recurrence otherwise.
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        if k <= EXACT_MAX_DEGREE.min(self.k_max) {
            self.explicit(k, x)
        } else {
            hermite(k, x)
        }
    }
}

pub fn ln_factorial(n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 2..=n {
        acc += (i as f64).ln();
    }
    acc
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `|sum_{n<=K} t^n/n! H_{k+n}(x) - exp(tx - t^2/2) H_k(x - t)|`.
///
/// With `k = 0` this is the residual of the plain generating function.
pub fn generating_series_residual(t: f64, x: f64, k: usize, big_k: usize) -> f64 {
    let mut h = vec![0.0; k + big_k + 1];
    hermite_all(x, &mut h);
    let mut acc = Compensated::default();
    let mut coeff = 1.0;
    for n in 0..=big_k {
        if n > 0 {
            coeff *= t / n as f64;
        }
        acc.add(coeff * h[k + n]);
    }
    let rhs = (t * x - 0.5 * t * t).exp() * hermite(k, x - t);
    (acc.value() - rhs).abs()
}

/// `max(1, sum_n |t^n/n! H_{k+n}(x)|)` over the same truncation; the natural
/// scale for the residual when `k > 0`, where terms reach 1e5 on `[-3, 3]^2`.
pub fn generating_series_scale(t: f64, x: f64, k: usize, big_k: usize) -> f64 {
    let mut h = vec![0.0; k + big_k + 1];
    hermite_all(x, &mut h);
    let mut abs = 0.0;
    let mut coeff = 1.0;
    for n in 0..=big_k {
        if n > 0 {
            coeff *= t / n as f64;
        }
        abs += (coeff * h[k + n]).abs();
    }
    f64::max(1.0, abs)
}

/// Which of the three umbral identities to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Umbral {
    /// `H_k(rho u + sqrt(1-rho^2) v) = sum_j C(k,j) rho^j (1-rho^2)^{(k-j)/2} H_j(u) H_{k-j}(v)`
    Mix,
    /// `H_k(u + v) = sum_j C(k,j) u^j H_{k-j}(v)`
    Shift,
    /// `H_k(rho u) = sum_i (-1)^i rho^{k-2i} (1-rho^2)^i C(k,2i) (2i)!/(i! 2^i) H_{k-2i}(u)`
    Scale,
}

/// Left side, right side and the sum of absolute right-side terms.
fn umbral_sides(which: Umbral, k: usize, rho: f64, u: f64, v: f64) -> (f64, f64, f64) {
    let mut hu = vec![0.0; k + 1];
    let mut hv = vec![0.0; k + 1];
    hermite_all(u, &mut hu);
    hermite_all(v, &mut hv);
    let mut acc = Compensated::default();
    let mut abs = 0.0;
    let lhs = match which {
        Umbral::Mix => {
            let s = (1.0 - rho * rho).max(0.0).sqrt();
            for j in 0..=k {
                let term = binomial(k, j) * rho.powi(j as i32) * s.powi((k - j) as i32) * hu[j] * hv[k - j];
                acc.add(term);
                abs += term.abs();
            }
            hermite(k, rho * u + s * v)
        }
        Umbral::Shift => {
            for j in 0..=k {
                let term = binomial(k, j) * u.powi(j as i32) * hv[k - j];
                acc.add(term);
                abs += term.abs();
            }
            hermite(k, u + v)
        }
        Umbral::Scale => {
            let q = 1.0 - rho * rho;
            for i in 0..=k / 2 {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let term = sign
                    * rho.powi((k - 2 * i) as i32)
                    * q.powi(i as i32)
                    * binomial(k, 2 * i)
                    * (factorial(2 * i) / factorial(i))
                    * 0.5f64.powi(i as i32)
                    * hu[k - 2 * i];
                acc.add(term);
                abs += term.abs();
            }
            hermite(k, rho * u)
        }
    };
    (lhs, acc.value(), abs)
}

/// Absolute gap between the two sides of an umbral identity. For `Shift` the
/// `rho` argument is ignored; for `Scale` the `v` argument is ignored.
pub fn umbral_residual(which: Umbral, k: usize, rho: f64, u: f64, v: f64) -> Result<f64> {
    check_rho(rho)?;
    let (l, r, _) = umbral_sides(which, k, rho, u, v);
    Ok((l - r).abs())
}

/// Umbral residual divided by `max(1, |lhs|, sum |rhs terms|)`, the scale
/// at which double precision can resolve the identity.
pub fn umbral_residual_scaled(which: Umbral, k: usize, rho: f64, u: f64, v: f64) -> Result<f64> {
    check_rho(rho)?;
    let (l, r, abs) = umbral_sides(which, k, rho, u, v);
    Ok((l - r).abs() / abs.max(l.abs()).max(1.0))
}

fn check_rho(rho: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::param("rho", "must lie in [-1, 1]"));
    }
    Ok(())
}

/// Mehler-type envelope
/// `(1-rho^2)^{-1/4} rho^{-k/2} sqrt(k!) exp(rho x^2 / (2(1+rho)))`
/// and whether `|H_k(x)|` sits below it.
pub fn mehler_bound(k: usize, x: f64, rho: f64) -> Result<(f64, bool)> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", "must lie in (0, 1)"));
    }
    let ln_bound = -0.25 * (1.0 - rho * rho).ln() - 0.5 * k as f64 * rho.ln()
        + 0.5 * ln_factorial(k)
        + rho * x * x / (2.0 * (1.0 + rho));
    let bound = ln_bound.exp();
    Ok((bound, hermite(k, x).abs() <= bound))
}

/// Parameters `(k, gamma, sigma)` of `:Z^k e^{gamma Z}:` for `Z ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WickTriple {
    pub k: usize,
    pub gamma: Complex64,
    pub sigma: f64,
}

impl WickTriple {
    pub fn new(k: usize, gamma: Complex64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", "must be positive and finite"));
        }
        Ok(WickTriple { k, gamma, sigma })
    }

    pub fn real(k: usize, gamma: f64, sigma: f64) -> Result<Self> {
        Self::new(k, Complex64::new(gamma, 0.0), sigma)
    }

    /// Pure Wick power `:Z^k:`.
    pub fn power(k: usize, sigma: f64) -> Result<Self> {
        Self::real(k, 0.0, sigma)
    }
}

/// Evaluation route for [`wick_power_exp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WickMethod {
    /// Shifted Hermite polynomial times the Wick exponential.
    Closed,
    /// `sum_n gamma^n/n! :Z^{n+k}:`.
    Series,
    /// `k`-th `gamma`-derivative of `exp(gamma z) exp(-gamma^2 sigma^2/2)`
    /// from the product of the two Taylor expansions.
    Derivative,
}

/// `:z^k e^{gamma z}:` for a realised value `z` of `Z`.
pub fn wick_power_exp(z: f64, triple: WickTriple, method: WickMethod) -> Complex64 {
    match method {
        WickMethod::Closed => wick_closed(z, triple),
        WickMethod::Series => wick_series(z, triple),
        WickMethod::Derivative => wick_derivative(z, triple),
    }
}

/// `:e^{gamma z}:` with variance `sigma^2`.
pub fn wick_exp(z: f64, gamma: Complex64, sigma: f64) -> Complex64 {
    (gamma * z - gamma * gamma * (0.5 * sigma * sigma)).exp()
}

fn wick_closed(z: f64, t: WickTriple) -> Complex64 {
    let s2 = t.sigma * t.sigma;
    let y = Complex64::new(z, 0.0) - t.gamma * s2;
    scaled_hermite_complex(t.k, y, t.sigma) * wick_exp(z, t.gamma, t.sigma)
}

fn wick_series(z: f64, t: WickTriple) -> Complex64 {
    let s2 = Dd::from_f64(t.sigma) * Dd::from_f64(t.sigma);
    let zd = Dd::from_f64(z);
    let gamma = CDd::new(t.gamma.re, t.gamma.im);
    let g_abs = t.gamma.norm();

    // P_m = sigma^m H_m(z/sigma), advanced to m = k first.
    let (mut p_prev, mut p_cur) = (Dd::ONE, zd);
    let mut p_m = 0usize;
    let advance = |p_prev: &mut Dd, p_cur: &mut Dd, m: &mut usize| {
        let next = zd * *p_cur + (s2.mul_f64(*m as f64 + 1.0) * *p_prev).neg();
        *p_prev = *p_cur;
        *p_cur = next;
        *m += 1;
    };
    // Invariant: p_prev = P_{p_m}, p_cur = P_{p_m + 1}.
    while p_m < t.k {
        advance(&mut p_prev, &mut p_cur, &mut p_m);
    }

    // Envelope from the Mehler bound at rho = 1/2.
    let x = z / t.sigma;
    let ln_pref = -0.25 * 0.75f64.ln() + x * x / 6.0;
    let ln_env = |n: usize| {
        let m = n + t.k;
        let ln_g = if g_abs > 0.0 { n as f64 * g_abs.ln() } else if n == 0 { 0.0 } else { f64::NEG_INFINITY };
        ln_g - ln_factorial(n)
            + m as f64 * (t.sigma.ln() + 0.5 * core::f64::consts::LN_2)
            + 0.5 * ln_factorial(m)
            + ln_pref
    };

    let mut coeff = CDd::new(1.0, 0.0);
    let mut sum = CDd::new(0.0, 0.0);
    for n in 0..SERIES_MAX_TERMS {
        if n > 0 {
            coeff = coeff.mul(gamma).div_f64(n as f64);
            advance(&mut p_prev, &mut p_cur, &mut p_m);
        }
        sum = sum.add(coeff.scale(p_prev));
        if g_abs == 0.0 {
            break;
        }
        let m = n + 1 + t.k;
        let ratio = g_abs * t.sigma * core::f64::consts::SQRT_2 * (m as f64).sqrt() / (n + 1) as f64;
        if ratio < 0.5 && ln_env(n + 1) < (SERIES_REL_TOL * 0.1 * sum.norm_f64()).ln() {
            break;
        }
    }
    Complex64::new(sum.re.to_f64(), sum.im.to_f64())
}

fn wick_derivative(z: f64, t: WickTriple) -> Complex64 {
    let s2 = t.sigma * t.sigma;
    // Taylor coefficients a_j of exp(-s2 g h - s2 h^2/2) in h:
    // (j+1) a_{j+1} = -s2 (g a_j + a_{j-1}).
    let mut a = vec![Complex64::new(0.0, 0.0); t.k + 1];
    a[0] = Complex64::new(1.0, 0.0);
    for j in 0..t.k {
        let prev = if j > 0 { a[j - 1] } else { Complex64::new(0.0, 0.0) };
        a[j + 1] = -(t.gamma * a[j] + prev) * s2 / (j + 1) as f64;
    }
    // k-th Taylor coefficient of the product with exp(z h).
    let mut coeff = Complex64::new(0.0, 0.0);
    let mut zpow = 1.0;
    for i in 0..=t.k {
        // i = k - j
        let j = t.k - i;
        coeff += a[j] * (zpow / factorial(i));
        zpow *= z;
    }
    coeff * factorial(t.k) * wick_exp(z, t.gamma, t.sigma)
}

/// Second argument of [`gauss_expect_hermite`] for the two-point formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitePair {
    pub sigma2: f64,
    pub m2: f64,
    pub rho: f64,
}

/// Closed forms for Gaussian expectations of shifted, scaled Hermite
/// polynomials. Without `pair`:
/// `E[H_k(sigma X + m)] = (1-sigma^2)^{k/2} H_k(m / sqrt(1-sigma^2))`.
/// With `pair`, `E[H_k(sigma1 X1 + m1) H_k(sigma2 X2 + m2)]` where
/// `(X1, X2)` are standard with correlation `rho`.
pub fn gauss_expect_hermite(k: usize, sigma1: f64, m1: f64, pair: Option<HermitePair>) -> Result<f64> {
    if !(sigma1.abs() < 1.0) {
        return Err(Error::param("sigma1", "must satisfy |sigma1| < 1"));
    }
    let q1 = 1.0 - sigma1 * sigma1;
    match pair {
        None => Ok(q1.powf(0.5 * k as f64) * hermite(k, m1 / q1.sqrt())),
        Some(HermitePair { sigma2, m2, rho }) => {
            if !(sigma2.abs() < 1.0) {
                return Err(Error::param("sigma2", "must satisfy |sigma2| < 1"));
            }
            check_rho(rho)?;
            let q2 = 1.0 - sigma2 * sigma2;
            let mut h1 = vec![0.0; k + 1];
            let mut h2 = vec![0.0; k + 1];
            hermite_all(m1 / q1.sqrt(), &mut h1);
            hermite_all(m2 / q2.sqrt(), &mut h2);
            let kf = factorial(k);
            let mut acc = Compensated::default();
            for l in 0..=k {
                let d = k - l;
                let comb = kf * kf / (factorial(l) * factorial(d) * factorial(d));
                let term = (q1 * q2).powf(0.5 * d as f64)
                    * (rho * sigma1 * sigma2).powi(l as i32)
                    * comb
                    * h1[d]
                    * h2[d];
                acc.add(term);
            }
            Ok(acc.value())
        }
    }
}

/// `E[:X^j e^{g1 X}: :Y^k e^{g2 Y}:]` for jointly Gaussian `(X, Y)` with
/// covariance `cov`, summed as
/// `sum_{n+j = m+k} g1^n g2^m / (n! m!) (n+j)! cov^{n+j}`.
pub fn wick_pair_moment(j: usize, k: usize, g1: Complex64, g2: Complex64, cov: f64, trunc_tol: f64) -> Result<Complex64> {
    if !(trunc_tol > 0.0) {
        return Err(Error::param("trunc_tol", "must be positive"));
    }
    let p0 = j.max(k);
    // term at p = p0
    let pow_c = |b: Complex64, e: usize| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..e {
            acc *= b;
        }
        acc
    };
    let mut term = pow_c(g1, p0 - j) * pow_c(g2, p0 - k)
        * (factorial(p0) / (factorial(p0 - j) * factorial(p0 - k)))
        * cov.powi(p0 as i32);
    let g12c = g1 * g2 * cov;
    let mut sum = term;
    let mut p = p0;
    const CAP: usize = 4000;
    while p < p0 + CAP {
        let ratio_f = (p + 1) as f64 / (((p + 1 - j) * (p + 1 - k)) as f64);
        term *= g12c * ratio_f;
        sum += term;
        p += 1;
        let ratio = g12c.norm() * ratio_f;
        if term.norm() <= trunc_tol * sum.norm() && ratio < 0.5 {
            break;
        }
        if term == Complex64::new(0.0, 0.0) {
            break;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests;
