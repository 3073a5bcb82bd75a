//! Deterministic identity checks and the Brownian toy model.

use std::f64::consts::{PI, TAU};

use gmc_core::events::toy_martingale_stat;
use gmc_core::hermite::{
    gauss_expect_hermite, generating_series_residual, generating_series_scale, hermite, mehler_bound,
    umbral_residual_scaled, wick_power_exp, HermitePair, Umbral, WickMethod, WickTriple,
};
use gmc_core::kernels::{
    cov_star, log_defect, scaling_check, sigma_sq, FieldParams, Mollifier, LOG_DEFECT_BOUND, SPECTRAL_FLOOR,
};
use gmc_core::quadrature::Rule;
use gmc_core::rng;
use gmc_core::Complex64;
use rand::Rng;

use super::{seed_kernel, weighted_slope, Artifact, Pool};
use crate::config::ExperimentConfig;
use crate::formats::table_csv;
use crate::report::RowSink;

const GENERATING_TERMS: usize = 60;
const GENERATING_TOL: f64 = 1e-12;
const UMBRAL_TRIPLES: usize = 100;
const UMBRAL_TOL: f64 = 1e-10;
const MEHLER_TRIPLES: usize = 10_000;
const GAUSS_TUPLES: usize = 50;
const GAUSS_TOL: f64 = 1e-8;
const WICK_EVALS: usize = 1000;
const WICK_TOL: f64 = 1e-9;

fn grid7() -> impl Iterator<Item = f64> {
    (0..7).map(|i| -3.0 + i as f64)
}

pub fn identities(cfg: &ExperimentConfig, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    // Generating functions on the 7x7 (t, x) grid.
    for k in 0..=3 {
        let mut worst = 0.0f64;
        for t in grid7() {
            for x in grid7() {
                let r = generating_series_residual(t, x, k, GENERATING_TERMS);
                let r = if k == 0 { r } else { r / generating_series_scale(t, x, k, GENERATING_TERMS) };
                worst = worst.max(r);
            }
        }
        let kind = if k == 0 { "exact exponential" } else { "exact exponential, relative to term mass" };
        sink.below(format!("hermite.generating.k{k}.max_residual"), kind, worst, GENERATING_TOL);
    }

    let mut g = rng::stream(cfg.seed, 1);
    let mut worst = [0.0f64; 3];
    for _ in 0..UMBRAL_TRIPLES {
        let k = g.random_range(0..=20);
        let rho = g.random_range(-1.0..1.0);
        let (u, v) = (g.random_range(-3.0..3.0), g.random_range(-3.0..3.0));
        for (w, which) in worst.iter_mut().zip([Umbral::Mix, Umbral::Shift, Umbral::Scale]) {
            *w = w.max(umbral_residual_scaled(which, k, rho, u, v)?);
        }
    }
    for (w, name) in worst.iter().zip(["mix", "shift", "scale"]) {
        sink.below(format!("hermite.umbral.{name}.max_residual"), "expansion identity", *w, UMBRAL_TOL);
    }

    let mut g = rng::stream(cfg.seed, 2);
    let mut violations = 0usize;
    for _ in 0..MEHLER_TRIPLES {
        let k = g.random_range(0..=20);
        let x = g.random_range(-6.0..6.0);
        let rho = g.random_range(0.001..0.999);
        if !mehler_bound(k, x, rho)?.1 {
            violations += 1;
        }
    }
    sink.below("hermite.mehler.violations", "Mehler bound", violations as f64, 0.0);

    let rule = Rule::gauss_hermite(64);
    let mut g = rng::stream(cfg.seed, 3);
    let (mut one, mut two) = (0.0f64, 0.0f64);
    for _ in 0..GAUSS_TUPLES {
        let s1 = g.random_range(-0.95..0.95);
        let m1 = g.random_range(-3.0..3.0);
        let pair = HermitePair { sigma2: g.random_range(-0.95..0.95), m2: g.random_range(-3.0..3.0), rho: g.random_range(-1.0..=1.0) };
        let q = (1.0 - pair.rho * pair.rho).max(0.0).sqrt();
        for k in 0..=8 {
            let quad = rule.apply(|x| hermite(k, s1 * x + m1));
            one = one.max((gauss_expect_hermite(k, s1, m1, None)? - quad).abs());
            let quad = rule.apply(|x1| {
                let inner = rule.apply(|z| hermite(k, pair.sigma2 * (pair.rho * x1 + q * z) + pair.m2));
                hermite(k, s1 * x1 + m1) * inner
            });
            two = two.max((gauss_expect_hermite(k, s1, m1, Some(pair))? - quad).abs());
        }
    }
    sink.below("hermite.expect.single.max_abs_gap", "64-node Gauss-Hermite", one, GAUSS_TOL);
    sink.below("hermite.expect.pair.max_abs_gap", "64x64 Gauss-Hermite", two, GAUSS_TOL);

    let mut g = rng::stream(cfg.seed, 4);
    let (mut series, mut deriv) = (0.0f64, 0.0f64);
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    for _ in 0..WICK_EVALS {
        let k = g.random_range(0..=10);
        let sigma = g.random_range(0.2..3.0);
        let gamma = Complex64::from_polar(g.random_range(0.0..=4.0) / sigma, g.random_range(0.0..TAU));
        let z = g.random_range(-6.0..=6.0) * sigma;
        let t = WickTriple::new(k, gamma, sigma)?;
        let a = wick_power_exp(z, t, WickMethod::Closed);
        series = series.max(rel(a, wick_power_exp(z, t, WickMethod::Series)));
        deriv = deriv.max(rel(a, wick_power_exp(z, t, WickMethod::Derivative)));
    }
    sink.below("wick.closed_vs_series.max_rel_gap", "series expansion", series, WICK_TOL);
    sink.below("wick.closed_vs_derivative.max_rel_gap", "derivative in gamma", deriv, WICK_TOL);
    Ok(Vec::new())
}

pub fn covcheck(cfg: &ExperimentConfig, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    let res = cfg.field.as_ref().map_or(4096, |f| f.kernel_resolution);
    let seeds = [seed_kernel(1, res)?, seed_kernel(2, res)?];
    let mut artifacts = Vec::new();
    for s in &seeds {
        let d = s.dim();
        sink.push(format!("kernel.d{d}.spectral_min"), "DFT of table", SPECTRAL_FLOOR, s.spectral_min(), f64::NAN, 0.0,
                  s.spectral_min() >= SPECTRAL_FLOOR);
        sink.push(format!("kernel.d{d}.decay_slope"), "log-log envelope fit", -((d + 1) as f64), s.decay_slope(),
                  f64::NAN, 0.0, s.decay_slope() < -((d + 1) as f64));
        artifacts.push(Artifact::text(&format!("kernel_d{d}.csv"), table_csv(s.rows())));
        let m = Mollifier::build(d, 1024)?;
        artifacts.push(Artifact::text(&format!("mollifier_d{d}.csv"), table_csv(m.rows())));
    }

    let mut g = rng::stream(cfg.seed, 1);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let p = FieldParams::new(g.random_range(0.2..3.0), g.random_range(0.0..=1.0), seeds[i % 2].clone())?;
        let t = g.random_range(0.0..8.0);
        worst = worst.max((sigma_sq(&p, t) - cov_star(&p, t, t, 0.0)).abs());
    }
    sink.below("cov.sigma_sq.max_gap", "adaptive quadrature", worst, 1e-9);

    for s in &seeds {
        for a in [0.0, 0.5, 1.0] {
            let mut worst = 0.0f64;
            for alpha in [1.0, 2.0] {
                let p = FieldParams::new(alpha, a, s.clone())?;
                for n in 2..=9 {
                    worst = worst.max(log_defect(&p, (-(n as f64)).exp()).abs());
                }
            }
            sink.below(format!("cov.log_defect.d{}.a{a}", s.dim()), "frozen constant", worst, LOG_DEFECT_BOUND);
        }
    }

    let mut g = rng::stream(cfg.seed, 2);
    let mut worst = 0.0f64;
    for i in 0..30 {
        let p = FieldParams::new(g.random_range(0.2..3.0), g.random_range(0.0..=1.0), seeds[i % 2].clone())?;
        let t0 = g.random_range(0..=16) as f64 * 0.25;
        let t = t0 + g.random_range(0.0..4.0);
        worst = worst.max(scaling_check(&p, t0, t, 0.25, &[g.random_range(0.0..1.2)])?);
    }
    sink.below("cov.scaling.max_defect", "rescaled covariance", worst, 1e-8);
    Ok(artifacts)
}

/// Standard normal CDF at 1.
const PHI_1: f64 = 0.841_344_746_068_542_9;

pub fn toy(cfg: &ExperimentConfig, pool: &Pool, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    let toy = &cfg.toy;
    let n = cfg.replicas;
    for &k in &toy.anchors {
        let oracle = match k {
            0 => PHI_1,
            1 => -(-0.5f64).exp() / (2.0 * PI).sqrt(),
            _ => anyhow::bail!("invariant `toy.anchors in {{0, 1}}` violated"),
        };
        let (m, se) = toy_martingale_stat(k, 1, n, super::replica_seed(cfg.seed, 1000 + k))?;
        sink.within_se(format!("toy.anchor.k{k}"), "Gaussian partial expectation", oracle, m, se, 3.0);
    }
    let k = toy.k;
    let stats = pool.try_map(toy.horizons.len(), |i| {
        Ok(toy_martingale_stat(k, toy.horizons[i], n, super::replica_seed(cfg.seed, toy.horizons[i]))?)
    })?;
    let mut csv = String::from("k,T,estimate,se,n_replicas\n");
    let bound = toy.bound.unwrap_or(f64::INFINITY);
    for (&t, &(m, se)) in toy.horizons.iter().zip(&stats) {
        sink.below(format!("toy.k{k}.T{t}.abs"), "uniform bound", m.abs(), bound);
        csv.push_str(&format!("{k},{t},{m:.11e},{se:.11e},{n}\n"));
    }
    if toy.horizons.len() >= 2 {
        let xs: Vec<f64> = toy.horizons.iter().map(|t| (*t as f64).ln()).collect();
        let ys: Vec<f64> = stats.iter().map(|s| s.0).collect();
        let ses: Vec<f64> = stats.iter().map(|s| s.1).collect();
        let (slope, se) = weighted_slope(&xs, &ys, &ses);
        sink.within_se(format!("toy.k{k}.trend_in_log_T"), "no trend", 0.0, slope, se, 3.0);
    }
    Ok(vec![Artifact::text("toy_martingale.csv", csv)])
}
