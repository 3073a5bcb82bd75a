//! GMC-derivative estimators: moments, the pathwise series, coefficient
//! growth and the good/bad split.

use std::f64::consts::TAU;

use anyhow::ensure;
use gmc_core::events::{failure_from_fields, partition_counts, representative_sites, split_good_bad, GoodEventConfig};
use gmc_core::field::{FieldSampler, Regularization, View};
use gmc_core::gmc::{
    abs_coefficients, direct_complex, disc_radius, estimate_i, eye_contains, growth_rows, moment_oracle, series_eval,
    GridField, MomentMode, TestFunction,
};
use gmc_core::stats::{ls_slope, MeanSe};
use gmc_core::Complex64;

use super::{build_sampler, regularization, replica_seed, Artifact, Pool};
use crate::config::ExperimentConfig;
use crate::report::RowSink;

fn test_function(cfg: &ExperimentConfig, s: &FieldSampler) -> anyhow::Result<TestFunction> {
    let t = &cfg.gmc.test_function;
    Ok(TestFunction::smoothed_indicator(s.grid(), t.lo, t.hi, t.ramp)?)
}

fn reg_label(r: Regularization) -> &'static str {
    match r {
        Regularization::Truncated(_) => "truncated",
        Regularization::Mollified(_) => "mollified",
        Regularization::TruncatedMollified(..) => "truncated-mollified",
    }
}

pub fn moments(cfg: &ExperimentConfig, pool: &Pool, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    let s = build_sampler(cfg.field()?)?;
    let f = test_function(cfg, &s)?;
    let n = cfg.schedule.log_eps[0];
    let eps = (-n).exp();
    let reg = regularization(cfg, n);
    let view = s.view(reg)?;
    let sigma = s.variance(&view)?.sqrt();
    let cov = s.covariance(&view)?;
    let (gammas, ks) = (&cfg.gmc.gamma, &cfg.gmc.k);
    // values[replica][gamma][k]
    let values = pool.try_map(cfg.replicas, |i| {
        let x = s.sample(replica_seed(cfg.seed, i)).views(std::slice::from_ref(&view))?.remove(0);
        let x = GridField::new(s.grid(), &x)?;
        gammas
            .iter()
            .map(|g| ks.iter().map(|k| Ok(estimate_i(&f, x, *k, Complex64::new(*g, 0.0), sigma)?)).collect())
            .collect::<anyhow::Result<Vec<Vec<Complex64>>>>()
    })?;
    let mut csv = String::from("epsilon,regularization,gamma,k,replica,seed,re,im\n");
    for (gi, g) in gammas.iter().enumerate() {
        let gamma = Complex64::new(*g, 0.0);
        for (ki, k) in ks.iter().enumerate() {
            let xs: Vec<f64> = values.iter().map(|v| v[gi][ki].re).collect();
            let sq: Vec<f64> = values.iter().map(|v| v[gi][ki].norm_sqr()).collect();
            let m = MeanSe::of(&xs);
            let mean = moment_oracle(MomentMode::Mean { k: *k }, &f, gamma, &cov)?.re;
            sink.within_se(format!("gmc.mean.gamma{g}.k{k}"), "Wick mean", mean, m.mean, m.se, 3.0);
            let m2 = MeanSe::of(&sq);
            let second = moment_oracle(MomentMode::Second { k: *k }, &f, gamma, &cov)?.re;
            sink.within_se(format!("gmc.second.gamma{g}.k{k}"), "Gaussian pairing on grid covariance", second, m2.mean, m2.se, 4.0);
            for (i, v) in values.iter().enumerate() {
                let z = v[gi][ki];
                csv.push_str(&format!(
                    "{eps:.11e},{},{g},{k},{i},{},{:.11e},{:.11e}\n",
                    reg_label(reg),
                    replica_seed(cfg.seed, i),
                    z.re,
                    z.im
                ));
            }
        }
    }
    Ok(vec![Artifact::text("estimates.csv", csv)])
}

/// Relative gap between the series and the direct evaluation.
const SERIES_TOL: f64 = 1e-6;

pub fn series(cfg: &ExperimentConfig, pool: &Pool, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    let s = build_sampler(cfg.field()?)?;
    let d = s.grid().dim;
    let f = test_function(cfg, &s)?;
    let n = cfg.schedule.log_eps[0];
    let view = s.view(regularization(cfg, n))?;
    let sigma = s.variance(&view)?.sqrt();
    let circle = cfg.gmc.circle.as_ref().expect("validated");
    let tol = cfg.gmc.series_tol.unwrap_or(1e-15);
    let mut targets = Vec::new();
    for &g in &cfg.gmc.gamma {
        let radius = match (circle.radius, circle.radius_frac) {
            (Some(r), _) => r,
            (_, Some(q)) => q * disc_radius(g, d)?,
            _ => unreachable!(),
        };
        for j in 0..circle.points {
            let gp = Complex64::new(g, 0.0) + Complex64::from_polar(radius, TAU * j as f64 / circle.points as f64);
            ensure!(eye_contains(gp, d), "gamma' = {gp} lies outside the eye domain");
            targets.push((g, gp));
        }
    }
    // gaps[replica][target] = (relative gap, terms used)
    let gaps = pool.try_map(cfg.replicas, |i| {
        let x = s.sample(replica_seed(cfg.seed, i)).views(std::slice::from_ref(&view))?.remove(0);
        let x = GridField::new(s.grid(), &x)?;
        targets
            .iter()
            .map(|(g, gp)| {
                let (v, terms) = series_eval(&f, x, *g, *gp, sigma, tol)?;
                let direct = direct_complex(&f, x, *gp, sigma)?;
                Ok(((v - direct).norm() / direct.norm(), terms))
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    let mut csv = String::from("replica,gamma,gamma_prime_re,gamma_prime_im,rel_gap,terms\n");
    for (i, row) in gaps.iter().enumerate() {
        for ((g, gp), (gap, terms)) in targets.iter().zip(row) {
            csv.push_str(&format!("{i},{g},{:.11e},{:.11e},{gap:.11e},{terms}\n", gp.re, gp.im));
        }
    }
    for &g in &cfg.gmc.gamma {
        let worst = gaps
            .iter()
            .flat_map(|row| targets.iter().zip(row).filter(|(t, _)| t.0 == g).map(|(_, r)| r.0))
            .fold(0.0f64, f64::max);
        sink.below(format!("series.gamma{g}.max_rel_gap"), "direct complex evaluation", worst, SERIES_TOL);
    }
    Ok(vec![Artifact::text("series_gaps.csv", csv)])
}

/// Accepted least-squares slope of log-normalised norm against `k`.
const GROWTH_SLOPE_TOL: f64 = 0.1;

pub fn growth(cfg: &ExperimentConfig, pool: &Pool, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    let s = build_sampler(cfg.field()?)?;
    let d = s.grid().dim;
    let f = test_function(cfg, &s)?;
    let gamma = cfg.gmc.gamma[0];
    let eta = cfg.gmc.eta.expect("validated");
    let k_max = cfg.gmc.k_max.expect("validated");
    let levels = &cfg.schedule.log_eps;
    let views = levels.iter().map(|n| s.view(regularization(cfg, *n))).collect::<Result<Vec<View>, _>>()?;
    let sigmas = views.iter().map(|v| Ok(s.variance(v)?.sqrt())).collect::<anyhow::Result<Vec<f64>>>()?;
    let samples = pool.try_map(cfg.replicas, |i| {
        let fields = s.sample(replica_seed(cfg.seed, i)).views(&views)?;
        fields
            .iter()
            .zip(&sigmas)
            .map(|(x, sig)| Ok(abs_coefficients(&f, GridField::new(s.grid(), x)?, gamma, *sig, k_max)?))
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    let eps: Vec<f64> = levels.iter().map(|n| (-n).exp()).collect();
    let rows = growth_rows(&eps, &samples, gamma, d, eta)?;
    let mut csv = String::from("epsilon,k,mean_abs,se,normalized,normalized_se,n_replicas\n");
    for r in &rows {
        csv.push_str(&format!(
            "{:.11e},{},{:.11e},{:.11e},{:.11e},{:.11e},{}\n",
            r.epsilon, r.k, r.mean_abs, r.se, r.normalized, r.normalized_se, cfg.replicas
        ));
    }
    let finest = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let fine: Vec<_> = rows.iter().filter(|r| r.epsilon == finest).collect();
    let ks: Vec<f64> = fine.iter().map(|r| r.k as f64).collect();
    let logs: Vec<f64> = fine.iter().map(|r| r.normalized.ln()).collect();
    let slope = ls_slope(&ks, &logs);
    sink.close("growth.finest.log_normalized_slope", "bounded coefficients", 0.0, slope, f64::NAN, GROWTH_SLOPE_TOL);
    for r in &fine {
        sink.push(format!("growth.finest.k{}.normalized", r.k), "table entry", f64::NAN, r.normalized, r.normalized_se,
                  f64::NAN, r.normalized.is_finite());
    }
    Ok(vec![Artifact::text("growth.csv", csv)])
}

pub fn badmass(cfg: &ExperimentConfig, pool: &Pool, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    let s = build_sampler(cfg.field()?)?;
    let grid = s.grid();
    let f = test_function(cfg, &s)?;
    let n_eps = cfg.schedule.log_eps[0];
    ensure!(n_eps.fract() == 0.0, "invariant `schedule.log_eps integral for badmass` violated");
    let n_fine = n_eps as usize;
    let gamma = cfg.gmc.gamma[0];
    let k = cfg.gmc.k[0];
    let deltas = &cfg.schedule.log_delta;
    let n0_min = *deltas.iter().min().expect("validated");
    let cfgs = deltas
        .iter()
        .map(|n0| match cfg.gmc.gamma_hat {
            Some(gh) => GoodEventConfig::new(gh, *n0, n_fine),
            None => GoodEventConfig::with_default_slope(gamma, grid.dim, *n0, n_fine),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let gamma_hat = cfgs[0].gamma_hat;
    let eps_view = s.view(regularization(cfg, n_eps))?;
    let sigma = s.variance(&eps_view)?.sqrt();
    let mut views = vec![eps_view];
    for n in n0_min..=n_fine {
        views.push(s.view(Regularization::Truncated(n as f64))?);
    }
    let reps: Vec<Vec<Vec<usize>>> = cfgs.iter().map(|c| representative_sites(grid, c)).collect();

    struct Rep {
        bad: Vec<f64>,
        partition_ok: bool,
        reassembly: f64,
    }
    let per = pool.try_map(cfg.replicas, |i| {
        let fields = s.sample(replica_seed(cfg.seed, i)).views(&views)?;
        let x = GridField::new(grid, &fields[0])?;
        let mut out = Rep { bad: Vec::new(), partition_ok: true, reassembly: 0.0 };
        for (c, r) in cfgs.iter().zip(&reps) {
            let scales = &fields[1 + c.n0 - n0_min..];
            let map = failure_from_fields(scales, r, c);
            out.partition_ok &= partition_counts(&map, c).iter().sum::<usize>() == map.len();
            let gb = split_good_bad(&f, x, &map, k, Complex64::new(gamma, 0.0), sigma)?;
            out.reassembly = out.reassembly.max(gb.reassembly_error() / gb.rounding_bound.max(f64::MIN_POSITIVE));
            out.bad.push(gb.bad.norm());
        }
        anyhow::Ok(out)
    })?;
    let broken = per.iter().filter(|r| !r.partition_ok).count();
    sink.below("badmass.partition.broken_replicas", "exact partition", broken as f64, 0.0);
    let worst = per.iter().map(|r| r.reassembly).fold(0.0f64, f64::max);
    sink.below("badmass.reassembly.error_over_rounding_bound", "good + bad = total", worst, 1.0);

    let eps = (-n_eps).exp();
    let mut csv = String::from("delta,epsilon,k,gamma,gamma_hat,mean_abs_bad,se,n_replicas\n");
    let cols: Vec<Vec<f64>> = (0..deltas.len()).map(|j| per.iter().map(|r| r.bad[j]).collect()).collect();
    for (j, n0) in deltas.iter().enumerate() {
        let m = MeanSe::of(&cols[j]);
        let delta = (-(*n0 as f64)).exp();
        csv.push_str(&format!(
            "{delta:.11e},{eps:.11e},{k},{gamma},{gamma_hat:.11e},{:.11e},{:.11e},{}\n",
            m.mean, m.se, cfg.replicas
        ));
    }
    // Paired comparison of consecutive deltas on the same replicas.
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by_key(|j| deltas[*j]);
    for w in order.windows(2) {
        let diff: Vec<f64> = cols[w[0]].iter().zip(&cols[w[1]]).map(|(a, b)| a - b).collect();
        let m = MeanSe::of(&diff);
        sink.push(
            format!("badmass.decrease.delta_e-{}_to_e-{}", deltas[w[0]], deltas[w[1]]),
            "paired difference beyond 1 SE",
            0.0,
            m.mean,
            m.se,
            m.se,
            m.mean > m.se,
        );
    }
    Ok(vec![Artifact::text("badmass.csv", csv)])
}
