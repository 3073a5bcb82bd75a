//! Experiment runners. Each returns a [`RunReport`] plus plot-ready
//! artifacts; nothing is written until [`write_outputs`].

mod analytic;
mod chaos;
mod sampling;

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use anyhow::Context;
use gmc_core::field::{FieldSampler, GridSpec, Regularization};
use gmc_core::kernels::{FieldParams, SeedKernel};

use crate::config::{ExperimentConfig, FieldConfig, Kind, RegKind};
use crate::report::{EnvStamp, RowSink, RunReport};

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, s: String) -> Artifact {
        Artifact { name: name.into(), contents: s.into_bytes() }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

/// Replica `i` always runs with seed `split(base, i)`; results come back in
/// index order whatever the scheduling.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(threads: usize) -> anyhow::Result<Pool> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Pool { pool })
    }

    pub fn map<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        use rayon::prelude::*;
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }

    pub fn try_map<T: Send>(&self, n: usize, f: impl Fn(usize) -> anyhow::Result<T> + Sync + Send) -> anyhow::Result<Vec<T>> {
        self.map(n, f).into_iter().collect()
    }
}

pub fn replica_seed(base: u64, i: usize) -> u64 {
    gmc_core::rng::split(base, i as u64)
}

/// Seed kernels are deterministic and slow to build; share them per process.
pub fn seed_kernel(dim: usize, resolution: usize) -> anyhow::Result<Arc<SeedKernel>> {
    type Cache = Mutex<HashMap<(usize, usize), Arc<SeedKernel>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(k) = cache.lock().unwrap().get(&(dim, resolution)) {
        return Ok(k.clone());
    }
    let k = Arc::new(SeedKernel::build(dim, resolution)?);
    cache.lock().unwrap().insert((dim, resolution), k.clone());
    Ok(k)
}

pub fn field_params(f: &FieldConfig) -> anyhow::Result<FieldParams> {
    Ok(FieldParams::new(f.alpha, f.frak_a, seed_kernel(f.dim, f.kernel_resolution)?)?)
}

pub fn build_sampler(f: &FieldConfig) -> anyhow::Result<Arc<FieldSampler>> {
    let grid = GridSpec::new(f.dim, f.m)?;
    Ok(Arc::new(FieldSampler::new(field_params(f)?, grid, f.t_max, f.delta_u)?))
}

/// Regularisation at scale `e^{-n}` under the configured kind (truncated by
/// default).
pub fn regularization(cfg: &ExperimentConfig, n: f64) -> Regularization {
    match cfg.schedule.regularization {
        Some(RegKind::Mollified) => Regularization::Mollified((-n).exp()),
        _ => Regularization::Truncated(n),
    }
}

pub fn repro_command(cfg: &ExperimentConfig) -> String {
    format!("gmc-lab {} --config config.toml", cfg.kind.name())
}

/// Runs the configured experiment on `threads` workers.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> anyhow::Result<Outcome> {
    cfg.validate()?;
    let pool = Pool::new(threads)?;
    let mut sink = RowSink::new(repro_command(cfg));
    let artifacts = match cfg.kind {
        Kind::Identities => analytic::identities(cfg, &mut sink)?,
        Kind::Covcheck => analytic::covcheck(cfg, &mut sink)?,
        Kind::ToyMartingale => analytic::toy(cfg, &pool, &mut sink)?,
        Kind::Sample => sampling::sample(cfg, &pool, &mut sink)?,
        Kind::Thickness => sampling::thickness(cfg, &pool, &mut sink)?,
        Kind::GmcMoments => chaos::moments(cfg, &pool, &mut sink)?,
        Kind::SeriesCheck => chaos::series(cfg, &pool, &mut sink)?,
        Kind::GrowthReport => chaos::growth(cfg, &pool, &mut sink)?,
        Kind::Badmass => chaos::badmass(cfg, &pool, &mut sink)?,
    };
    let report = RunReport {
        experiment: cfg.kind.name().into(),
        env: EnvStamp::current(),
        config: cfg.to_toml(),
        rows: sink.rows,
    };
    Ok(Outcome { report, artifacts })
}

/// Writes the report in every format, the config echo and all artifacts.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let r = &outcome.report;
    let files = [
        ("report.json", r.to_json().into_bytes()),
        ("report.csv", r.to_csv().into_bytes()),
        ("summary.md", r.to_markdown().into_bytes()),
        ("config.toml", r.config.clone().into_bytes()),
    ];
    for (name, bytes) in files.iter().map(|(n, b)| (*n, b)).chain(outcome.artifacts.iter().map(|a| (a.name.as_str(), &a.contents))) {
        let path = dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Least-squares slope with the standard error implied by independent
/// per-point errors.
pub(crate) fn weighted_slope(xs: &[f64], ys: &[f64], ses: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let w: Vec<f64> = xs.iter().map(|x| (x - mx) / sxx).collect();
    let slope = w.iter().zip(ys).map(|(w, y)| w * y).sum();
    let se = w.iter().zip(ses).map(|(w, s)| w * w * s * s).sum::<f64>().sqrt();
    (slope, se)
}
