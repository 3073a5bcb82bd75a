//! Sampler fidelity and thick points.

use gmc_core::field::{Regularization, View, CLIP_BUDGET};
use gmc_core::kernels::cov_star;
use gmc_core::stats::{covariance_jackknife, median};

use super::{build_sampler, replica_seed, Artifact, Pool};
use crate::config::ExperimentConfig;
use crate::formats::Snapshot;
use crate::report::RowSink;

/// Offsets (in grid steps along the first axis) of the probe pairs.
const PROBE_OFFSETS: [usize; 12] = [0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144];
/// Layer pairs whose cross-covariance must vanish.
const LAYER_PAIRS: [(usize, usize); 6] = [(0, 1), (2, 9), (5, 6), (10, 20), (15, 16), (30, 31)];
const BASE_SITE: usize = 17;

pub fn sample(cfg: &ExperimentConfig, pool: &Pool, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    let fc = cfg.field()?;
    let s = build_sampler(fc)?;
    let grid = s.grid();
    let stride = if grid.dim == 1 { 1 } else { grid.m };
    let nb = s.bands().len();
    let pairs: Vec<(usize, usize)> = LAYER_PAIRS.iter().copied().filter(|p| p.1 < nb).collect();
    let probes: Vec<usize> = PROBE_OFFSETS.iter().copied().filter(|o| *o < grid.m).collect();
    let full = s.view(Regularization::Truncated(fc.t_max))?;
    let mut views = vec![full];
    let mut layer_ids: Vec<usize> = pairs.iter().flat_map(|p| [p.0, p.1]).collect();
    layer_ids.sort_unstable();
    layer_ids.dedup();
    views.extend(layer_ids.iter().map(|j| View::layer(*j)));

    // Per replica: field at the base site and every probe, then layers at
    // the base site.
    let rows = pool.try_map(cfg.replicas, |i| {
        let f = s.sample(replica_seed(cfg.seed, i)).views(&views)?;
        let mut out: Vec<f64> = probes.iter().map(|o| f[0][(BASE_SITE + o * stride) % grid.points()]).collect();
        out.extend(f[1..].iter().map(|l| l[BASE_SITE]));
        anyhow::Ok(out)
    })?;
    let col = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };

    let base = col(0);
    let mut csv = String::from("offset,r,oracle,estimate,se\n");
    for (c, o) in probes.iter().enumerate() {
        let r = *o as f64 * grid.spacing();
        let (est, se) = covariance_jackknife(&base, &col(c));
        let oracle = cov_star(s.params(), fc.t_max, fc.t_max, r);
        sink.within_se(format!("sampler.cov.offset{o}"), "covariance quadrature", oracle, est, se, 3.0);
        csv.push_str(&format!("{o},{r:.11e},{oracle:.11e},{est:.11e},{se:.11e}\n"));
    }
    let layer_col = |j: usize| col(probes.len() + layer_ids.iter().position(|x| *x == j).unwrap());
    for (a, b) in &pairs {
        let (est, se) = covariance_jackknife(&layer_col(*a), &layer_col(*b));
        sink.within_se(format!("sampler.band_cross.{a}_{b}"), "independent bands", 0.0, est, se, 3.0);
    }
    sink.below("sampler.psd_clip_fraction", "clip budget", s.psd_clip_mass() / s.total_variance(), CLIP_BUDGET);

    let seed = replica_seed(cfg.seed, 0);
    let snap = Snapshot { grid, t_max: fc.t_max, seed, values: s.sample(seed).field(Regularization::Truncated(fc.t_max))? };
    let mut bin = Vec::new();
    snap.write_binary(&mut bin)?;
    let mut out = vec![Artifact::text("covariance_probes.csv", csv), Artifact { name: "snapshot.bin".into(), contents: bin }];
    if let Ok(text) = snap.to_csv() {
        out.push(Artifact::text("snapshot.csv", text));
    }
    Ok(out)
}

pub fn thickness(cfg: &ExperimentConfig, pool: &Pool, sink: &mut RowSink) -> anyhow::Result<Vec<Artifact>> {
    let fc = cfg.field()?;
    let s = build_sampler(fc)?;
    let ts = &cfg.schedule.t;
    let views = ts.iter().map(|t| s.view(Regularization::Truncated(*t))).collect::<Result<Vec<_>, _>>()?;
    // `thickness_max` for every depth from a single noise pass.
    let per = pool.try_map(cfg.replicas, |i| {
        let fields = s.sample(replica_seed(cfg.seed, i)).views(&views)?;
        Ok(ts.iter().zip(&fields).map(|(t, x)| x.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) / t).collect::<Vec<f64>>())
    })?;
    let mut csv = String::from("replica,t,thickness\n");
    for (i, row) in per.iter().enumerate() {
        for (t, v) in ts.iter().zip(row) {
            csv.push_str(&format!("{i},{t},{v:.11e}\n"));
        }
    }
    let medians: Vec<f64> = (0..ts.len()).map(|c| median(&per.iter().map(|r| r[c]).collect::<Vec<_>>())).collect();
    for w in 0..ts.len().saturating_sub(1) {
        let (a, b) = (medians[w], medians[w + 1]);
        sink.push(format!("thickness.median_t{}_le_t{}", ts[w], ts[w + 1]), "monotone trend", a, b, f64::NAN, 0.0, b >= a);
    }
    let edge = (2.0 * fc.dim as f64).sqrt();
    let last = *medians.last().expect("schedule nonempty");
    let t_last = ts.last().unwrap();
    sink.push(format!("thickness.median_t{t_last}_band"), "[0.7, 1.0] x sqrt(2d)", edge, last, f64::NAN, 0.3 * edge,
              (0.7 * edge..=edge).contains(&last));
    let mut mcsv = String::from("t,median\n");
    for (t, m) in ts.iter().zip(&medians) {
        mcsv.push_str(&format!("{t},{m:.11e}\n"));
    }
    Ok(vec![Artifact::text("thickness.csv", csv), Artifact::text("thickness_medians.csv", mcsv)])
}
