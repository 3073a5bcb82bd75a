//! Experiment configuration (TOML, unknown keys rejected).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Identities,
    Covcheck,
    Sample,
    GmcMoments,
    SeriesCheck,
    GrowthReport,
    Thickness,
    Badmass,
    ToyMartingale,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Identities => "identities",
            Kind::Covcheck => "covcheck",
            Kind::Sample => "sample",
            Kind::GmcMoments => "gmc-moments",
            Kind::SeriesCheck => "series-check",
            Kind::GrowthReport => "growth-report",
            Kind::Thickness => "thickness",
            Kind::Badmass => "badmass",
            Kind::ToyMartingale => "toy-martingale",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegKind {
    Truncated,
    Mollified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub dim: usize,
    pub m: usize,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub frak_a: f64,
    pub t_max: f64,
    #[serde(default = "quarter")]
    pub delta_u: f64,
    #[serde(default = "kernel_resolution")]
    pub kernel_resolution: usize,
}

/// Scales are given as `n` with `eps = e^{-n}` (likewise `delta`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(default)]
    pub log_eps: Vec<f64>,
    #[serde(default)]
    pub log_delta: Vec<usize>,
    #[serde(default)]
    pub t: Vec<f64>,
    pub regularization: Option<RegKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionConfig {
    pub lo: f64,
    pub hi: f64,
    pub ramp: f64,
}

impl Default for TestFunctionConfig {
    fn default() -> Self {
        TestFunctionConfig { lo: 0.25, hi: 0.75, ramp: 0.1 }
    }
}

/// `points` values of `gamma'` on the circle of radius `radius` (or
/// `radius_frac` times the disc radius) around each `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleConfig {
    pub points: usize,
    pub radius: Option<f64>,
    pub radius_frac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmcConfig {
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub k: Vec<usize>,
    pub k_max: Option<usize>,
    pub eta: Option<f64>,
    pub gamma_hat: Option<f64>,
    pub circle: Option<CircleConfig>,
    pub series_tol: Option<f64>,
    #[serde(default)]
    pub test_function: TestFunctionConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyConfig {
    #[serde(default)]
    pub anchors: Vec<usize>,
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub horizons: Vec<usize>,
    /// Largest `|estimate|` accepted as bounded.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default)]
    pub replicas: usize,
    pub out_dir: Option<PathBuf>,
    pub field: Option<FieldConfig>,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub gmc: GmcConfig,
    #[serde(default)]
    pub toy: ToyConfig,
}

fn one() -> f64 {
    1.0
}

fn quarter() -> f64 {
    0.25
}

fn kernel_resolution() -> usize {
    4096
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        ExperimentConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn field(&self) -> anyhow::Result<&FieldConfig> {
        self.field.as_ref().ok_or_else(|| anyhow::anyhow!("invariant `field`: section required for {}", self.kind.name()))
    }

    pub fn eps_list(&self) -> Vec<f64> {
        self.schedule.log_eps.iter().map(|n| (-n).exp()).collect()
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let need = |ok: bool, what: &str| -> anyhow::Result<()> {
            if ok {
                Ok(())
            } else {
                bail!("invariant `{what}` violated for experiment {}", self.kind.name())
            }
        };
        let s = &self.schedule;
        let g = &self.gmc;
        match self.kind {
            Kind::Identities | Kind::Covcheck => {}
            Kind::Sample => {
                self.field()?;
                need(self.replicas >= 100, "replicas >= 100")?;
            }
            Kind::GmcMoments => {
                self.field()?;
                need(s.log_eps.len() == 1, "schedule.log_eps has one entry")?;
                need(!g.gamma.is_empty(), "gmc.gamma nonempty")?;
                need(!g.k.is_empty(), "gmc.k nonempty")?;
                need(self.replicas >= 2, "replicas >= 2")?;
            }
            Kind::SeriesCheck => {
                self.field()?;
                need(s.log_eps.len() == 1, "schedule.log_eps has one entry")?;
                need(!g.gamma.is_empty(), "gmc.gamma nonempty")?;
                let c = g.circle.as_ref();
                need(c.is_some_and(|c| c.points > 0 && (c.radius.is_some() != c.radius_frac.is_some())),
                     "gmc.circle with points and exactly one of radius, radius_frac")?;
                need(self.replicas >= 1, "replicas >= 1")?;
            }
            Kind::GrowthReport => {
                self.field()?;
                need(!s.log_eps.is_empty(), "schedule.log_eps nonempty")?;
                need(g.gamma.len() == 1, "gmc.gamma has one entry")?;
                need(g.k_max.is_some(), "gmc.k_max set")?;
                need(g.eta.is_some_and(|e| e > 0.0), "gmc.eta > 0")?;
                need(self.replicas >= 2, "replicas >= 2")?;
            }
            Kind::Thickness => {
                self.field()?;
                need(!s.t.is_empty(), "schedule.t nonempty")?;
                let t_max = self.field()?.t_max;
                need(s.t.iter().all(|t| *t > 0.0 && *t <= t_max), "0 < schedule.t <= field.t_max")?;
                need(self.replicas >= 1, "replicas >= 1")?;
            }
            Kind::Badmass => {
                self.field()?;
                need(s.log_eps.len() == 1, "schedule.log_eps has one entry")?;
                need(!s.log_delta.is_empty(), "schedule.log_delta nonempty")?;
                need(g.gamma.len() == 1, "gmc.gamma has one entry")?;
                need(g.k.len() == 1, "gmc.k has one entry")?;
                need(self.replicas >= 2, "replicas >= 2")?;
            }
            Kind::ToyMartingale => {
                need(!self.toy.horizons.is_empty(), "toy.horizons nonempty")?;
                need(self.replicas >= gmc_core::events::MIN_TOY_REPLICAS, "replicas >= 10000")?;
            }
        }
        if let Some(f) = &self.field {
            need(f.dim == 1 || f.dim == 2, "field.dim in {1, 2}")?;
            need(f.m.is_power_of_two() && f.m >= 64, "field.m a power of two >= 64")?;
            let h = 1.0 / f.m as f64;
            if s.regularization == Some(RegKind::Mollified) {
                for e in self.eps_list() {
                    need(e >= 4.0 * h, "eps >= 4 x grid spacing")?;
                }
            }
            for n in &s.log_eps {
                need(*n <= f.t_max, "log_eps <= field.t_max")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
kind = "thickness"
seed = 7
replicas = 3
[field]
dim = 1
m = 256
t_max = 4.0
[schedule]
t = [2.0, 4.0]
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml(BASE).unwrap();
        assert_eq!(c.kind, Kind::Thickness);
        assert_eq!(c.field.as_ref().unwrap().delta_u, 0.25);
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_unknown_keys_and_empty_schedules() {
        let typo = BASE.replace("replicas = 3", "replica = 3");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
        let empty = BASE.replace("t = [2.0, 4.0]", "t = []");
        let err = ExperimentConfig::from_toml(&empty).unwrap_err().to_string();
        assert!(err.contains("schedule.t"), "{err}");
        let zero = BASE.replace("t = [2.0, 4.0]", "t = [0.0, 4.0]");
        assert!(ExperimentConfig::from_toml(&zero).is_err());
    }

    #[test]
    fn rejects_fine_mollifier() {
        let text = r#"
kind = "gmc-moments"
seed = 1
replicas = 10
[field]
dim = 1
m = 64
t_max = 4.0
[schedule]
log_eps = [4.0]
regularization = "mollified"
[gmc]
gamma = [0.5]
k = [0]
"#;
        let err = ExperimentConfig::from_toml(text).unwrap_err().to_string();
        assert!(err.contains("grid spacing"), "{err}");
    }
}
