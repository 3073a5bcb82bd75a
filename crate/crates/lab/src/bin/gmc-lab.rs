use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gmc_lab::{run_experiment, write_outputs, ExperimentConfig, Kind};

#[derive(Parser)]
#[command(name = "gmc-lab", version, about = "Desk-scale experiments on Wick-ordered Gaussian multiplicative chaos")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hermite, umbral, Mehler and Wick identity suite.
    Identities(RunArgs),
    /// Seed kernel and covariance oracle checks.
    Covcheck(RunArgs),
    /// Sampler fidelity against the covariance quadrature.
    Sample(RunArgs),
    /// Monte Carlo moments of I_eps(f, k) against the pairing oracle.
    GmcMoments(RunArgs),
    /// Pathwise power series against direct complex evaluation.
    SeriesCheck(RunArgs),
    /// Normalised coefficient-growth table.
    GrowthReport(RunArgs),
    /// Maximal thickness medians.
    Thickness(RunArgs),
    /// Bad-event mass across delta.
    Badmass(RunArgs),
    /// Brownian martingale-trick statistic.
    ToyMartingale(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to $GMC_LAB_OUT/<experiment>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured replica count.
    #[arg(long)]
    replicas: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, env = "GMC_LAB_OUT", default_value = "gmc-lab-out", hide = true)]
    out_root: PathBuf,
}

fn run(kind: Kind, args: RunArgs) -> anyhow::Result<bool> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    anyhow::ensure!(
        cfg.kind == kind,
        "config {} describes a {} experiment, not {}",
        args.config.display(),
        cfg.kind.name(),
        kind.name()
    );
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replicas {
        cfg.replicas = r;
    }
    let dir = args.out.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| args.out_root.join(kind.name()));
    let outcome = run_experiment(&cfg, args.threads)?;
    write_outputs(&outcome, &dir).with_context(|| format!("writing results to {}", dir.display()))?;
    for row in outcome.report.failures() {
        eprintln!("FAIL {}: estimate {:?} oracle {:?} tolerance {:?}", row.name, row.estimate, row.oracle, row.tolerance);
    }
    println!(
        "{}: {}/{} checks passed; results in {}",
        kind.name(),
        outcome.report.rows.len() - outcome.report.failures().count(),
        outcome.report.rows.len(),
        dir.display()
    );
    Ok(outcome.report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Identities(a) => (Kind::Identities, a),
        Command::Covcheck(a) => (Kind::Covcheck, a),
        Command::Sample(a) => (Kind::Sample, a),
        Command::GmcMoments(a) => (Kind::GmcMoments, a),
        Command::SeriesCheck(a) => (Kind::SeriesCheck, a),
        Command::GrowthReport(a) => (Kind::GrowthReport, a),
        Command::Thickness(a) => (Kind::Thickness, a),
        Command::Badmass(a) => (Kind::Badmass, a),
        Command::ToyMartingale(a) => (Kind::ToyMartingale, a),
    };
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
