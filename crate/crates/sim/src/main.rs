use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use ftn_noma::{execute, parse_config};

/// Asynchronous FTN-NOMA achievable-rate simulator.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Master seed, overrides the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory, overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Quadrature intervals for spectral integrals, overrides the config.
    #[arg(long, value_name = "N")]
    quad_points: Option<usize>,
    /// Worker threads, 0 = one per core.
    #[arg(long, value_name = "N", default_value_t = 0)]
    threads: usize,
}

fn run(cli: Cli) -> Result<()> {
    let bytes = std::fs::read(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    let mut cfg = parse_config(&bytes)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(q) = cli.quad_points {
        cfg.quadrature_points = q;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("starting worker pool")?;
    let out_dir = PathBuf::from(&cfg.output.dir);
    let written = pool.install(|| execute(&cfg, &out_dir))?;
    eprintln!(
        "{}: {} rows -> {} ({} condition warnings)",
        cfg.experiment.name(),
        written.rows,
        written.csv.display(),
        written.condition_warnings
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
