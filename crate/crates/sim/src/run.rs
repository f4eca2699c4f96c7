//! Experiment dispatch and dataset emission.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use ftn_noma_core::mc::cell::CellConfig;
use ftn_noma_core::mc::ergodic::{summarize, user_samples, ErgodicConfig, ErgodicContext, ErgodicTrial, Scheme};
use ftn_noma_core::mc::instant::{InstantConfig, InstantContext};
use ftn_noma_core::mc::region::{rate_region_two_user, RateRegion, RegionConfig};
use ftn_noma_core::mc::stats::{ccdf, linspace};
use ftn_noma_core::mc::tradeoff_sweep;
use ftn_noma_core::pulse::{SpectralGrid, SpectrumKind};
use ftn_noma_core::{Complex, FtnConfig, PulseParams, Scenario, UserLink};

use crate::config::{Experiment, ExperimentConfig, SCHEMA_VERSION};
use crate::output::{write_all_or_nothing, Cell, Table};

pub const POWER_CONVENTION: &str = "P(W) = 10^((dBm - 30)/10)";

/// Computed dataset plus counters for the sidecar.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub table: Table,
    pub condition_warnings: usize,
    pub redraws: usize,
    pub snr_convention: &'static str,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    program: &'static str,
    version: &'static str,
    experiment: &'static str,
    seed: u64,
    csv: String,
    columns: &'a [String],
    rows: usize,
    condition_warnings: usize,
    redraws: usize,
    snr_convention: &'static str,
    power_convention: &'static str,
    config: &'a ExperimentConfig,
    wall_time_s: f64,
}

/// Paths written by [`execute`].
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub rows: usize,
    pub condition_warnings: usize,
}

const INSTANT_SNR: &str = "sum_k |h_k|^2 P / N0 = snr, equal power, N0 = 1";
const ERGODIC_SNR: &str = "P_max = snr_sum * N0 / E|h|^2, P = P_max / K, N0 from cell.noise_dbm";
const REGION_SNR: &str = "per-user |h_k|^2 P_k / N0 = region.snr_db";
const NO_SNR: &str = "not applicable";

/// Compute the dataset and write `<stem>.csv` plus `<stem>.json` into `out_dir`.
pub fn execute(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Written> {
    let start = Instant::now();
    let data = compute(cfg)?;
    let wall = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let csv_path = out_dir.join(format!("{}.csv", cfg.stem()));
    let json_path = out_dir.join(format!("{}.json", cfg.stem()));
    let sidecar = Sidecar {
        schema_version: SCHEMA_VERSION,
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.experiment.name(),
        seed: cfg.seed,
        csv: format!("{}.csv", cfg.stem()),
        columns: &data.table.columns,
        rows: data.table.rows.len(),
        condition_warnings: data.condition_warnings,
        redraws: data.redraws,
        snr_convention: data.snr_convention,
        power_convention: POWER_CONVENTION,
        config: cfg,
        wall_time_s: wall,
    };
    let mut json = serde_json::to_vec_pretty(&sidecar)?;
    json.push(b'\n');
    write_all_or_nothing(&[
        (csv_path.clone(), data.table.to_csv().into_bytes()),
        (json_path.clone(), json),
    ])?;
    Ok(Written {
        csv: csv_path,
        sidecar: json_path,
        rows: data.table.rows.len(),
        condition_warnings: data.condition_warnings,
    })
}

pub fn compute(cfg: &ExperimentConfig) -> Result<Dataset> {
    match cfg.experiment {
        Experiment::Spectrum => spectrum(cfg),
        Experiment::RateExact => rate_exact(cfg),
        Experiment::RateBounds => rate_bounds(cfg),
        Experiment::Tradeoff => tradeoff(cfg),
        Experiment::RateRegion => rate_region(cfg),
        Experiment::Ergodic => ergodic(cfg),
        Experiment::Ccdf => ccdf_experiment(cfg),
    }
}

fn pulse_of(cfg: &ExperimentConfig) -> Result<PulseParams> {
    Ok(PulseParams::new(cfg.pulse.beta, cfg.pulse.period)?)
}

fn spectrum(cfg: &ExperimentConfig) -> Result<Dataset> {
    let p = pulse_of(cfg)?;
    let z = FtnConfig::new(cfg.ftn.zeta)?;
    let kinds = [
        SpectrumKind::Pulse,
        SpectrumKind::Folded,
        SpectrumKind::TwistedFolded,
        SpectrumKind::InterferenceReducing,
    ];
    let grids: Vec<SpectralGrid> = kinds
        .iter()
        .map(|&k| SpectralGrid::sample(k, z, &p, cfg.spectrum.intervals))
        .collect();
    let mut table = Table::new(["f", "pulse", "folded", "twisted_folded", "interference_reducing"]);
    for (i, &f) in grids[0].frequencies.iter().enumerate() {
        let mut row = vec![Cell::Num(f)];
        row.extend(grids.iter().map(|g| Cell::Num(g.values[i])));
        table.push(row);
    }
    Ok(Dataset {
        table,
        snr_convention: NO_SNR,
        ..Dataset::default()
    })
}

fn instant_config(cfg: &ExperimentConfig) -> InstantConfig {
    InstantConfig {
        gains: cfg.scenario.gains.clone(),
        beta: cfg.pulse.beta,
        period: cfg.pulse.period,
        zeta: cfg.ftn.zeta,
        n_symbols: cfg.scenario.n_symbols,
        snr_db: cfg.snr.grid(),
        draws: cfg.trials(),
        max_delay: cfg.scenario.max_delay,
        seed: cfg.seed,
        quad: cfg.quad(),
        normalization: cfg.scenario.normalization.into(),
    }
}

fn user_columns(k: usize, fields: &[&str]) -> Vec<String> {
    (1..=k)
        .flat_map(|u| fields.iter().map(move |f| format!("user{u}_{f}")))
        .collect()
}

fn rate_exact(cfg: &ExperimentConfig) -> Result<Dataset> {
    let ctx = InstantContext::new(instant_config(cfg))?;
    let trials = (0..cfg.trials())
        .into_par_iter()
        .map(|i| ctx.trial(i))
        .collect::<Result<Vec<_>, _>>()?;
    let c = ctx.assemble(&trials)?;
    let k = cfg.scenario.gains.len();
    let mut cols = vec!["snr_db".to_owned()];
    cols.extend(user_columns(k, &["mean", "stderr", "zero_delay", "lower", "upper", "synchronous"]));
    cols.extend(["sum_mean", "sum_stderr", "zero_delay_sum", "synchronous_sum"].map(String::from));
    let mut table = Table::new(cols);
    for i in 0..c.snr_db.len() {
        let mut row = vec![Cell::Num(c.snr_db[i])];
        for u in 0..k {
            row.extend(
                [c.mean[i][u], c.stderr[i][u], c.zero_delay[i][u], c.lower[i][u], c.upper[i][u], c.synchronous[i][u]]
                    .map(Cell::Num),
            );
        }
        row.extend([c.sum_mean[i], c.sum_stderr[i], c.zero_delay_sum[i], c.synchronous_sum[i]].map(Cell::Num));
        table.push(row);
    }
    Ok(Dataset {
        table,
        condition_warnings: c.condition_warnings,
        redraws: 0,
        snr_convention: INSTANT_SNR,
    })
}

fn rate_bounds(cfg: &ExperimentConfig) -> Result<Dataset> {
    let ctx = InstantContext::new(instant_config(cfg))?;
    let (lo, hi, sync) = ctx.bound_curves()?;
    let k = cfg.scenario.gains.len();
    let mut cols = vec!["snr_db".to_owned()];
    cols.extend(user_columns(k, &["lower", "upper", "synchronous"]));
    cols.extend(["sum_lower", "sum_upper", "sum_synchronous"].map(String::from));
    let mut table = Table::new(cols);
    for (i, &db) in cfg.snr.grid().iter().enumerate() {
        let mut row = vec![Cell::Num(db)];
        for u in 0..k {
            row.extend([lo[i][u], hi[i][u], sync[i][u]].map(Cell::Num));
        }
        row.extend([&lo[i], &hi[i], &sync[i]].map(|r| Cell::Num(r.iter().sum())));
        table.push(row);
    }
    Ok(Dataset {
        table,
        snr_convention: INSTANT_SNR,
        ..Dataset::default()
    })
}

fn tradeoff(cfg: &ExperimentConfig) -> Result<Dataset> {
    let p = pulse_of(cfg)?;
    let users = cfg
        .scenario
        .gains
        .iter()
        .map(|&g| UserLink::new(Complex::new(g.sqrt(), 0.0), 0.0, 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let template = Scenario::new(users, cfg.scenario.n_symbols, 1.0, FtnConfig::nyquist(), p)?
        .with_total_snr(10f64.powf(cfg.tradeoff.snr_db / 10.0));
    let zetas = cfg.tradeoff.zetas.clone().unwrap_or_default();
    let rows = tradeoff_sweep(&template, cfg.tradeoff.user, &zetas, cfg.quad(), cfg.tradeoff.form.into())?;
    let mut table = Table::new(["zeta", "sinr_gain", "dof_gain"]);
    for r in rows {
        table.push(vec![r.zeta.into(), r.sinr_gain.into(), r.dof_gain.into()]);
    }
    Ok(Dataset {
        table,
        snr_convention: INSTANT_SNR,
        ..Dataset::default()
    })
}

fn rate_region(cfg: &ExperimentConfig) -> Result<Dataset> {
    let rc = RegionConfig {
        gains: cfg.region.gains,
        snr_db: cfg.region.snr_db,
        beta: cfg.pulse.beta,
        period: cfg.pulse.period,
        zeta: cfg.ftn.zeta,
        n_symbols: cfg.scenario.n_symbols,
        draws: cfg.trials(),
        max_delay: cfg.scenario.max_delay,
        seed: cfg.seed,
        quad: cfg.quad(),
    };
    let set = rate_region_two_user(&rc)?;
    let mut table = Table::new(["scheme", "vertex", "rate_user1", "rate_user2", "stderr_user1", "stderr_user2"]);
    for (name, r) in [("noma", set.noma), ("anoma", set.anoma), ("aftn_noma", set.aftn_noma)] {
        for (i, (v, se)) in r.vertices().iter().zip(vertex_stderr(&r)).enumerate() {
            table.push(vec![name.into(), i.into(), v.0.into(), v.1.into(), se.0.into(), se.1.into()]);
        }
    }
    Ok(Dataset {
        table,
        snr_convention: REGION_SNR,
        ..Dataset::default()
    })
}

/// Standard errors aligned with [`RateRegion::vertices`].
fn vertex_stderr(r: &RateRegion) -> [(f64, f64); 5] {
    let s = r.stderr;
    [(0.0, 0.0), (s[2], 0.0), (s[2], s[3]), (s[0], s[1]), (0.0, s[1])]
}

fn ergodic_config(cfg: &ExperimentConfig, d1: f64, users: usize, snr_sum_db: f64) -> ErgodicConfig {
    ErgodicConfig {
        cell: CellConfig {
            d0: cfg.cell.d0,
            d1,
            alpha: cfg.cell.alpha,
            n_users: users,
            noise_dbm: cfg.cell.noise_dbm,
            snr_sum_db,
            max_delay: cfg.scenario.max_delay,
        },
        beta: cfg.pulse.beta,
        period: cfg.pulse.period,
        zeta: cfg.ftn.zeta,
        n_symbols: cfg.scenario.n_symbols,
        trials: cfg.trials(),
        seed: cfg.seed,
        quad: cfg.quad(),
        normalization: cfg.scenario.normalization.into(),
    }
}

fn ergodic_trials(ctx: &ErgodicContext) -> Result<Vec<ErgodicTrial>> {
    Ok((0..ctx.config().trials)
        .into_par_iter()
        .map(|i| ctx.trial(i))
        .collect::<Result<Vec<_>, _>>()?)
}

fn ergodic(cfg: &ExperimentConfig) -> Result<Dataset> {
    let mut table = Table::new([
        "d1",
        "users",
        "snr_sum_db",
        "trials",
        "per_user_power_w",
        "noma_mean",
        "noma_stderr",
        "anoma_mean",
        "anoma_stderr",
        "aftn_noma_mean",
        "aftn_noma_stderr",
        "aftn_minus_anoma",
        "aftn_minus_anoma_stderr",
        "anoma_minus_noma",
        "anoma_minus_noma_stderr",
    ]);
    let (mut warnings, mut redraws) = (0, 0);
    for &d1 in &cfg.cell.d1 {
        for &k in &cfg.cell.users {
            for &snr in &cfg.cell.snr_sum_db {
                let ctx = ErgodicContext::new(ergodic_config(cfg, d1, k, snr))?;
                let s = summarize(&ergodic_trials(&ctx)?)?;
                warnings += s.condition_warnings;
                redraws += s.redraws;
                let mut row: Vec<Cell> = vec![d1.into(), k.into(), snr.into(), s.trials.into()];
                row.push(ctx.calibration().per_user.into());
                for scheme in Scheme::ALL {
                    row.extend([s.mean[scheme.index()], s.stderr[scheme.index()]].map(Cell::Num));
                }
                for d in [s.ftn_over_anoma, s.anoma_over_noma] {
                    row.extend([d.mean, d.stderr].map(Cell::Num));
                }
                table.push(row);
            }
        }
    }
    Ok(Dataset {
        table,
        condition_warnings: warnings,
        redraws,
        snr_convention: ERGODIC_SNR,
    })
}

fn ccdf_experiment(cfg: &ExperimentConfig) -> Result<Dataset> {
    let cc = &cfg.ccdf;
    let ctx = ErgodicContext::new(ergodic_config(cfg, cc.d1, cc.users, cc.snr_sum_db))?;
    let trials = ergodic_trials(&ctx)?;
    let mut table = Table::new(["quantity", "rate", "noma", "anoma", "aftn_noma"]);
    let weakest: Vec<Vec<f64>> = Scheme::ALL
        .iter()
        .map(|&s| user_samples(&trials, s).pop().unwrap_or_default())
        .collect();
    let sums: Vec<Vec<f64>> = Scheme::ALL
        .iter()
        .map(|&s| trials.iter().map(|t| t.sum_rates[s.index()]).collect())
        .collect();
    for (name, samples) in [("weakest_user", weakest), ("sum", sums)] {
        let lo = samples.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let grid = linspace(lo, hi, cc.points);
        let curves = samples.iter().map(|s| ccdf(s, &grid)).collect::<Result<Vec<_>, _>>()?;
        for (i, &x) in grid.iter().enumerate() {
            let mut row = vec![Cell::from(name), x.into()];
            row.extend(curves.iter().map(|c| Cell::Num(c[i])));
            table.push(row);
        }
    }
    Ok(Dataset {
        table,
        condition_warnings: trials.iter().map(|t| t.condition_warnings).sum(),
        redraws: trials.iter().map(|t| t.redraws).sum(),
        snr_convention: ERGODIC_SNR,
    })
}
