//! Ergodic sum rates over random user drops, fading and link delays.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_range, Error, Result};
use crate::mc::cell::{avg_channel_gain, calibrate_power, sample_channel, sample_positions, CellConfig, PowerCalibration};
use crate::mc::stats::mean_and_stderr;
use crate::mc::trial_rng;
use crate::pulse::{FtnConfig, PulseParams};
use crate::quadrature::Quadrature;
use crate::rates::{EngineOptions, RateEngine, RateNormalization, Scenario, UserLink};

/// Channel draws whose gains are all below this are redrawn.
pub const DEGENERATE_GAIN: f64 = 1e-300;

/// Redraw limit per trial before giving up.
const MAX_REDRAWS: usize = 1000;

/// The three compared multiple-access schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Synchronous, Nyquist rate.
    Noma,
    /// Random delays, Nyquist rate.
    Anoma,
    /// Random delays, compressed symbol period.
    AftnNoma,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Noma, Scheme::Anoma, Scheme::AftnNoma];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Noma => "noma",
            Scheme::Anoma => "anoma",
            Scheme::AftnNoma => "aftn_noma",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicConfig {
    pub cell: CellConfig,
    pub beta: f64,
    pub period: f64,
    pub zeta: f64,
    pub n_symbols: usize,
    pub trials: usize,
    pub seed: u64,
    pub quad: Quadrature,
    pub normalization: RateNormalization,
}

/// One trial: sum rates and per-user rates (SIC order) for each scheme,
/// indexed by [`Scheme::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicTrial {
    pub sum_rates: [f64; 3],
    pub user_rates: [Vec<f64>; 3],
    /// Channel draws rejected as degenerate.
    pub redraws: usize,
    pub condition_warnings: usize,
    pub delays: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedDifference {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicSummary {
    pub trials: usize,
    pub mean: [f64; 3],
    pub stderr: [f64; 3],
    /// aFTN-NOMA minus aNOMA, per trial.
    pub ftn_over_anoma: PairedDifference,
    /// aNOMA minus NOMA, per trial.
    pub anoma_over_noma: PairedDifference,
    /// aFTN-NOMA minus NOMA, per trial.
    pub ftn_over_noma: PairedDifference,
    pub redraws: usize,
    pub condition_warnings: usize,
}

#[derive(Debug, Clone)]
pub struct ErgodicContext {
    cfg: ErgodicConfig,
    pulse: PulseParams,
    nyquist: RateEngine,
    ftn: RateEngine,
    calibration: PowerCalibration,
}

impl ErgodicContext {
    pub fn new(cfg: ErgodicConfig) -> Result<Self> {
        cfg.cell.validate()?;
        check_range("trials", cfg.trials as f64, cfg.trials >= 1, "at least one trial")?;
        let pulse = PulseParams::new(cfg.beta, cfg.period)?;
        let ftn = FtnConfig::new(cfg.zeta)?;
        let mut options = EngineOptions::for_pulse(&pulse);
        options.quad = cfg.quad;
        options.normalization = cfg.normalization;
        options.max_delay_span = cfg.cell.max_delay;
        let nyquist = RateEngine::new(pulse, FtnConfig::nyquist(), cfg.n_symbols, options)?;
        let ftn_engine = RateEngine::new(pulse, ftn, cfg.n_symbols, options)?;
        let gain = avg_channel_gain(&cfg.cell, cfg.quad)?;
        let calibration = calibrate_power(&cfg.cell, gain)?;
        Ok(Self {
            cfg,
            pulse,
            nyquist,
            ftn: ftn_engine,
            calibration,
        })
    }

    pub fn config(&self) -> &ErgodicConfig {
        &self.cfg
    }

    pub fn calibration(&self) -> &PowerCalibration {
        &self.calibration
    }

    pub fn trial(&self, index: usize) -> Result<ErgodicTrial> {
        let cell = &self.cfg.cell;
        let k = cell.n_users;
        let mut rng = trial_rng(self.cfg.seed, index as u64);
        let mut redraws = 0;
        let channels = loop {
            let d = sample_positions(cell, k, &mut rng);
            let h: Vec<_> = d.iter().map(|&x| sample_channel(x, cell.alpha, &mut rng)).collect();
            if h.iter().any(|c| c.norm_sqr() >= DEGENERATE_GAIN) {
                break h;
            }
            redraws += 1;
            if redraws >= MAX_REDRAWS {
                return Err(Error::Precondition("every channel draw was degenerate"));
            }
        };
        let delays: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() * cell.max_delay).collect();
        let n0 = cell.noise_watts();
        let p = self.calibration.per_user;

        let mut sum_rates = [0.0; 3];
        let mut user_rates: [Vec<f64>; 3] = Default::default();
        let mut warnings = 0;
        for scheme in Scheme::ALL {
            let (engine, z, delayed) = match scheme {
                Scheme::Noma => (&self.nyquist, FtnConfig::nyquist(), false),
                Scheme::Anoma => (&self.nyquist, FtnConfig::nyquist(), true),
                Scheme::AftnNoma => (&self.ftn, FtnConfig::new(self.cfg.zeta)?, true),
            };
            let links = channels
                .iter()
                .zip(&delays)
                .map(|(&h, &d)| UserLink::from_power(h, if delayed { d } else { 0.0 }, p, z, &self.pulse))
                .collect::<Result<Vec<_>>>()?;
            let s = Scenario::new(links, self.cfg.n_symbols, n0, z, self.pulse)?;
            let r = engine.report(&s)?;
            warnings += r.condition_warnings;
            sum_rates[scheme.index()] = r.sum_normalized;
            user_rates[scheme.index()] = r.per_user_normalized;
        }
        Ok(ErgodicTrial {
            sum_rates,
            user_rates,
            redraws,
            condition_warnings: warnings,
            delays,
        })
    }

    pub fn run(&self) -> Result<ErgodicSummary> {
        let trials = (0..self.cfg.trials).map(|i| self.trial(i)).collect::<Result<Vec<_>>>()?;
        summarize(&trials)
    }
}

fn paired(trials: &[ErgodicTrial], a: Scheme, b: Scheme) -> Result<PairedDifference> {
    let d: Vec<f64> = trials
        .iter()
        .map(|t| t.sum_rates[a.index()] - t.sum_rates[b.index()])
        .collect();
    let (mean, stderr) = mean_and_stderr(&d)?;
    Ok(PairedDifference { mean, stderr })
}

/// Reduce trials (in trial order).
pub fn summarize(trials: &[ErgodicTrial]) -> Result<ErgodicSummary> {
    if trials.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut mean = [0.0; 3];
    let mut stderr = [0.0; 3];
    for s in Scheme::ALL {
        let v: Vec<f64> = trials.iter().map(|t| t.sum_rates[s.index()]).collect();
        (mean[s.index()], stderr[s.index()]) = mean_and_stderr(&v)?;
    }
    Ok(ErgodicSummary {
        trials: trials.len(),
        mean,
        stderr,
        ftn_over_anoma: paired(trials, Scheme::AftnNoma, Scheme::Anoma)?,
        anoma_over_noma: paired(trials, Scheme::Anoma, Scheme::Noma)?,
        ftn_over_noma: paired(trials, Scheme::AftnNoma, Scheme::Noma)?,
        redraws: trials.iter().map(|t| t.redraws).sum(),
        condition_warnings: trials.iter().map(|t| t.condition_warnings).sum(),
    })
}

/// Per-user rate samples of one scheme, `[user][trial]` in SIC order.
pub fn user_samples(trials: &[ErgodicTrial], scheme: Scheme) -> Vec<Vec<f64>> {
    let k = trials.first().map_or(0, |t| t.user_rates[scheme.index()].len());
    (0..k)
        .map(|u| trials.iter().map(|t| t.user_rates[scheme.index()][u]).collect())
        .collect()
}
