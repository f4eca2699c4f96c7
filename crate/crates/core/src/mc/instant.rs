//! Instantaneous rates for a fixed channel profile, averaged over random
//! link delays, on an SNR grid `sum |h_k|^2 P / N0` with equal powers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Complex;
use rand::Rng;

use crate::bounds::{rate_lower_bound, rate_upper_bound, synchronous_rate};
use crate::error::{check_range, Error, Result};
use crate::math;
use crate::mc::stats::mean_and_stderr;
use crate::mc::{cell::db_to_linear, trial_rng};
use crate::pulse::{FtnConfig, PulseParams};
use crate::quadrature::Quadrature;
use crate::rates::{EngineOptions, RateEngine, RateNormalization, Scenario, UserLink};

#[derive(Debug, Clone, PartialEq)]
pub struct InstantConfig {
    /// `|h_k|^2` per user.
    pub gains: Vec<f64>,
    pub beta: f64,
    pub period: f64,
    pub zeta: f64,
    pub n_symbols: usize,
    pub snr_db: Vec<f64>,
    pub draws: usize,
    pub max_delay: f64,
    pub seed: u64,
    pub quad: Quadrature,
    pub normalization: RateNormalization,
}

impl InstantConfig {
    /// Three-user profile `{0.5, 0.4, 0.1}`, `N = 100`, 0..30 dB in 1 dB steps,
    /// 200 delay draws over `[0, 2T]`.
    pub fn reference_profile(beta: f64, zeta: f64) -> Self {
        Self {
            gains: vec![0.5, 0.4, 0.1],
            beta,
            period: 1.0,
            zeta,
            n_symbols: 100,
            snr_db: (0..=30).map(f64::from).collect(),
            draws: 200,
            max_delay: 2.0,
            seed: 0,
            quad: Quadrature::default(),
            normalization: RateNormalization::Frame,
        }
    }
}

/// Per-draw output: delays (profile order) and normalized rates
/// `[snr][user]` in SIC order.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantTrial {
    pub delays: Vec<f64>,
    pub rates: Vec<Vec<f64>>,
    pub condition_warnings: usize,
}

impl InstantTrial {
    pub fn sum_rates(&self) -> Vec<f64> {
        self.rates.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Curves indexed `[snr]` or `[snr][user]` (SIC order).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InstantCurves {
    pub snr_db: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub sum_mean: Vec<f64>,
    pub sum_stderr: Vec<f64>,
    /// Exact rates with every delay zero.
    pub zero_delay: Vec<Vec<f64>>,
    pub zero_delay_sum: Vec<f64>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
    /// Conventional synchronous NOMA at the same powers.
    pub synchronous: Vec<Vec<f64>>,
    pub synchronous_sum: Vec<f64>,
    pub draws: usize,
    pub condition_warnings: usize,
}

/// Values indexed `[snr][user]`.
pub type Curve = Vec<Vec<f64>>;

/// Engine and base scenario shared by all draws.
#[derive(Debug, Clone)]
pub struct InstantContext {
    cfg: InstantConfig,
    engine: RateEngine,
    /// Users at unit total SNR, zero delays, profile order.
    links: Vec<UserLink>,
    base: Scenario,
}

impl InstantContext {
    pub fn new(cfg: InstantConfig) -> Result<Self> {
        if cfg.gains.is_empty() {
            return Err(Error::InvalidParameter {
                name: "gains",
                value: 0.0,
                reason: "at least one user is required",
            });
        }
        for &g in &cfg.gains {
            check_range("gains", g, g > 0.0, "channel gains must be positive")?;
        }
        check_range("draws", cfg.draws as f64, cfg.draws >= 1, "at least one delay draw")?;
        check_range("max_delay", cfg.max_delay, cfg.max_delay >= 0.0, "must be non-negative")?;
        for &s in &cfg.snr_db {
            check_range("snr_db", s, true, "must be finite")?;
        }
        let pulse = PulseParams::new(cfg.beta, cfg.period)?;
        let ftn = FtnConfig::new(cfg.zeta)?;
        let mut options = EngineOptions::for_pulse(&pulse);
        options.quad = cfg.quad;
        options.normalization = cfg.normalization;
        options.max_delay_span = cfg.max_delay;
        let engine = RateEngine::new(pulse, ftn, cfg.n_symbols, options)?;
        let total: f64 = cfg.gains.iter().sum();
        let energy = ftn.symbol_period(&pulse) / total;
        let links = cfg
            .gains
            .iter()
            .map(|&g| UserLink::new(Complex::new(math::sqrt(g), 0.0), 0.0, energy))
            .collect::<Result<Vec<_>>>()?;
        let base = Scenario::new(links.clone(), cfg.n_symbols, 1.0, ftn, pulse)?;
        Ok(Self {
            cfg,
            engine,
            links,
            base,
        })
    }

    pub fn config(&self) -> &InstantConfig {
        &self.cfg
    }

    pub fn engine(&self) -> &RateEngine {
        &self.engine
    }

    pub fn draw_delays(&self, trial: usize) -> Vec<f64> {
        let mut rng = trial_rng(self.cfg.seed, trial as u64);
        self.links.iter().map(|_| rng.gen::<f64>() * self.cfg.max_delay).collect()
    }

    fn rates_for(&self, delays: &[f64]) -> Result<(Vec<Vec<f64>>, usize)> {
        let links: Vec<UserLink> = self
            .links
            .iter()
            .zip(delays)
            .map(|(u, &d)| UserLink { delay: d, ..*u })
            .collect();
        let s = Scenario::new(links, self.cfg.n_symbols, 1.0, self.base.ftn(), *self.base.pulse())?;
        let prepared = self.engine.prepare(&s)?;
        let mut warnings = 0;
        let mut rates = Vec::with_capacity(self.cfg.snr_db.len());
        for &db in &self.cfg.snr_db {
            let r = prepared.evaluate(db_to_linear(db))?;
            warnings += r.condition_warnings;
            rates.push(r.per_user_normalized);
        }
        Ok((rates, warnings))
    }

    pub fn trial(&self, index: usize) -> Result<InstantTrial> {
        let delays = self.draw_delays(index);
        let (rates, condition_warnings) = self.rates_for(&delays)?;
        Ok(InstantTrial {
            delays,
            rates,
            condition_warnings,
        })
    }

    /// Exact rates with all delays zero, `[snr][user]`.
    pub fn zero_delay_rates(&self) -> Result<Vec<Vec<f64>>> {
        Ok(self.rates_for(&vec![0.0; self.links.len()])?.0)
    }

    /// Lower bound, upper bound and synchronous rate, each `[snr][user]`.
    pub fn bound_curves(&self) -> Result<(Curve, Curve, Curve)> {
        let k = self.base.n_users();
        let (mut lo, mut hi, mut sync) = (Vec::new(), Vec::new(), Vec::new());
        for &db in &self.cfg.snr_db {
            let s = self.base.with_total_snr(db_to_linear(db));
            let mut row = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
            for u in 0..k {
                row.0[u] = rate_lower_bound(&s, u, self.cfg.quad)?;
                row.1[u] = rate_upper_bound(&s, u, self.cfg.quad)?;
                row.2[u] = synchronous_rate(&s, u)?;
            }
            lo.push(row.0);
            hi.push(row.1);
            sync.push(row.2);
        }
        Ok((lo, hi, sync))
    }

    /// Reduce trials (in trial order) into curves.
    pub fn assemble(&self, trials: &[InstantTrial]) -> Result<InstantCurves> {
        if trials.is_empty() {
            return Err(Error::EmptySamples);
        }
        let k = self.base.n_users();
        let n_snr = self.cfg.snr_db.len();
        let mut curves = InstantCurves {
            snr_db: self.cfg.snr_db.clone(),
            draws: trials.len(),
            condition_warnings: trials.iter().map(|t| t.condition_warnings).sum(),
            ..InstantCurves::default()
        };
        for i in 0..n_snr {
            let mut mean = vec![0.0; k];
            let mut se = vec![0.0; k];
            for u in 0..k {
                let samples: Vec<f64> = trials.iter().map(|t| t.rates[i][u]).collect();
                (mean[u], se[u]) = mean_and_stderr(&samples)?;
            }
            let sums: Vec<f64> = trials.iter().map(|t| t.rates[i].iter().sum()).collect();
            let (m, s) = mean_and_stderr(&sums)?;
            curves.mean.push(mean);
            curves.stderr.push(se);
            curves.sum_mean.push(m);
            curves.sum_stderr.push(s);
        }
        curves.zero_delay = self.zero_delay_rates()?;
        curves.zero_delay_sum = curves.zero_delay.iter().map(|r| r.iter().sum()).collect();
        let (lo, hi, sync) = self.bound_curves()?;
        curves.lower = lo;
        curves.upper = hi;
        curves.synchronous_sum = sync.iter().map(|r| r.iter().sum()).collect();
        curves.synchronous = sync;
        Ok(curves)
    }

    /// Run every draw sequentially and assemble.
    pub fn run(&self) -> Result<InstantCurves> {
        let trials = (0..self.cfg.draws).map(|i| self.trial(i)).collect::<Result<Vec<_>>>()?;
        self.assemble(&trials)
    }
}
