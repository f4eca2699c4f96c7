//! Experiment configuration: strict JSON with single-cell reference defaults.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ftn_noma_core::bounds::SinrGainForm;
use ftn_noma_core::rates::RateNormalization;
use ftn_noma_core::quadrature::DEFAULT_INTERVALS;
use ftn_noma_core::Quadrature;

pub const SCHEMA_VERSION: u32 = 1;

/// Delay draws for instantaneous-rate experiments when `trials` is omitted.
pub const DEFAULT_DRAWS: usize = 200;
/// Channel realisations for ergodic experiments when `trials` is omitted.
pub const DEFAULT_ERGODIC_TRIALS: usize = 2000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config at `{path}`: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("`{path}` = {value} is out of range: {reason}")]
    Range {
        path: &'static str,
        value: String,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    RateExact,
    #[default]
    RateBounds,
    Tradeoff,
    RateRegion,
    Ergodic,
    Ccdf,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::RateExact => "rate-exact",
            Experiment::RateBounds => "rate-bounds",
            Experiment::Tradeoff => "tradeoff",
            Experiment::RateRegion => "rate-region",
            Experiment::Ergodic => "ergodic",
            Experiment::Ccdf => "ccdf",
        }
    }

    fn is_ergodic(self) -> bool {
        matches!(self, Experiment::Ergodic | Experiment::Ccdf)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    /// Roll-off factor in `[0, 1]`.
    pub beta: f64,
    /// Nyquist symbol period `T`.
    pub period: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self { beta: 0.3, period: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FtnSection {
    /// Compression factor in `(0, 1]`.
    pub zeta: f64,
}

impl Default for FtnSection {
    fn default() -> Self {
        Self { zeta: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    Frame,
    FrameWithDelay,
}

impl From<Normalization> for RateNormalization {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::Frame => RateNormalization::Frame,
            Normalization::FrameWithDelay => RateNormalization::FrameWithDelay,
        }
    }
}

/// Users of the instantaneous-rate experiments.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    /// `|h_k|^2`; the SNR grid sets `sum |h_k|^2 P / N0`.
    pub gains: Vec<f64>,
    pub n_symbols: usize,
    /// Delays are drawn uniformly on `[0, max_delay]`, in units of `T`.
    pub max_delay: f64,
    pub normalization: Normalization,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            gains: vec![0.5, 0.4, 0.1],
            n_symbols: 100,
            max_delay: 2.0,
            normalization: Normalization::Frame,
        }
    }
}

/// Single-cell geometry of the ergodic sweep.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    pub d0: f64,
    pub d1: Vec<f64>,
    pub alpha: f64,
    pub noise_dbm: f64,
    pub users: Vec<usize>,
    pub snr_sum_db: Vec<f64>,
}

impl Default for CellSection {
    fn default() -> Self {
        Self {
            d0: 50.0,
            d1: vec![75.0],
            alpha: 3.76,
            noise_dbm: -80.0,
            users: vec![2, 4, 8, 16, 32, 64, 128],
            snr_sum_db: vec![20.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SnrSection {
    pub start_db: f64,
    pub stop_db: f64,
    pub points: usize,
}

impl Default for SnrSection {
    fn default() -> Self {
        Self {
            start_db: 0.0,
            stop_db: 30.0,
            points: 31,
        }
    }
}

impl SnrSection {
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start_db];
        }
        let step = (self.stop_db - self.start_db) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start_db + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainForm {
    #[default]
    Pointwise,
    RatioOfIntegrals,
}

impl From<GainForm> for SinrGainForm {
    fn from(g: GainForm) -> Self {
        match g {
            GainForm::Pointwise => SinrGainForm::Pointwise,
            GainForm::RatioOfIntegrals => SinrGainForm::RatioOfIntegrals,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TradeoffSection {
    /// Defaults to four evenly spaced points from 1 down to `1/(1+beta)`.
    pub zetas: Option<Vec<f64>>,
    /// SIC position of the user whose SINR gain is reported.
    pub user: usize,
    /// Reference SNR for the interference weights, dB.
    pub snr_db: f64,
    pub form: GainForm,
}

impl Default for TradeoffSection {
    fn default() -> Self {
        Self {
            zetas: None,
            user: 0,
            snr_db: 20.0,
            form: GainForm::Pointwise,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RegionSection {
    pub gains: [f64; 2],
    /// Per-user received SNR, dB.
    pub snr_db: f64,
}

impl Default for RegionSection {
    fn default() -> Self {
        Self {
            gains: [1.0, 1.0],
            snr_db: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CcdfSection {
    pub users: usize,
    pub d1: f64,
    pub snr_sum_db: f64,
    pub points: usize,
}

impl Default for CcdfSection {
    fn default() -> Self {
        Self {
            users: 8,
            d1: 500.0,
            snr_sum_db: 20.0,
            points: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// Grid intervals across `[-1/(2 zeta T), 1/(2 zeta T)]`.
    pub intervals: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { intervals: 1000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    /// File stem; defaults to the experiment name.
    pub stem: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            stem: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub pulse: PulseSection,
    pub ftn: FtnSection,
    pub scenario: ScenarioSection,
    pub cell: CellSection,
    pub snr: SnrSection,
    pub trials: Option<usize>,
    pub seed: u64,
    pub quadrature_points: usize,
    pub tradeoff: TradeoffSection,
    pub region: RegionSection,
    pub ccdf: CcdfSection,
    pub spectrum: SpectrumSection,
    pub output: OutputSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::default(),
            pulse: PulseSection::default(),
            ftn: FtnSection::default(),
            scenario: ScenarioSection::default(),
            cell: CellSection::default(),
            snr: SnrSection::default(),
            trials: None,
            seed: 1,
            quadrature_points: DEFAULT_INTERVALS,
            tradeoff: TradeoffSection::default(),
            region: RegionSection::default(),
            ccdf: CcdfSection::default(),
            spectrum: SpectrumSection::default(),
            output: OutputSection::default(),
        }
    }
}

fn range<T: std::fmt::Display>(path: &'static str, value: T, ok: bool, reason: &'static str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Range {
            path,
            value: value.to_string(),
            reason,
        })
    }
}

fn finite(path: &'static str, v: f64) -> Result<(), ConfigError> {
    range(path, v, v.is_finite(), "must be finite")
}

/// Parse, fill defaults and validate.
pub fn parse_config(bytes: &[u8]) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
        path: e.path().to_string(),
        source: e.into_inner(),
    })?;
    cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Replace experiment-dependent `None`s with concrete values.
    pub fn resolve(&mut self) {
        if self.trials.is_none() {
            self.trials = Some(if self.experiment.is_ergodic() {
                DEFAULT_ERGODIC_TRIALS
            } else {
                DEFAULT_DRAWS
            });
        }
        if self.tradeoff.zetas.is_none() {
            let lo = 1.0 / (1.0 + self.pulse.beta);
            self.tradeoff.zetas = Some((0..4).map(|i| 1.0 - (1.0 - lo) * i as f64 / 3.0).collect());
        }
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_DRAWS)
    }

    pub fn quad(&self) -> Quadrature {
        Quadrature::new(self.quadrature_points).expect("validated")
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or(self.experiment.name())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.pulse;
        range("pulse.beta", p.beta, (0.0..=1.0).contains(&p.beta), "roll-off must lie in [0, 1]")?;
        range("pulse.period", p.period, p.period > 0.0 && p.period.is_finite(), "must be positive")?;
        let z = self.ftn.zeta;
        range("ftn.zeta", z, z > 0.0 && z <= 1.0, "compression factor must lie in (0, 1]")?;

        let s = &self.scenario;
        range("scenario.gains", s.gains.len(), !s.gains.is_empty(), "at least one user")?;
        for &g in &s.gains {
            range("scenario.gains", g, g > 0.0 && g.is_finite(), "gains must be positive")?;
        }
        range("scenario.n_symbols", s.n_symbols, s.n_symbols >= 1, "at least one symbol")?;
        range("scenario.max_delay", s.max_delay, s.max_delay >= 0.0 && s.max_delay.is_finite(), "must be non-negative")?;

        let c = &self.cell;
        range("cell.d0", c.d0, c.d0 > 0.0 && c.d0.is_finite(), "must be positive")?;
        range("cell.d1", c.d1.len(), !c.d1.is_empty(), "at least one outer radius")?;
        for &d in &c.d1 {
            range("cell.d1", d, d > c.d0 && d.is_finite(), "outer radius must exceed d0")?;
        }
        range("cell.alpha", c.alpha, c.alpha > 0.0 && c.alpha.is_finite(), "must be positive")?;
        finite("cell.noise_dbm", c.noise_dbm)?;
        range("cell.users", c.users.len(), !c.users.is_empty(), "at least one user count")?;
        for &k in &c.users {
            range("cell.users", k, k >= 1, "user counts must be positive")?;
        }
        range("cell.snr_sum_db", c.snr_sum_db.len(), !c.snr_sum_db.is_empty(), "at least one SNR")?;
        for &v in &c.snr_sum_db {
            finite("cell.snr_sum_db", v)?;
        }

        finite("snr.start_db", self.snr.start_db)?;
        finite("snr.stop_db", self.snr.stop_db)?;
        range("snr.points", self.snr.points, self.snr.points >= 1, "at least one point")?;
        range("snr.stop_db", self.snr.stop_db, self.snr.stop_db >= self.snr.start_db, "must not be below start_db")?;

        range("trials", self.trials(), self.trials() >= 1, "at least one trial")?;
        let q = self.quadrature_points;
        range("quadrature_points", q, q >= 2 && q.is_multiple_of(2), "must be an even number >= 2")?;

        let t = &self.tradeoff;
        let lo = 1.0 / (1.0 + p.beta);
        for &zeta in t.zetas.as_deref().unwrap_or(&[]) {
            range("tradeoff.zetas", zeta, zeta >= lo - 1e-12 && zeta <= 1.0, "must lie in [1/(1+beta), 1]")?;
        }
        range("tradeoff.user", t.user, t.user < s.gains.len(), "must index a scenario user")?;
        finite("tradeoff.snr_db", t.snr_db)?;

        for g in self.region.gains {
            range("region.gains", g, g > 0.0 && g.is_finite(), "gains must be positive")?;
        }
        finite("region.snr_db", self.region.snr_db)?;

        let cc = &self.ccdf;
        range("ccdf.users", cc.users, cc.users >= 1, "at least one user")?;
        range("ccdf.d1", cc.d1, cc.d1 > c.d0 && cc.d1.is_finite(), "outer radius must exceed cell.d0")?;
        finite("ccdf.snr_sum_db", cc.snr_sum_db)?;
        range("ccdf.points", cc.points, cc.points >= 2, "at least two grid points")?;

        range("spectrum.intervals", self.spectrum.intervals, self.spectrum.intervals >= 2, "at least two intervals")?;
        range("output.dir", &self.output.dir, !self.output.dir.is_empty(), "must not be empty")?;
        if let Some(stem) = &self.output.stem {
            let ok = !stem.is_empty() && !stem.contains(['/', '\\']);
            range("output.stem", stem, ok, "must be a plain file name")?;
        }
        Ok(())
    }
}
