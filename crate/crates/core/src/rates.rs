//! Exact finite-block mutual information under SIC detection.
//!
//! For user `k` with matched-filter bank `k`, the received covariance with
//! users `k..K` active is
//! `Sigma = sum_{l >= k} |h_l|^2 E_l G[l,k] G[l,k]^T + N0 G[k,k]`
//! and the conditional mutual information is
//! `(1/2) [ln det Sigma_with_k - ln det Sigma_without_k] / ln 2` bits.
//! Both determinants are evaluated after whitening by `G[k,k]`, which cancels
//! the common noise factor and keeps the matrices well conditioned.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix};

use crate::error::{check_range, Error, Result};
use crate::linalg::{self, Whitening, DEFAULT_EIGEN_FLOOR};
use crate::pulse::{FtnConfig, PulseParams};
use crate::quadrature::Quadrature;
use crate::toeplitz::{mui_matrix_with, CorrelationTable};
use crate::LN_2;

/// One uplink: channel coefficient, link delay and per-symbol energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserLink {
    pub gain: Complex<f64>,
    /// Link delay in seconds.
    pub delay: f64,
    /// Per-symbol energy `E_s`.
    pub symbol_energy: f64,
}

impl UserLink {
    pub fn new(gain: Complex<f64>, delay: f64, symbol_energy: f64) -> Result<Self> {
        check_range("user.gain", gain.norm_sqr(), gain.re.is_finite() && gain.im.is_finite(), "must be finite")?;
        check_range("user.delay", delay, delay >= 0.0, "must be non-negative")?;
        check_range("user.symbol_energy", symbol_energy, symbol_energy >= 0.0, "must be non-negative")?;
        Ok(Self {
            gain,
            delay,
            symbol_energy,
        })
    }

    /// Build from transmit power, using `E_s = P zeta T`.
    pub fn from_power(gain: Complex<f64>, delay: f64, power: f64, z: FtnConfig, p: &PulseParams) -> Result<Self> {
        Self::new(gain, delay, power * z.symbol_period(p))
    }

    /// Transmit power `P = E_s / (zeta T)`.
    pub fn power(&self, z: FtnConfig, p: &PulseParams) -> f64 {
        self.symbol_energy / z.symbol_period(p)
    }

    /// `|h|^2`.
    pub fn channel_gain(&self) -> f64 {
        self.gain.norm_sqr()
    }
}

/// Stable sort by descending `|h|^2`; ties keep their input order.
pub fn sic_sort(users: &[UserLink]) -> Vec<UserLink> {
    let mut v = users.to_vec();
    v.sort_by(|a, b| b.channel_gain().total_cmp(&a.channel_gain()));
    v
}

/// How a block's mutual information is turned into bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateNormalization {
    /// Frame duration `N zeta T`.
    #[default]
    Frame,
    /// Frame duration plus the largest link delay, `N zeta T + tau_max`.
    FrameWithDelay,
}

/// A K-user uplink in SIC decoding order.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    users: Vec<UserLink>,
    n_symbols: usize,
    noise_psd: f64,
    ftn: FtnConfig,
    pulse: PulseParams,
}

impl Scenario {
    /// Users are sorted into SIC order (descending `|h|^2`, stable).
    pub fn new(users: Vec<UserLink>, n_symbols: usize, noise_psd: f64, ftn: FtnConfig, pulse: PulseParams) -> Result<Self> {
        let users = sic_sort(&users);
        Self::in_decoding_order(users, n_symbols, noise_psd, ftn, pulse)
    }

    /// Keep the given decoding order.
    pub fn in_decoding_order(
        users: Vec<UserLink>,
        n_symbols: usize,
        noise_psd: f64,
        ftn: FtnConfig,
        pulse: PulseParams,
    ) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::InvalidParameter {
                name: "users",
                value: 0.0,
                reason: "at least one user is required",
            });
        }
        check_range("n_symbols", n_symbols as f64, n_symbols >= 1, "must be at least 1")?;
        check_range("noise_psd", noise_psd, noise_psd > 0.0, "must be positive")?;
        Ok(Self {
            users,
            n_symbols,
            noise_psd,
            ftn,
            pulse,
        })
    }

    pub fn users(&self) -> &[UserLink] {
        &self.users
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn noise_psd(&self) -> f64 {
        self.noise_psd
    }

    pub fn ftn(&self) -> FtnConfig {
        self.ftn
    }

    pub fn pulse(&self) -> &PulseParams {
        &self.pulse
    }

    pub fn user(&self, k: usize) -> Result<&UserLink> {
        self.users.get(k).ok_or(Error::UserIndex {
            index: k,
            users: self.users.len(),
        })
    }

    /// Transmit power of user `k`.
    pub fn power(&self, k: usize) -> Result<f64> {
        Ok(self.user(k)?.power(self.ftn, &self.pulse))
    }

    /// Largest link delay.
    pub fn max_delay(&self) -> f64 {
        self.users.iter().map(|u| u.delay).fold(0.0, f64::max)
    }

    /// Largest pairwise delay difference.
    pub fn delay_spread(&self) -> f64 {
        let lo = self.users.iter().map(|u| u.delay).fold(f64::INFINITY, f64::min);
        self.max_delay() - lo
    }

    /// Same users with every delay set to zero.
    pub fn with_zero_delays(&self) -> Self {
        let mut s = self.clone();
        for u in &mut s.users {
            u.delay = 0.0;
        }
        s
    }

    /// Same users and powers at a different compression factor (`E_s`
    /// rescaled so that `P` is unchanged).
    pub fn with_ftn(&self, ftn: FtnConfig) -> Self {
        let ratio = ftn.zeta() / self.ftn.zeta();
        let mut s = self.clone();
        s.ftn = ftn;
        for u in &mut s.users {
            u.symbol_energy *= ratio;
        }
        s
    }

    /// Equal powers with `sum |h_l|^2 P / N0 = snr` (linear).
    pub fn with_total_snr(&self, snr: f64) -> Self {
        let total: f64 = self.users.iter().map(|u| u.channel_gain()).sum();
        let power = snr * self.noise_psd / total;
        let ts = self.ftn.symbol_period(&self.pulse);
        let mut s = self.clone();
        for u in &mut s.users {
            u.symbol_energy = power * ts;
        }
        s
    }
}

/// Per-user and sum rates of one scenario.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateReport {
    /// Conditional mutual information of the whole block, bits.
    pub block_bits: Vec<f64>,
    /// Bits per channel use (block bits over `N`).
    pub per_user_bits_per_use: Vec<f64>,
    /// bits/s/Hz.
    pub per_user_normalized: Vec<f64>,
    pub sum_normalized: f64,
    /// Eigenvalues floored or discarded while evaluating the determinants.
    pub condition_warnings: usize,
}

/// Options for [`RateEngine`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub quad: Quadrature,
    pub eigen_floor: f64,
    pub normalization: RateNormalization,
    /// Largest delay difference the correlation table covers without
    /// falling back to direct quadrature, in seconds.
    pub max_delay_span: f64,
}

impl EngineOptions {
    pub fn for_pulse(p: &PulseParams) -> Self {
        Self {
            quad: Quadrature::default(),
            eigen_floor: DEFAULT_EIGEN_FLOOR,
            normalization: RateNormalization::Frame,
            max_delay_span: 2.0 * p.period(),
        }
    }
}

/// Shared state for exact-rate evaluation at fixed `(beta, T, zeta, N)`:
/// the correlation table and the whitening of the self-Gram matrix.
#[derive(Debug, Clone)]
pub struct RateEngine {
    pulse: PulseParams,
    ftn: FtnConfig,
    n_symbols: usize,
    options: EngineOptions,
    table: CorrelationTable,
    whitening: Whitening,
}

impl RateEngine {
    pub fn new(pulse: PulseParams, ftn: FtnConfig, n_symbols: usize, options: EngineOptions) -> Result<Self> {
        check_range("n_symbols", n_symbols as f64, n_symbols >= 1, "must be at least 1")?;
        check_range(
            "eigen_floor",
            options.eigen_floor,
            options.eigen_floor > 0.0 && options.eigen_floor < 1.0,
            "must lie in (0, 1)",
        )?;
        let span = (n_symbols - 1) as f64 * ftn.symbol_period(&pulse) + options.max_delay_span.max(0.0);
        let table = CorrelationTable::new(pulse, options.quad, span + pulse.period())?;
        let gkk = mui_matrix_with(&table, 0.0, ftn, &pulse, n_symbols)?.to_dense();
        let whitening = Whitening::new(&gkk, options.eigen_floor)?;
        Ok(Self {
            pulse,
            ftn,
            n_symbols,
            options,
            table,
            whitening,
        })
    }

    /// Engine matching a scenario's pulse, compression and block length.
    pub fn for_scenario(s: &Scenario) -> Result<Self> {
        let mut options = EngineOptions::for_pulse(&s.pulse);
        options.max_delay_span = options.max_delay_span.max(s.delay_spread());
        Self::new(s.pulse, s.ftn, s.n_symbols, options)
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    pub fn correlation(&self) -> &CorrelationTable {
        &self.table
    }

    pub fn whitening(&self) -> &Whitening {
        &self.whitening
    }

    fn check_compatible(&self, s: &Scenario) -> Result<()> {
        if s.pulse != self.pulse || s.ftn != self.ftn || s.n_symbols != self.n_symbols {
            return Err(Error::Precondition("scenario does not match the engine's pulse, compression or block length"));
        }
        Ok(())
    }

    /// Precompute the whitened interference matrices of every user so the
    /// scenario can be evaluated at many common power scalings.
    pub fn prepare(&self, s: &Scenario) -> Result<PreparedScenario> {
        self.check_compatible(s)?;
        let k_users = s.n_users();
        let n = self.n_symbols;
        let n0 = s.noise_psd;
        let mut users = Vec::with_capacity(k_users);
        for k in 0..k_users {
            let uk = &s.users[k];
            let mut acc: Option<DMatrix<f64>> = None;
            for ul in &s.users[k + 1..] {
                let w = ul.channel_gain() * ul.symbol_energy / n0;
                if w == 0.0 {
                    continue;
                }
                let g = mui_matrix_with(&self.table, ul.delay - uk.delay, self.ftn, &self.pulse, n)?;
                let prod = g.mul_transpose();
                match &mut acc {
                    Some(a) => *a += prod * w,
                    None => acc = Some(prod * w),
                }
            }
            let interference = acc.map(|a| self.whitening.congruence(&a));
            users.push(PreparedUser {
                signal: uk.channel_gain() * uk.symbol_energy / n0,
                interference,
            });
        }
        Ok(PreparedScenario {
            users,
            eigenvalues: self.whitening.eigenvalues().iter().copied().collect(),
            dropped: self.whitening.dropped(),
            floor: self.options.eigen_floor,
            n_symbols: n,
            denominator: self.denominator(s),
        })
    }

    fn denominator(&self, s: &Scenario) -> f64 {
        let frame = self.n_symbols as f64 * self.ftn.symbol_period(&self.pulse);
        let duration = match self.options.normalization {
            RateNormalization::Frame => frame,
            RateNormalization::FrameWithDelay => frame + s.max_delay(),
        };
        duration * self.pulse.bandwidth()
    }

    pub fn report(&self, s: &Scenario) -> Result<RateReport> {
        self.prepare(s)?.evaluate(1.0)
    }
}

#[derive(Debug, Clone)]
struct PreparedUser {
    signal: f64,
    interference: Option<DMatrix<f64>>,
}

/// A scenario with its whitened matrices cached; see [`RateEngine::prepare`].
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    users: Vec<PreparedUser>,
    eigenvalues: Vec<f64>,
    dropped: usize,
    floor: f64,
    n_symbols: usize,
    denominator: f64,
}

impl PreparedScenario {
    /// Rates with every symbol energy multiplied by `scale`.
    pub fn evaluate(&self, scale: f64) -> Result<RateReport> {
        check_range("scale", scale, scale >= 0.0, "must be non-negative")?;
        let k_users = self.users.len();
        let mut report = RateReport {
            block_bits: vec![0.0; k_users],
            per_user_bits_per_use: vec![0.0; k_users],
            per_user_normalized: vec![0.0; k_users],
            sum_normalized: 0.0,
            condition_warnings: self.dropped,
        };
        for (k, u) in self.users.iter().enumerate() {
            let s = scale * u.signal;
            let nats = match &u.interference {
                None => 0.5 * self.eigenvalues.iter().map(|&l| crate::math::log1p(s * l)).sum::<f64>(),
                Some(int) => {
                    let r = int.nrows();
                    let mut cb = int * scale;
                    for i in 0..r {
                        cb[(i, i)] += 1.0;
                    }
                    let mut ca = cb.clone();
                    for i in 0..r {
                        ca[(i, i)] += s * self.eigenvalues[i];
                    }
                    let (la, fa) = linalg::logdet_robust(&ca, self.floor, "covariance with the decoded user")?;
                    let (lb, fb) = linalg::logdet_robust(&cb, self.floor, "covariance without the decoded user")?;
                    report.condition_warnings += fa + fb;
                    0.5 * (la - lb)
                }
            };
            let bits = (nats / LN_2).max(0.0);
            report.block_bits[k] = bits;
            report.per_user_bits_per_use[k] = bits / self.n_symbols as f64;
            report.per_user_normalized[k] = bits / self.denominator;
        }
        report.sum_normalized = report.per_user_normalized.iter().sum();
        Ok(report)
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }
}

/// Conditional mutual information of user `k` (0-based, SIC order) in bits
/// over the whole block.
pub fn conditional_mi(s: &Scenario, k: usize) -> Result<f64> {
    s.user(k)?;
    Ok(RateEngine::for_scenario(s)?.report(s)?.block_bits[k])
}

/// Normalized rate of user `k` in bits/s/Hz.
pub fn normalized_rate(s: &Scenario, k: usize) -> Result<f64> {
    s.user(k)?;
    Ok(RateEngine::for_scenario(s)?.report(s)?.per_user_normalized[k])
}

/// Sum of the normalized rates, bits/s/Hz.
pub fn sum_rate(s: &Scenario) -> Result<f64> {
    Ok(RateEngine::for_scenario(s)?.report(s)?.sum_normalized)
}

/// Conditional mutual information of user `k` observed through the
/// matched-filter bank of user `bank`, by dense log-determinants without
/// whitening. Intended for small `N` cross-checks.
pub fn conditional_mi_at_bank(s: &Scenario, k: usize, bank: usize) -> Result<f64> {
    s.user(k)?;
    let b = s.user(bank)?;
    let quad = Quadrature::default();
    let corr = crate::toeplitz::SpectralCorrelation {
        pulse: s.pulse,
        quad,
    };
    let n = s.n_symbols;
    let gbb = mui_matrix_with(&corr, 0.0, s.ftn, &s.pulse, n)?.to_dense() * s.noise_psd;
    let mut without = gbb.clone();
    let mut with = gbb;
    for (l, ul) in s.users.iter().enumerate().skip(k) {
        let g = mui_matrix_with(&corr, ul.delay - b.delay, s.ftn, &s.pulse, n)?;
        let term = g.mul_transpose() * (ul.channel_gain() * ul.symbol_energy);
        with += &term;
        if l > k {
            without += &term;
        }
    }
    linalg::symmetrize(&mut with);
    linalg::symmetrize(&mut without);
    let a = linalg::logdet_spd(&with, DEFAULT_EIGEN_FLOOR)?;
    let b = linalg::logdet_spd(&without, DEFAULT_EIGEN_FLOOR)?;
    Ok(0.5 * (a.value - b.value) / LN_2)
}

/// Joint mutual information of users `0..K` through bank `bank`:
/// `(1/2)[ln det Sigma_all - ln det (N0 G[b,b])] / ln 2`.
pub fn joint_mi_at_bank(s: &Scenario, bank: usize) -> Result<f64> {
    let b = s.user(bank)?;
    let corr = crate::toeplitz::SpectralCorrelation {
        pulse: s.pulse,
        quad: Quadrature::default(),
    };
    let n = s.n_symbols;
    let noise = mui_matrix_with(&corr, 0.0, s.ftn, &s.pulse, n)?.to_dense() * s.noise_psd;
    let mut all = noise.clone();
    for ul in &s.users {
        let g = mui_matrix_with(&corr, ul.delay - b.delay, s.ftn, &s.pulse, n)?;
        all += g.mul_transpose() * (ul.channel_gain() * ul.symbol_energy);
    }
    linalg::symmetrize(&mut all);
    let a = linalg::logdet_spd(&all, DEFAULT_EIGEN_FLOOR)?;
    let z = linalg::logdet_spd(&noise, DEFAULT_EIGEN_FLOOR)?;
    Ok(0.5 * (a.value - z.value) / LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(beta: f64) -> PulseParams {
        PulseParams::new(beta, 1.0).unwrap()
    }
    fn z(zeta: f64) -> FtnConfig {
        FtnConfig::new(zeta).unwrap()
    }
    fn link(g2: f64, delay: f64, e: f64) -> UserLink {
        UserLink::new(Complex::new(g2.sqrt(), 0.0), delay, e).unwrap()
    }

    #[test]
    fn sic_sort_is_stable_descending() {
        let a = link(0.5, 0.0, 1.0);
        let b = link(0.4, 0.1, 1.0);
        let c = link(0.1, 0.2, 1.0);
        assert_eq!(sic_sort(&[a, b, c]), vec![a, b, c]);
        assert_eq!(sic_sort(&[c, b, a]), vec![a, b, c]);
        let t1 = link(0.3, 0.5, 1.0);
        let t2 = link(0.3, 0.7, 2.0);
        assert_eq!(sic_sort(&[t2, a, t1]), vec![a, t2, t1]);
    }

    #[test]
    fn power_energy_relation() {
        let q = p(0.3);
        let c = z(0.8);
        let u = UserLink::from_power(Complex::new(1.0, 0.0), 0.0, 2.5, c, &q).unwrap();
        assert_eq!(u.symbol_energy, 2.5 * 0.8);
        assert_eq!(u.power(c, &q), 2.5);
    }

    #[test]
    fn scalar_channel() {
        let s = Scenario::new(vec![link(0.7, 0.3, 2.0)], 1, 0.5, z(1.0), p(0.3)).unwrap();
        let mi = conditional_mi(&s, 0).unwrap();
        let expected = 0.5 * libm::log2(1.0 + 0.7 * 2.0 / 0.5);
        assert!((mi - expected).abs() < 1e-10, "{mi} vs {expected}");
    }

    #[test]
    fn single_user_nyquist_block() {
        let s = Scenario::new(vec![link(1.0, 0.0, 10.0)], 100, 1.0, z(1.0), p(0.3)).unwrap();
        let r = RateEngine::for_scenario(&s).unwrap().report(&s).unwrap();
        let per_use = 0.5 * libm::log2(11.0);
        assert!((r.per_user_bits_per_use[0] - per_use).abs() < 0.01 * per_use);
        // Normalized: log2(11) / (2 W T).
        assert!((r.per_user_normalized[0] - libm::log2(11.0) / 1.3).abs() < 1e-9);
        assert_eq!(r.sum_normalized, r.per_user_normalized[0]);
    }

    #[test]
    fn whitened_route_matches_dense_route() {
        let q = p(0.3);
        for zeta in [1.0, 0.9] {
            let users = vec![link(0.6, 0.2, 3.0), link(0.3, 1.1, 3.0), link(0.1, 0.0, 3.0)];
            let s = Scenario::new(users, 24, 0.7, z(zeta), q).unwrap();
            let r = RateEngine::for_scenario(&s).unwrap().report(&s).unwrap();
            for k in 0..3 {
                let dense = conditional_mi_at_bank(&s, k, k).unwrap();
                assert!((r.block_bits[k] - dense).abs() < 1e-7, "zeta {zeta} k {k}: {} vs {dense}", r.block_bits[k]);
            }
        }
    }

    #[test]
    fn chain_rule_on_shared_bank() {
        let users = vec![link(0.6, 0.25, 4.0), link(0.4, 0.9, 4.0)];
        let s = Scenario::new(users, 20, 1.0, z(0.85), p(0.3)).unwrap();
        let parts = conditional_mi_at_bank(&s, 0, 0).unwrap() + conditional_mi_at_bank(&s, 1, 0).unwrap();
        let joint = joint_mi_at_bank(&s, 0).unwrap();
        assert!((parts - joint).abs() < 1e-9, "{parts} vs {joint}");
    }

    #[test]
    fn two_symmetric_synchronous_users_match_corner_rates() {
        let q = p(0.3);
        let users = vec![link(1.0, 0.0, 10.0), link(1.0, 0.0, 10.0)];
        let s = Scenario::new(users, 50, 1.0, z(1.0), q).unwrap();
        let total = sum_rate(&s).unwrap();
        let first = libm::log2(1.0 + 10.0 / 11.0) / 1.3;
        let second = libm::log2(11.0) / 1.3;
        assert!((total - first - second).abs() < 1e-9);
    }

    #[test]
    fn rates_grow_with_energy() {
        let q = p(0.3);
        let mut last = 0.0;
        for e in [0.5, 1.0, 2.0, 4.0] {
            let users = vec![link(0.5, 0.0, e), link(0.4, 0.7, 1.0)];
            let s = Scenario::new(users, 30, 1.0, z(0.9), q).unwrap();
            let r = normalized_rate(&s, 0).unwrap();
            assert!(r > last);
            last = r;
        }
    }

    #[test]
    fn scaling_matches_fresh_scenario() {
        let q = p(0.3);
        let users = vec![link(0.5, 0.0, 1.0), link(0.4, 0.7, 1.0), link(0.1, 1.5, 1.0)];
        let s = Scenario::new(users.clone(), 30, 1.0, z(0.95), q).unwrap();
        let e = RateEngine::for_scenario(&s).unwrap();
        let scaled = e.prepare(&s).unwrap().evaluate(7.0).unwrap();
        let users7: Vec<_> = users.iter().map(|u| link(u.channel_gain(), u.delay, 7.0)).collect();
        let s7 = Scenario::new(users7, 30, 1.0, z(0.95), q).unwrap();
        let direct = e.report(&s7).unwrap();
        for k in 0..3 {
            assert!((scaled.block_bits[k] - direct.block_bits[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let q = p(0.3);
        assert!(Scenario::new(vec![], 10, 1.0, z(1.0), q).is_err());
        assert!(Scenario::new(vec![link(1.0, 0.0, 1.0)], 0, 1.0, z(1.0), q).is_err());
        assert!(Scenario::new(vec![link(1.0, 0.0, 1.0)], 10, 0.0, z(1.0), q).is_err());
        assert!(UserLink::new(Complex::new(1.0, 0.0), -1.0, 1.0).is_err());
        let s = Scenario::new(vec![link(1.0, 0.0, 1.0)], 10, 1.0, z(1.0), q).unwrap();
        assert_eq!(conditional_mi(&s, 3), Err(Error::UserIndex { index: 3, users: 1 }));
    }
}
