//! Root-raised-cosine pulse spectrum, pulse cross-correlations and the
//! folded / twisted-folded / interference-reducing spectra.
//!
//! Frequencies are in Hz, times in seconds, spectra in energy-spectral
//! density units (seconds). The pulse is normalised to unit energy.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{check_range, Result};
use crate::math;
use crate::quadrature::Quadrature;

/// Roll-off factor and Nyquist period of the RRC pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    beta: f64,
    period: f64,
}

impl PulseParams {
    pub fn new(beta: f64, period: f64) -> Result<Self> {
        check_range("pulse.beta", beta, (0.0..=1.0).contains(&beta), "roll-off must lie in [0, 1]")?;
        check_range("pulse.period", period, period > 0.0, "Nyquist period must be positive")?;
        Ok(Self { beta, period })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Nyquist symbol period `T`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// One-sided baseband bandwidth `W = (1 + beta) / (2T)`.
    pub fn bandwidth(&self) -> f64 {
        (1.0 + self.beta) / (2.0 * self.period)
    }

    /// `|H_p(f)|^2`, see [`rrc_spectrum`].
    pub fn spectrum(&self, f: f64) -> f64 {
        rrc_spectrum(f, self)
    }
}

/// Symbol-time compression factor `zeta`; the symbol period is `zeta * T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtnConfig {
    zeta: f64,
}

impl FtnConfig {
    pub fn new(zeta: f64) -> Result<Self> {
        check_range("ftn.zeta", zeta, zeta > 0.0 && zeta <= 1.0, "compression factor must lie in (0, 1]")?;
        Ok(Self { zeta })
    }

    /// Nyquist signalling (`zeta = 1`).
    pub fn nyquist() -> Self {
        Self { zeta: 1.0 }
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn symbol_period(&self, pulse: &PulseParams) -> f64 {
        self.zeta * pulse.period
    }

    pub fn symbol_rate(&self, pulse: &PulseParams) -> f64 {
        1.0 / self.symbol_period(pulse)
    }

    /// Edge of the symbol-rate band, `1 / (2 zeta T)`.
    pub fn band_edge(&self, pulse: &PulseParams) -> f64 {
        0.5 * self.symbol_rate(pulse)
    }

    /// True when no spectral aliasing occurs, i.e. `zeta <= 1/(1+beta)`.
    pub fn is_alias_free(&self, pulse: &PulseParams) -> bool {
        self.zeta * (1.0 + pulse.beta) <= 1.0 + 1e-12
    }
}

/// RRC energy spectrum `|H_p(f)|^2`.
///
/// The cosine-squared roll-off is used on the closed interval
/// `(1-beta)/(2T) <= |f| <= (1+beta)/(2T)`, so the function is continuous.
/// With `beta = 0` the spectrum is the brick wall `T` on the closed interval
/// `|f| <= 1/(2T)`.
pub fn rrc_spectrum(f: f64, p: &PulseParams) -> f64 {
    let a = f.abs();
    let t = p.period;
    let flat_edge = (1.0 - p.beta) / (2.0 * t);
    let edge = p.bandwidth();
    if a > edge {
        0.0
    } else if p.beta == 0.0 || a < flat_edge {
        t
    } else {
        let c = math::cos(PI * t / (2.0 * p.beta) * (a - flat_edge));
        t * c * c
    }
}

/// Indices `k` whose shifted spectra `|H_p(f - k/(zeta T))|^2` can be
/// non-zero inside the symbol-rate band: `-max..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliasRange {
    pub max: i64,
}

impl AliasRange {
    pub fn iter(&self) -> impl Iterator<Item = i64> {
        -self.max..=self.max
    }
}

/// Smallest symmetric alias index range covering the band.
///
/// Alias `k >= 1` reaches the band iff `(2k - 1)/(2 zeta T) <= W`, i.e.
/// `2k - 1 <= zeta (1 + beta)`.
pub fn alias_range(z: FtnConfig, p: &PulseParams) -> AliasRange {
    let reach = z.zeta * (1.0 + p.beta) + 1e-12;
    let max = math::floor((reach + 1.0) / 2.0) as i64;
    AliasRange { max }
}

/// Shifted spectrum `|H_p(f - k/(zeta T))|^2` as it enters the alias sums.
///
/// A shifted copy (`k != 0`) counts only on the open support `|nu| < W`.
/// This only matters for `beta = 0`, where the brick wall is non-zero at its
/// edge and would otherwise be counted twice where two copies touch.
pub(crate) fn alias_term(nu: f64, k: i64, p: &PulseParams) -> f64 {
    if k != 0 && nu.abs() >= p.bandwidth() {
        0.0
    } else {
        rrc_spectrum(nu, p)
    }
}

fn alias_sum(f: f64, z: FtnConfig, p: &PulseParams) -> (f64, f64) {
    let rate = z.symbol_rate(p);
    let mut centre = 0.0;
    let mut aliases = 0.0;
    for k in alias_range(z, p).iter() {
        let v = alias_term(f - k as f64 * rate, k, p);
        if k == 0 {
            centre += v;
        } else {
            aliases += v;
        }
    }
    (centre, aliases)
}

/// Frequencies in `(0, 1/(2 zeta T))` where some shifted copy
/// `|H_p(f - k/(zeta T))|^2` switches branch (flat, roll-off, zero),
/// ascending.
pub fn spectral_breakpoints(z: FtnConfig, p: &PulseParams) -> Vec<f64> {
    let edge = z.band_edge(p);
    let rate = z.symbol_rate(p);
    let tol = 1e-12 * edge;
    let corners = [(1.0 - p.beta) / (2.0 * p.period), p.bandwidth()];
    let mut out: Vec<f64> = Vec::new();
    for k in alias_range(z, p).iter() {
        for c in corners {
            for x in [k as f64 * rate + c, k as f64 * rate - c] {
                if x > tol && x < edge - tol {
                    out.push(x);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= tol);
    out
}

fn in_band(f: f64, z: FtnConfig, p: &PulseParams) -> bool {
    f.abs() <= z.band_edge(p)
}

/// Folded spectrum `sum_k |H_p(f - k/(zeta T))|^2` on the band, zero outside.
pub fn folded_spectrum(f: f64, z: FtnConfig, p: &PulseParams) -> f64 {
    if !in_band(f, z, p) {
        return 0.0;
    }
    let (c, a) = alias_sum(f, z, p);
    c + a
}

/// Twisted folded spectrum: the `k = 0` term minus every alias, on the band.
pub fn twisted_folded_spectrum(f: f64, z: FtnConfig, p: &PulseParams) -> f64 {
    if !in_band(f, z, p) {
        return 0.0;
    }
    let (c, a) = alias_sum(f, z, p);
    c - a
}

/// Interference-reducing spectrum `rho(f)`, twisted over folded.
///
/// Zero outside the band. Inside the band where the pulse has no energy at
/// all (possible when `zeta < 1/(1+beta)`) there is nothing to alias and the
/// ratio is taken as 1.
pub fn interference_reducing_spectrum(f: f64, z: FtnConfig, p: &PulseParams) -> f64 {
    if !in_band(f, z, p) {
        return 0.0;
    }
    let (c, a) = alias_sum(f, z, p);
    let folded = c + a;
    if folded <= 0.0 {
        1.0
    } else {
        (c - a) / folded
    }
}

/// Pulse correlation `g(t) = int |H_p(f)|^2 cos(2 pi f t) df` by trapezoid
/// quadrature over `[-W, W]`.
pub fn correlation_at(t: f64, p: &PulseParams, quad: Quadrature) -> f64 {
    let w = p.bandwidth();
    let n = quad.half_intervals();
    let h = w / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let f = if i == n { w } else { i as f64 * h };
        let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += wt * rrc_spectrum(f, p) * math::cos(2.0 * PI * f * t);
    }
    2.0 * h * sum
}

/// MUI coefficient `g_zeta[dk, dtau]` between symbols `dk` slots and `dtau`
/// seconds apart, computed from the spectral form with the default grid.
pub fn cross_corr(dk: i64, dtau: f64, z: FtnConfig, p: &PulseParams) -> f64 {
    cross_corr_with(dk, dtau, z, p, Quadrature::default())
}

pub fn cross_corr_with(dk: i64, dtau: f64, z: FtnConfig, p: &PulseParams, quad: Quadrature) -> f64 {
    correlation_at(dk as f64 * z.symbol_period(p) + dtau, p, quad)
}

/// Closed-form raised-cosine autocorrelation
/// `sinc(x) cos(pi beta x) / (1 - (2 beta x)^2)`, `x = dt/T`.
///
/// Used to cross-check [`cross_corr`]. The factor
/// `cos(pi beta x) / (1 - 2 beta x)` is rewritten as
/// `(pi/2) sinc((1 - 2 beta x)/2)`, which removes the singularity at
/// `|x| = 1/(2 beta)` analytically.
pub fn rrc_autocorr_oracle(dt: f64, p: &PulseParams) -> f64 {
    let x = (dt / p.period).abs();
    let u = 1.0 - 2.0 * p.beta * x;
    math::sinc(x) * (PI / 2.0) * math::sinc(u / 2.0) / (1.0 + 2.0 * p.beta * x)
}

/// Which spectrum a [`SpectralGrid`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Pulse,
    Folded,
    TwistedFolded,
    InterferenceReducing,
}

impl SpectrumKind {
    pub fn eval(self, f: f64, z: FtnConfig, p: &PulseParams) -> f64 {
        match self {
            SpectrumKind::Pulse => rrc_spectrum(f, p),
            SpectrumKind::Folded => folded_spectrum(f, z, p),
            SpectrumKind::TwistedFolded => twisted_folded_spectrum(f, z, p),
            SpectrumKind::InterferenceReducing => interference_reducing_spectrum(f, z, p),
        }
    }
}

/// A spectrum sampled on a grid symmetric about 0 spanning the band.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectralGrid {
    /// Sample `kind` on `intervals + 1` uniform nodes over the symbol-rate band.
    pub fn sample(kind: SpectrumKind, z: FtnConfig, p: &PulseParams, intervals: usize) -> Self {
        let frequencies = symmetric_grid(z.band_edge(p), intervals.max(2));
        let values = frequencies.iter().map(|&f| kind.eval(f, z, p)).collect();
        Self { frequencies, values }
    }
}

/// Uniform grid on `[-edge, edge]`, mirrored so that `grid[i] == -grid[n-i]`
/// holds exactly.
pub fn symmetric_grid(edge: f64, intervals: usize) -> Vec<f64> {
    let n = intervals;
    let h = 2.0 * edge / n as f64;
    let mut out: Vec<f64> = (0..=n).map(|i| -edge + i as f64 * h).collect();
    for i in 0..=n / 2 {
        let v = out[n - i];
        out[i] = -v;
    }
    if n.is_multiple_of(2) {
        out[n / 2] = 0.0;
    }
    out[n] = edge;
    out[0] = -edge;
    out
}
