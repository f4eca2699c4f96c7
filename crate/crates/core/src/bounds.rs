//! Asymptotic rate bounds, the merged rate, and the SINR / DoF gains.
//!
//! Every function here depends on the users only through `|h_l|^2` and the
//! transmit powers `P_l = E_s[l] / (zeta T)`; link delays never enter.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::pulse::{folded_spectrum, interference_reducing_spectrum, rrc_spectrum, twisted_folded_spectrum, FtnConfig, PulseParams};
use crate::quadrature::{band_integral, symmetric_integral, Quadrature, Symmetry};
use crate::rates::Scenario;

/// Lower and upper asymptotic rate bounds of one user, bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    /// The two bounds coincide analytically (`beta = 0` or no aliasing).
    pub merged: bool,
}

/// Received signal and aggregate interference powers seen by user `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LinkBudget {
    signal: f64,
    interference: f64,
    noise: f64,
}

fn budget(s: &Scenario, k: usize) -> Result<LinkBudget> {
    let signal = s.user(k)?.channel_gain() * s.power(k)?;
    let mut interference = 0.0;
    for l in (k + 1)..s.n_users() {
        interference += s.user(l)?.channel_gain() * s.power(l)?;
    }
    Ok(LinkBudget {
        signal,
        interference,
        noise: s.noise_psd(),
    })
}

fn spectral_rate<F>(b: LinkBudget, z: FtnConfig, p: &PulseParams, quad: Quadrature, interference_shape: F) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let v = band_integral(
        |f| {
            let (fo, shape) = interference_shape(f);
            math::log2(1.0 + b.signal * fo / (b.noise + b.interference * shape))
        },
        z,
        p,
        quad,
        Symmetry::Even,
    )?;
    Ok(v / (2.0 * p.bandwidth()))
}

/// Lower bound: the interference sees the folded spectrum.
pub fn rate_lower_bound(s: &Scenario, k: usize, quad: Quadrature) -> Result<f64> {
    let (z, p) = (s.ftn(), *s.pulse());
    spectral_rate(budget(s, k)?, z, &p, quad, |f| {
        let fo = folded_spectrum(f, z, &p);
        (fo, fo)
    })
}

/// Upper bound: the interference sees `|H_tfo|^2 rho(f)`.
pub fn rate_upper_bound(s: &Scenario, k: usize, quad: Quadrature) -> Result<f64> {
    let (z, p) = (s.ftn(), *s.pulse());
    spectral_rate(budget(s, k)?, z, &p, quad, |f| {
        let fo = folded_spectrum(f, z, &p);
        let shape = twisted_folded_spectrum(f, z, &p) * interference_reducing_spectrum(f, z, &p);
        (fo, shape)
    })
}

pub fn rate_bounds(s: &Scenario, k: usize, quad: Quadrature) -> Result<BoundPair> {
    let merged = s.pulse().beta() == 0.0 || s.ftn().is_alias_free(s.pulse());
    Ok(BoundPair {
        lower: rate_lower_bound(s, k, quad)?,
        upper: rate_upper_bound(s, k, quad)?,
        merged,
    })
}

/// Nyquist-rate bounds: closed-form lower bound, quadrature upper bound.
pub fn anoma_bounds(s: &Scenario, k: usize, quad: Quadrature) -> Result<BoundPair> {
    if s.ftn().zeta() != 1.0 {
        return Err(Error::Precondition("aNOMA bounds require zeta = 1"));
    }
    Ok(BoundPair {
        lower: synchronous_rate(s, k)?,
        upper: rate_upper_bound(s, k, quad)?,
        merged: s.pulse().beta() == 0.0,
    })
}

/// Conventional synchronous NOMA rate at the scenario's transmit powers:
/// `log2(1 + |h_k|^2 P_k T / (N0 + sum_{l>k} |h_l|^2 P_l T)) / (2 W T)`.
pub fn synchronous_rate(s: &Scenario, k: usize) -> Result<f64> {
    let b = budget(s, k)?;
    let t = s.pulse().period();
    let snr = b.signal * t / (b.noise + b.interference * t);
    Ok(math::log2(1.0 + snr) / (2.0 * s.pulse().bandwidth() * t))
}

/// Rate once the symbol rate exceeds `2W`: the bounds coincide and only the
/// pulse spectrum matters.
pub fn merged_rate(s: &Scenario, k: usize, quad: Quadrature) -> Result<f64> {
    if !s.ftn().is_alias_free(s.pulse()) {
        return Err(Error::Precondition("merged rate requires zeta <= 1/(1+beta)"));
    }
    let b = budget(s, k)?;
    let p = *s.pulse();
    let v = symmetric_integral(
        |f| {
            let h = rrc_spectrum(f, &p);
            math::log2(1.0 + b.signal * h / (b.noise + b.interference * h))
        },
        p.bandwidth(),
        quad,
        Symmetry::Even,
    )?;
    Ok(v / (2.0 * p.bandwidth()))
}

/// Form of the SINR-gain integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinrGainForm {
    /// `zeta T * integral of the pointwise ratio`.
    #[default]
    Pointwise,
    /// Ratio of the two band integrals.
    RatioOfIntegrals,
}

/// SINR gain of user `k` over synchronous transmission.
pub fn sinr_gain(s: &Scenario, k: usize, quad: Quadrature, form: SinrGainForm) -> Result<f64> {
    let b = budget(s, k)?;
    let (z, p) = (s.ftn(), *s.pulse());
    let num = |f: f64| {
        let fo = folded_spectrum(f, z, &p);
        b.noise * fo + b.interference * fo * fo
    };
    let den = |f: f64| {
        let fo = folded_spectrum(f, z, &p);
        let tfo = twisted_folded_spectrum(f, z, &p);
        b.noise * fo + b.interference * tfo * tfo
    };
    match form {
        SinrGainForm::Pointwise => {
            let v = band_integral(
                |f| {
                    let d = den(f);
                    if d > 0.0 {
                        num(f) / d
                    } else {
                        1.0
                    }
                },
                z,
                &p,
                quad,
                Symmetry::Even,
            )?;
            Ok(z.symbol_period(&p) * v)
        }
        SinrGainForm::RatioOfIntegrals => {
            let n = band_integral(num, z, &p, quad, Symmetry::Even)?;
            let d = band_integral(den, z, &p, quad, Symmetry::Even)?;
            Ok(n / d)
        }
    }
}

/// DoF gain over Nyquist signalling, `T min(1/(zeta T), 2W)`.
pub fn dof_gain(z: FtnConfig, p: &PulseParams) -> f64 {
    p.period() * z.symbol_rate(p).min(2.0 * p.bandwidth())
}

/// Ratio of the merged rate to the synchronous rate of user `k` along an
/// SNR sweep (dB, `sum |h|^2 P / N0` with equal powers). The compression
/// factor is set to `1/(1+beta)`.
pub fn high_snr_ratio(template: &Scenario, k: usize, snr_db: &[f64], quad: Quadrature) -> Result<Vec<f64>> {
    let alias_free = FtnConfig::new(1.0 / (1.0 + template.pulse().beta()))?;
    let base = template.with_ftn(alias_free);
    snr_db
        .iter()
        .map(|&db| {
            let s = base.with_total_snr(math::powf(10.0, db / 10.0));
            Ok(merged_rate(&s, k, quad)? / synchronous_rate(&s, k)?)
        })
        .collect()
}
