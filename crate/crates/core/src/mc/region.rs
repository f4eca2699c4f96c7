//! Two-user achievable rate regions from the two SIC corner points and
//! time sharing.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Complex;
use rand::Rng;

use crate::error::{check_range, Result};
use crate::math;
use crate::mc::cell::db_to_linear;
use crate::mc::stats::mean_and_stderr;
use crate::mc::trial_rng;
use crate::pulse::{FtnConfig, PulseParams};
use crate::quadrature::Quadrature;
use crate::rates::{EngineOptions, RateEngine, Scenario, UserLink};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionConfig {
    /// `|h_1|^2, |h_2|^2`.
    pub gains: [f64; 2],
    /// Per-user received SNR `|h_k|^2 P_k / N0`, dB.
    pub snr_db: f64,
    pub beta: f64,
    pub period: f64,
    /// Compression factor of the aFTN-NOMA region.
    pub zeta: f64,
    pub n_symbols: usize,
    pub draws: usize,
    pub max_delay: f64,
    pub seed: u64,
    pub quad: Quadrature,
}

/// Region spanned by `(0,0)`, the two axis intercepts and the two corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRegion {
    /// User 1 decoded first: `(R1 under interference, R2 interference-free)`.
    pub corner_first: (f64, f64),
    /// User 2 decoded first: `(R1 interference-free, R2 under interference)`.
    pub corner_second: (f64, f64),
    /// Monte Carlo standard errors of the four corner coordinates, in the
    /// same order.
    pub stderr: [f64; 4],
}

impl RateRegion {
    /// Boundary polygon, counter-clockwise from the origin.
    pub fn vertices(&self) -> [(f64, f64); 5] {
        let (a, b) = (self.corner_first, self.corner_second);
        [(0.0, 0.0), (b.0, 0.0), b, a, (0.0, a.1)]
    }

    /// Distance from the origin to the boundary along the direction at
    /// `angle` radians from the R1 axis, `0 <= angle <= pi/2`.
    pub fn radius_at(&self, angle: f64) -> f64 {
        let dir = (math::cos(angle), math::sin(angle));
        let v = self.vertices();
        let mut best = f64::INFINITY;
        for i in 0..v.len() {
            let (p, q) = (v[i], v[(i + 1) % v.len()]);
            // Outward normal of a counter-clockwise edge.
            let n = (q.1 - p.1, p.0 - q.0);
            let along = n.0 * dir.0 + n.1 * dir.1;
            if along > 1e-15 {
                let c = n.0 * p.0 + n.1 * p.1;
                best = best.min(c / along);
            }
        }
        best.max(0.0)
    }

    /// Sum-rate corner average, a scalar summary of the dominant face.
    pub fn max_sum_rate(&self) -> f64 {
        let a = self.corner_first.0 + self.corner_first.1;
        let b = self.corner_second.0 + self.corner_second.1;
        a.max(b)
    }
}

/// Regions of the three schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSet {
    pub noma: RateRegion,
    pub anoma: RateRegion,
    pub aftn_noma: RateRegion,
}

fn corner_samples(
    engine: &RateEngine,
    links: [UserLink; 2],
    cfg: &RegionConfig,
    z: FtnConfig,
    pulse: PulseParams,
    delays: &[[f64; 2]],
) -> Result<RateRegion> {
    let mut samples: [Vec<f64>; 4] = Default::default();
    for d in delays {
        let u1 = UserLink { delay: d[0], ..links[0] };
        let u2 = UserLink { delay: d[1], ..links[1] };
        let first = Scenario::in_decoding_order(vec![u1, u2], cfg.n_symbols, 1.0, z, pulse)?;
        let r = engine.report(&first)?;
        samples[0].push(r.per_user_normalized[0]);
        samples[1].push(r.per_user_normalized[1]);
        let second = Scenario::in_decoding_order(vec![u2, u1], cfg.n_symbols, 1.0, z, pulse)?;
        let r = engine.report(&second)?;
        samples[2].push(r.per_user_normalized[1]);
        samples[3].push(r.per_user_normalized[0]);
    }
    let mut m = [0.0; 4];
    let mut se = [0.0; 4];
    for i in 0..4 {
        (m[i], se[i]) = mean_and_stderr(&samples[i])?;
    }
    Ok(RateRegion {
        corner_first: (m[0], m[1]),
        corner_second: (m[2], m[3]),
        stderr: se,
    })
}

/// Regions of synchronous NOMA, aNOMA and aFTN-NOMA, corners averaged over
/// `draws` delay realisations (NOMA needs none).
pub fn rate_region_two_user(cfg: &RegionConfig) -> Result<RegionSet> {
    for g in cfg.gains {
        check_range("gains", g, g > 0.0, "channel gains must be positive")?;
    }
    check_range("draws", cfg.draws as f64, cfg.draws >= 1, "at least one delay draw")?;
    let pulse = PulseParams::new(cfg.beta, cfg.period)?;
    let ftn = FtnConfig::new(cfg.zeta)?;
    let nyq = FtnConfig::nyquist();
    let mut options = EngineOptions::for_pulse(&pulse);
    options.quad = cfg.quad;
    options.max_delay_span = cfg.max_delay;
    let snr = db_to_linear(cfg.snr_db);
    let links = |z: FtnConfig| -> Result<[UserLink; 2]> {
        let mk = |g: f64| UserLink::from_power(Complex::new(math::sqrt(g), 0.0), 0.0, snr / g, z, &pulse);
        Ok([mk(cfg.gains[0])?, mk(cfg.gains[1])?])
    };
    let delays: Vec<[f64; 2]> = (0..cfg.draws)
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i as u64);
            [rng.gen::<f64>() * cfg.max_delay, rng.gen::<f64>() * cfg.max_delay]
        })
        .collect();
    let nyq_engine = RateEngine::new(pulse, nyq, cfg.n_symbols, options)?;
    let ftn_engine = RateEngine::new(pulse, ftn, cfg.n_symbols, options)?;
    Ok(RegionSet {
        noma: corner_samples(&nyq_engine, links(nyq)?, cfg, nyq, pulse, &[[0.0, 0.0]])?,
        anoma: corner_samples(&nyq_engine, links(nyq)?, cfg, nyq, pulse, &delays)?,
        aftn_noma: corner_samples(&ftn_engine, links(ftn)?, cfg, ftn, pulse, &delays)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn cfg(beta: f64) -> RegionConfig {
        RegionConfig {
            gains: [1.0, 1.0],
            snr_db: 10.0,
            beta,
            period: 1.0,
            zeta: 0.75,
            n_symbols: 32,
            draws: 4,
            max_delay: 2.0,
            seed: 1,
            quad: Quadrature::default(),
        }
    }

    #[test]
    fn synchronous_corner_matches_closed_form() {
        let r = rate_region_two_user(&cfg(0.3)).unwrap();
        let (a, b) = r.noma.corner_first;
        assert!((a - 0.7177).abs() < 1e-4 && (b - 2.6611).abs() < 1e-4);
        let (a, b) = r.noma.corner_second;
        assert!((a - 2.6611).abs() < 1e-4 && (b - 0.7177).abs() < 1e-4);
    }

    #[test]
    fn radius_of_a_square_region() {
        let sq = RateRegion {
            corner_first: (1.0, 1.0),
            corner_second: (1.0, 1.0),
            stderr: [0.0; 4],
        };
        assert!((sq.radius_at(0.0) - 1.0).abs() < 1e-12);
        assert!((sq.radius_at(FRAC_PI_2) - 1.0).abs() < 1e-12);
        assert!((sq.radius_at(FRAC_PI_2 / 2.0) - 2f64.sqrt()).abs() < 1e-12);
        let tri = RateRegion {
            corner_first: (0.0, 1.0),
            corner_second: (1.0, 0.0),
            stderr: [0.0; 4],
        };
        assert!((tri.radius_at(FRAC_PI_2 / 2.0) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn regions_nest() {
        let r = rate_region_two_user(&cfg(0.3)).unwrap();
        for i in 0..=10 {
            let a = FRAC_PI_2 * i as f64 / 10.0;
            assert!(r.noma.radius_at(a) <= r.anoma.radius_at(a) + 1e-9);
            assert!(r.anoma.radius_at(a) < r.aftn_noma.radius_at(a));
        }
    }
}
