//! Single-cell geometry, Rayleigh fading and power calibration.

use alloc::vec::Vec;

use nalgebra::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_range, Result};
use crate::math;
use crate::quadrature::{trapezoid, Quadrature};

/// Annular cell with users dropped uniformly over its area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellConfig {
    /// Inner radius, metres.
    pub d0: f64,
    /// Outer radius, metres.
    pub d1: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    pub n_users: usize,
    /// Noise PSD in dBm.
    pub noise_dbm: f64,
    /// Target total received SNR in dB.
    pub snr_sum_db: f64,
    /// Link delays are drawn from `U[0, max_delay]`, seconds.
    pub max_delay: f64,
}

impl CellConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("cell.d0", self.d0, self.d0 > 0.0, "inner radius must be positive")?;
        check_range("cell.d1", self.d1, self.d1 > self.d0, "outer radius must exceed the inner radius")?;
        check_range("cell.alpha", self.alpha, self.alpha > 2.0, "path-loss exponent must exceed 2")?;
        check_range("cell.n_users", self.n_users as f64, self.n_users >= 1, "at least one user")?;
        check_range("cell.noise_dbm", self.noise_dbm, true, "must be finite")?;
        check_range("cell.snr_sum_db", self.snr_sum_db, true, "must be finite")?;
        check_range("cell.max_delay", self.max_delay, self.max_delay >= 0.0, "must be non-negative")?;
        Ok(())
    }

    /// Noise PSD in watts per hertz.
    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }
}

/// `10^((dBm - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    math::powf(10.0, (dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    math::powf(10.0, db / 10.0)
}

/// One radius with density `2d / (D1^2 - D0^2)` on `[D0, D1]`.
pub fn sample_distance<R: Rng + ?Sized>(cell: &CellConfig, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    let (a, b) = (cell.d0 * cell.d0, cell.d1 * cell.d1);
    math::sqrt(a + u * (b - a))
}

pub fn sample_positions<R: Rng + ?Sized>(cell: &CellConfig, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| sample_distance(cell, rng)).collect()
}

/// Mean channel power gain `1 / (1 + d^alpha)` at distance `d`.
pub fn path_gain(distance: f64, alpha: f64) -> f64 {
    1.0 / (1.0 + math::powf(distance, alpha))
}

/// Circularly symmetric complex Gaussian with variance `1/(1 + d^alpha)`.
pub fn sample_channel<R: Rng + ?Sized>(distance: f64, alpha: f64, rng: &mut R) -> Complex<f64> {
    let s = math::sqrt(0.5 * path_gain(distance, alpha));
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(s * re, s * im)
}

/// Average channel gain over the cell area, by quadrature of
/// `(1/(1+d^alpha)) * 2d/(D1^2 - D0^2)` on `[D0, D1]`.
pub fn avg_channel_gain(cell: &CellConfig, quad: Quadrature) -> Result<f64> {
    cell.validate()?;
    let norm = cell.d1 * cell.d1 - cell.d0 * cell.d0;
    trapezoid(
        |d| path_gain(d, cell.alpha) * 2.0 * d / norm,
        cell.d0,
        cell.d1,
        quad.intervals(),
    )
}

/// Transmit powers that meet the cell's total-SNR target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCalibration {
    pub avg_gain: f64,
    /// Total transmit power, watts.
    pub p_max: f64,
    /// Equal share `P_max / K`.
    pub per_user: f64,
}

/// `P_max = SNR_sum * N0 / avg_gain`, split equally over the users.
pub fn calibrate_power(cell: &CellConfig, avg_gain: f64) -> Result<PowerCalibration> {
    cell.validate()?;
    check_range("avg_gain", avg_gain, avg_gain > 0.0, "must be positive")?;
    let p_max = db_to_linear(cell.snr_sum_db) * cell.noise_watts() / avg_gain;
    Ok(PowerCalibration {
        avg_gain,
        p_max,
        per_user: p_max / cell.n_users as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::trial_rng;

    fn cell(d0: f64, d1: f64) -> CellConfig {
        CellConfig {
            d0,
            d1,
            alpha: 3.76,
            n_users: 4,
            noise_dbm: -80.0,
            snr_sum_db: 20.0,
            max_delay: 2.0,
        }
    }

    fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = cdf(x);
                (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn degenerate_annulus() {
        let c = cell(74.999, 75.0);
        let mut rng = trial_rng(1, 0);
        for d in sample_positions(&c, 100, &mut rng) {
            assert!((d - 75.0).abs() < 1e-3);
        }
        let g = avg_channel_gain(&c, Quadrature::default()).unwrap();
        assert!((g / path_gain(75.0, 3.76) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn radial_distribution_matches_area_uniform_law() {
        let c = cell(50.0, 200.0);
        let mut rng = trial_rng(2, 0);
        let d = sample_positions(&c, 1_000_000, &mut rng);
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let (a, b) = (c.d0, c.d1);
        let expected = 2.0 * (b * b * b - a * a * a) / (3.0 * (b * b - a * a));
        assert!((mean / expected - 1.0).abs() < 0.005);
        let ks = ks_statistic(d, |x| (x * x - a * a) / (b * b - a * a));
        assert!(ks < 0.01, "{ks}");
    }

    #[test]
    fn channel_power_is_exponential_with_path_loss_mean() {
        let mut rng = trial_rng(3, 0);
        let mean = path_gain(100.0, 3.76);
        let g: Vec<f64> = (0..1_000_000).map(|_| sample_channel(100.0, 3.76, &mut rng).norm_sqr()).collect();
        let m = g.iter().sum::<f64>() / g.len() as f64;
        assert!((m / mean - 1.0).abs() < 0.01);
        let ks = ks_statistic(g, |x| 1.0 - libm::exp(-x / mean));
        assert!(ks < 0.01, "{ks}");
        let far = sample_channel(1e12, 3.76, &mut rng).norm_sqr();
        assert!(far < 1e-40);
    }

    #[test]
    fn average_gain_matches_monte_carlo() {
        let c = cell(50.0, 75.0);
        let g = avg_channel_gain(&c, Quadrature::default()).unwrap();
        let mut rng = trial_rng(4, 0);
        let n = 10_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let d = sample_distance(&c, &mut rng);
            acc += sample_channel(d, c.alpha, &mut rng).norm_sqr();
        }
        let mc = acc / n as f64;
        assert!((mc / g - 1.0).abs() < 0.005, "{mc} vs {g}");
        let steep = CellConfig { alpha: 60.0, ..cell(2.0, 3.0) };
        assert!(avg_channel_gain(&steep, Quadrature::default()).unwrap() < 1e-15);
    }

    #[test]
    fn calibration() {
        let mut c = cell(50.0, 75.0);
        c.snr_sum_db = 0.0;
        c.noise_dbm = 30.0;
        c.n_users = 1;
        let p = calibrate_power(&c, 1.0).unwrap();
        assert!((p.p_max - 1.0).abs() < 1e-15);
        c.n_users = 2;
        assert!((calibrate_power(&c, 1.0).unwrap().per_user - 0.5).abs() < 1e-15);
        c.n_users = 4;
        assert!((calibrate_power(&c, 1.0).unwrap().per_user - 0.25).abs() < 1e-15);
        let q = Quadrature::default();
        let mut last = 0.0;
        for d1 in [75.0, 100.0, 200.0, 300.0, 400.0, 500.0] {
            let c = cell(50.0, d1);
            let p = calibrate_power(&c, avg_channel_gain(&c, q).unwrap()).unwrap();
            assert!(p.p_max > last);
            last = p.p_max;
        }
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-25);
    }

    #[test]
    fn validation() {
        assert!(cell(50.0, 40.0).validate().is_err());
        assert!(CellConfig { alpha: 2.0, ..cell(50.0, 75.0) }.validate().is_err());
        assert!(CellConfig { n_users: 0, ..cell(50.0, 75.0) }.validate().is_err());
    }
}
