//! Multi-user-interference Gram matrices, their product coefficients and
//! the alias-sum DTFT evaluators.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{self, DEFAULT_EIGEN_FLOOR};
use crate::math;
use crate::pulse::{alias_range, alias_term, correlation_at, rrc_spectrum, FtnConfig, PulseParams};
use crate::quadrature::Quadrature;

/// Tolerance on `|g[+-m_max]|` for a product-coefficient truncation.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Default truncation of the product-coefficient inner sum.
pub const DEFAULT_TRUNCATION: usize = 200;

/// Pulse correlation `g(t)` as a function of continuous lag (seconds).
pub trait Correlation {
    fn at(&self, t: f64) -> f64;
}

/// Direct spectral quadrature for every lag.
#[derive(Debug, Clone, Copy)]
pub struct SpectralCorrelation {
    pub pulse: PulseParams,
    pub quad: Quadrature,
}

impl Correlation for SpectralCorrelation {
    fn at(&self, t: f64) -> f64 {
        correlation_at(t, &self.pulse, self.quad)
    }
}

/// Tabulated correlation with quintic Hermite interpolation.
///
/// Nodes carry `g`, `g'` and `g''` from the same trapezoid sum that
/// [`correlation_at`] evaluates, so the table reproduces the quadrature
/// value to roughly `1e-10` between nodes. Lags past the table end fall back
/// to direct quadrature.
#[derive(Debug, Clone)]
pub struct CorrelationTable {
    pulse: PulseParams,
    quad: Quadrature,
    step: f64,
    nodes: Vec<[f64; 3]>,
}

impl CorrelationTable {
    /// Default node spacing, in units of `T`.
    pub const DEFAULT_STEP: f64 = 0.02;

    pub fn new(pulse: PulseParams, quad: Quadrature, t_max: f64) -> Result<Self> {
        Self::with_step(pulse, quad, t_max, Self::DEFAULT_STEP * pulse.period())
    }

    pub fn with_step(pulse: PulseParams, quad: Quadrature, t_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "table.step",
                value: step,
                reason: "must be positive",
            });
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "table.t_max",
                value: t_max,
                reason: "must be finite and non-negative",
            });
        }
        let count = math::ceil(t_max / step) as usize + 2;
        let w = pulse.bandwidth();
        let n = quad.half_intervals();
        let hf = w / n as f64;
        let weights: Vec<f64> = (0..=n)
            .map(|j| {
                let f = if j == n { w } else { j as f64 * hf };
                let tw = if j == 0 || j == n { 0.5 } else { 1.0 };
                tw * rrc_spectrum(f, &pulse)
            })
            .collect();
        let nodes = (0..count)
            .map(|i| node_values(i as f64 * step, &weights, hf, w))
            .collect();
        Ok(Self {
            pulse,
            quad,
            step,
            nodes,
        })
    }

    pub fn t_max(&self) -> f64 {
        (self.nodes.len() - 1) as f64 * self.step
    }

    pub fn pulse(&self) -> &PulseParams {
        &self.pulse
    }
}

const RESEED_EVERY: usize = 128;

fn node_values(t: f64, weights: &[f64], hf: f64, w: f64) -> [f64; 3] {
    let n = weights.len() - 1;
    let theta = 2.0 * PI * hf * t;
    let (rs, rc) = (math::sin(theta), math::cos(theta));
    let (mut c, mut s) = (1.0, 0.0);
    let (mut g0, mut g1, mut g2) = (0.0, 0.0, 0.0);
    for (j, &wt) in weights.iter().enumerate() {
        if j % RESEED_EVERY == 0 {
            let f = if j == n { w } else { j as f64 * hf };
            c = math::cos(2.0 * PI * f * t);
            s = math::sin(2.0 * PI * f * t);
        }
        let om = 2.0 * PI * j as f64 * hf;
        g0 += wt * c;
        g1 -= wt * om * s;
        g2 -= wt * om * om * c;
        let nc = c * rc - s * rs;
        s = s * rc + c * rs;
        c = nc;
    }
    let k = 2.0 * hf;
    [k * g0, k * g1, k * g2]
}

impl Correlation for CorrelationTable {
    fn at(&self, t: f64) -> f64 {
        let a = t.abs();
        let x = a / self.step;
        let last = self.nodes.len() - 1;
        if x >= last as f64 {
            return correlation_at(a, &self.pulse, self.quad);
        }
        let i = x as usize;
        let s = x - i as f64;
        let h = self.step;
        let [p0, d0, e0] = self.nodes[i];
        let [p1, d1, e1] = self.nodes[i + 1];
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
        let h3 = 0.5 * s3 - s4 + 0.5 * s5;
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        p0 * h0 + d0 * h * h1 + e0 * h * h * h2 + e1 * h * h * h3 + d1 * h * h4 + p1 * h5
    }
}

/// Toeplitz matrix stored by its first row and first column.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix {
    first_row: Vec<f64>,
    first_col: Vec<f64>,
    delta_tau: f64,
}

impl ToeplitzMatrix {
    /// `first_row[0]` and `first_col[0]` must agree.
    pub fn new(first_row: Vec<f64>, first_col: Vec<f64>, delta_tau: f64) -> Result<Self> {
        if first_row.is_empty() || first_row.len() != first_col.len() {
            return Err(Error::Precondition("first row and column must be non-empty and equally long"));
        }
        if first_row[0] != first_col[0] {
            return Err(Error::Precondition("first row and column disagree on the diagonal"));
        }
        Ok(Self {
            first_row,
            first_col,
            delta_tau,
        })
    }

    pub fn n(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn first_col(&self) -> &[f64] {
        &self.first_col
    }

    pub fn delta_tau(&self) -> f64 {
        self.delta_tau
    }

    /// Coefficient on diagonal `d = j - i`.
    pub fn coeff(&self, d: i64) -> f64 {
        if d >= 0 {
            self.first_row[d as usize]
        } else {
            self.first_col[(-d) as usize]
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeff(j as i64 - i as i64)
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_row == self.first_col
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// `A A^T` in `O(n^2)` using the Toeplitz shift structure.
    pub fn mul_transpose(&self) -> DMatrix<f64> {
        let n = self.n();
        let ni = n as i64;
        let c = |d: i64| self.coeff(d);
        let mut p = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                acc += c(m as i64) * c(m as i64 - j as i64);
            }
            p[(0, j)] = acc;
            p[(j, 0)] = acc;
        }
        for i in 0..n - 1 {
            for j in i..n - 1 {
                let (ii, jj) = (i as i64, j as i64);
                let v = p[(i, j)] + c(-1 - ii) * c(-1 - jj) - c(ni - 1 - ii) * c(ni - 1 - jj);
                p[(i + 1, j + 1)] = v;
                p[(j + 1, i + 1)] = v;
            }
        }
        p
    }
}

/// MUI matrix `G[l,k]` with entries `g_zeta[j - i, delta_tau]`, computed by
/// direct spectral quadrature.
pub fn mui_matrix(delta_tau: f64, z: FtnConfig, p: &PulseParams, n: usize) -> Result<ToeplitzMatrix> {
    let c = SpectralCorrelation {
        pulse: *p,
        quad: Quadrature::default(),
    };
    mui_matrix_with(&c, delta_tau, z, p, n)
}

pub fn mui_matrix_with<C: Correlation + ?Sized>(
    c: &C,
    delta_tau: f64,
    z: FtnConfig,
    p: &PulseParams,
    n: usize,
) -> Result<ToeplitzMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n_symbols",
            value: 0.0,
            reason: "block length must be at least 1",
        });
    }
    let ts = z.symbol_period(p);
    let row: Vec<f64> = (0..n).map(|j| c.at(j as f64 * ts + delta_tau)).collect();
    let mut col: Vec<f64> = (0..n).map(|i| c.at(-(i as f64) * ts + delta_tau)).collect();
    col[0] = row[0];
    ToeplitzMatrix::new(row, col, delta_tau)
}

/// Product coefficients `t[n] = sum_m g[m] g[m - n]` for `n = -M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCoeffs {
    coeffs: Vec<f64>,
    truncation: usize,
    /// `max |g[+-M]|`.
    pub tail: f64,
    /// Whether `tail` is below [`TAIL_TOLERANCE`].
    pub tail_ok: bool,
}

impl ProductCoeffs {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `t[n]`; zero for `|n| > M`.
    pub fn get(&self, n: i64) -> f64 {
        let m = self.truncation as i64;
        if n.abs() > m {
            0.0
        } else {
            self.coeffs[(n + m) as usize]
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Partial DTFT `sum_{|n| <= limit} t[n] e^{-j 2 pi n zeta T f}`.
    /// The imaginary part cancels because `t` is an autocorrelation.
    pub fn dtft(&self, f: f64, z: FtnConfig, p: &PulseParams, limit: usize) -> f64 {
        let w = 2.0 * PI * z.symbol_period(p) * f;
        let lim = limit.min(self.truncation) as i64;
        let mut acc = self.get(0);
        for n in 1..=lim {
            acc += (self.get(n) + self.get(-n)) * math::cos(w * n as f64);
        }
        acc
    }
}

pub fn gram_product_coeffs(delta_tau: f64, z: FtnConfig, p: &PulseParams, m_max: usize) -> ProductCoeffs {
    let c = SpectralCorrelation {
        pulse: *p,
        quad: Quadrature::default(),
    };
    gram_product_coeffs_with(&c, delta_tau, z, p, m_max)
}

pub fn gram_product_coeffs_with<C: Correlation + ?Sized>(
    c: &C,
    delta_tau: f64,
    z: FtnConfig,
    p: &PulseParams,
    m_max: usize,
) -> ProductCoeffs {
    let m = m_max as i64;
    let ts = z.symbol_period(p);
    let g: Vec<f64> = (-m..=m).map(|k| c.at(k as f64 * ts + delta_tau)).collect();
    let at = |k: i64| -> f64 {
        if k.abs() > m {
            0.0
        } else {
            g[(k + m) as usize]
        }
    };
    let coeffs = (-m..=m)
        .map(|n| {
            let lo = (-m).max(n - m);
            let hi = m.min(n + m);
            (lo..=hi).map(|k| at(k) * at(k - n)).sum()
        })
        .collect();
    let tail = at(m).abs().max(at(-m).abs());
    ProductCoeffs {
        coeffs,
        truncation: m_max,
        tail,
        tail_ok: tail < TAIL_TOLERANCE,
    }
}

fn check_band(f: f64, z: FtnConfig, p: &PulseParams) -> Result<()> {
    let edge = z.band_edge(p);
    if f.abs() > edge || !f.is_finite() {
        return Err(Error::OutOfBand {
            frequency: f,
            band_edge: edge,
        });
    }
    Ok(())
}

/// DTFT of `g_zeta[n, delta_tau]` at frequency `f` (angular frequency
/// `2 pi f zeta T`), via the alias sum
/// `(1/zeta T) sum_k |H(f - k/zeta T)|^2 exp(j 2 pi (f - k/zeta T) delta_tau)`.
pub fn dtft_g(f: f64, delta_tau: f64, z: FtnConfig, p: &PulseParams) -> Result<Complex<f64>> {
    check_band(f, z, p)?;
    let ts = z.symbol_period(p);
    let rate = 1.0 / ts;
    let mut acc = Complex::new(0.0, 0.0);
    for k in alias_range(z, p).iter() {
        let nu = f - k as f64 * rate;
        let h = alias_term(nu, k, p);
        if h != 0.0 {
            let ph = 2.0 * PI * nu * delta_tau;
            acc += Complex::new(h * math::cos(ph), h * math::sin(ph));
        }
    }
    Ok(acc / ts)
}

/// DTFT of the product coefficients, `|dtft_g|^2`.
pub fn dtft_t(f: f64, delta_tau: f64, z: FtnConfig, p: &PulseParams) -> Result<f64> {
    Ok(dtft_g(f, delta_tau, z, p)?.norm_sqr())
}

/// Outcome of [`check_positive_definite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitenessReport {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Absolute floor, `relative_floor * max_eigenvalue`.
    pub floor: f64,
    /// Eigenvalues below the floor.
    pub floored: usize,
    /// True when every eigenvalue exceeds the floor.
    pub above_floor: bool,
}

impl DefinitenessReport {
    /// No eigenvalue is negative beyond the floor magnitude.
    pub fn positive_within_floor(&self) -> bool {
        self.min_eigenvalue >= -self.floor
    }
}

pub fn check_positive_definite(m: &ToeplitzMatrix) -> Result<DefinitenessReport> {
    check_positive_definite_with(m, DEFAULT_EIGEN_FLOOR)
}

pub fn check_positive_definite_with(m: &ToeplitzMatrix, relative_floor: f64) -> Result<DefinitenessReport> {
    if !m.is_symmetric() {
        let asym = (0..m.n())
            .map(|i| (m.first_row[i] - m.first_col[i]).abs())
            .fold(0.0, f64::max);
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let dense = m.to_dense();
    linalg::check_symmetric(&dense)?;
    let ev = dense.symmetric_eigenvalues();
    let max = ev.max();
    let min = ev.min();
    let floor = relative_floor * max;
    let floored = ev.iter().filter(|&&l| l < floor).count();
    Ok(DefinitenessReport {
        min_eigenvalue: min,
        max_eigenvalue: max,
        floor,
        floored,
        above_floor: floored == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{folded_spectrum, rrc_autocorr_oracle, twisted_folded_spectrum};
    use proptest::prelude::*;

    fn p(beta: f64) -> PulseParams {
        PulseParams::new(beta, 1.0).unwrap()
    }
    fn z(zeta: f64) -> FtnConfig {
        FtnConfig::new(zeta).unwrap()
    }

    #[test]
    fn nyquist_self_gram_is_identity() {
        let m = mui_matrix(0.0, z(1.0), &p(0.3), 4).unwrap();
        let d = m.to_dense();
        assert!((d - DMatrix::<f64>::identity(4, 4)).amax() < 1e-10);
        assert!(m.is_symmetric());
    }

    #[test]
    fn ftn_self_gram_off_diagonal() {
        let q = p(0.3);
        let m = mui_matrix(0.0, z(0.8), &q, 2).unwrap();
        let expected = crate::pulse::cross_corr(1, 0.0, z(0.8), &q);
        assert_eq!(m.get(0, 1), expected);
        assert_eq!(m.get(1, 0), expected);
        assert!(expected > 0.1);
    }

    #[test]
    fn delayed_entries_follow_lag_convention() {
        let q = p(0.3);
        let m = mui_matrix(0.4, z(1.0), &q, 3).unwrap();
        assert!((m.get(0, 1) - rrc_autocorr_oracle(1.4, &q)).abs() < 1e-8);
        assert!((m.get(1, 0) - rrc_autocorr_oracle(-0.6, &q)).abs() < 1e-8);
        assert!((m.get(1, 2) - m.get(0, 1)).abs() == 0.0);
        assert!(!m.is_symmetric());
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let q = p(0.3);
        let quad = Quadrature::default();
        let table = CorrelationTable::new(q, quad, 30.0).unwrap();
        let direct = SpectralCorrelation { pulse: q, quad };
        let mut worst: f64 = 0.0;
        for i in 0..3000 {
            let t = -31.0 + i as f64 * 0.0207;
            worst = worst.max((table.at(t) - direct.at(t)).abs());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn mul_transpose_matches_dense_product() {
        let q = p(0.3);
        for (dt, zeta) in [(0.0, 1.0), (0.37, 0.9), (-1.2, 0.7)] {
            let m = mui_matrix(dt, z(zeta), &q, 13).unwrap();
            let d = m.to_dense();
            let expected = &d * d.transpose();
            assert!((m.mul_transpose() - expected).amax() < 1e-13);
        }
    }

    #[test]
    fn product_coeffs_identity_case() {
        let t = gram_product_coeffs(0.0, z(1.0), &p(0.3), 50);
        assert!((t.get(0) - 1.0).abs() < 1e-10);
        for n in 1..50 {
            assert!(t.get(n).abs() < 1e-10);
            assert!(t.get(-n).abs() < 1e-10);
        }
        assert!(t.tail_ok);
    }

    #[test]
    fn product_coeffs_centre_is_energy_of_sequence() {
        let q = p(0.3);
        let c = z(0.8);
        let t = gram_product_coeffs(0.0, c, &q, 200);
        let brute: f64 = (-200i64..=200)
            .map(|m| crate::pulse::cross_corr(m, 0.0, c, &q).powi(2))
            .sum();
        assert!((t.get(0) - brute).abs() < 1e-12);
        for n in 1..20 {
            assert!((t.get(n) - t.get(-n)).abs() < 1e-14);
        }
    }

    #[test]
    fn product_coeffs_match_interior_diagonals_of_gram_product() {
        let q = p(0.3);
        let c = z(0.8);
        let dt = 0.3;
        let n = 200;
        let m = mui_matrix(dt, c, &q, n).unwrap();
        let prod = m.mul_transpose();
        let t = gram_product_coeffs(dt, c, &q, 200);
        // P[i, j] = sum_m g[m - i] g[m - j], so diagonal d = j - i carries t[d]
        // once the window 0..n covers the decayed sequence.
        for d in 0..5i64 {
            let (i, j) = (100usize, (100 + d) as usize);
            assert!((prod[(i, j)] - t.get(d)).abs() < 1e-5, "d {d}");
        }
    }

    #[test]
    fn dtft_reference_values() {
        let q = p(0.3);
        for f in [-0.5, -0.2, 0.0, 0.31, 0.5] {
            let g = dtft_g(f, 0.0, z(1.0), &q).unwrap();
            assert!((g.re - 1.0).abs() < 1e-12 && g.im.abs() < 1e-15);
        }
        let c = z(0.8);
        for f in [-0.6, 0.0, 0.4, 0.625] {
            let g = dtft_g(f, 0.0, c, &q).unwrap();
            assert!((g.re - folded_spectrum(f, c, &q) / 0.8).abs() < 1e-12);
            assert!(g.im.abs() < 1e-12);
            let t = dtft_t(f, 0.0, c, &q).unwrap();
            assert!((t - (folded_spectrum(f, c, &q) / 0.8).powi(2)).abs() < 1e-12);
        }
        let c = z(0.6);
        for dt in [0.0, 0.3, 1.7] {
            let t = dtft_t(0.4, dt, c, &q).unwrap();
            assert!((t - (rrc_spectrum(0.4, &q) / 0.6).powi(2)).abs() < 1e-12);
        }
        assert!(matches!(dtft_g(0.51, 0.0, z(1.0), &q), Err(Error::OutOfBand { .. })));
        assert!(dtft_t(-0.9, 0.0, z(0.6), &q).is_err());
    }

    #[test]
    fn inverse_dtft_round_trip() {
        use crate::quadrature::{band_integral, Symmetry};
        let q = p(0.3);
        let c = z(0.85);
        let dt = 0.41;
        let ts = c.symbol_period(&q);
        for n in [-3i64, 0, 1, 5] {
            let re = band_integral(
                |f| {
                    let g = dtft_g(f, dt, c, &q).unwrap();
                    let ph = 2.0 * PI * n as f64 * ts * f;
                    g.re * math::cos(ph) - g.im * math::sin(ph)
                },
                c,
                &q,
                Quadrature::new(1 << 16).unwrap(),
                Symmetry::None,
            )
            .unwrap();
            let expected = crate::pulse::cross_corr(n, dt, c, &q);
            assert!((ts * re - expected).abs() < 1e-8, "n {n}: {} vs {expected}", ts * re);
        }
    }

    #[test]
    fn positive_definiteness_reports() {
        let q = p(0.3);
        let r = check_positive_definite(&mui_matrix(0.0, z(1.0), &q, 10).unwrap()).unwrap();
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-10);
        assert!(r.above_floor);
        let r = check_positive_definite(&mui_matrix(0.0, z(0.8), &q, 100).unwrap()).unwrap();
        assert!(r.min_eigenvalue > 0.0 && r.above_floor);
        let r = check_positive_definite(&mui_matrix(0.0, z(0.5), &q, 100).unwrap()).unwrap();
        assert!(r.positive_within_floor());
        assert!(r.min_eigenvalue < 1e-6 * r.max_eigenvalue);
        let asym = mui_matrix(0.3, z(1.0), &q, 5).unwrap();
        assert!(matches!(check_positive_definite(&asym), Err(Error::NotSymmetric { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn spectral_sandwiches(u in -1.0f64..1.0, dt in -2.0f64..2.0, zeta in 0.5f64..=1.0, beta in 0.0f64..=1.0) {
            let (q, c) = (p(beta), z(zeta));
            let f = u * c.band_edge(&q);
            let ts = c.symbol_period(&q);
            let g = dtft_g(f, dt, c, &q).unwrap();
            let lo = twisted_folded_spectrum(f, c, &q) / ts;
            let hi = folded_spectrum(f, c, &q) / ts;
            let tol = 1e-12 * (1.0 + hi);
            // Removing the common phase leaves a real part inside the sandwich.
            let strip = Complex::new(math::cos(2.0 * PI * f * dt), -math::sin(2.0 * PI * f * dt));
            let r = (g * strip).re;
            prop_assert!(lo - tol <= r && r <= hi + tol);
            prop_assert!(lo - tol <= math::sqrt(g.norm_sqr()) && math::sqrt(g.norm_sqr()) <= hi + tol);
            let t = dtft_t(f, dt, c, &q).unwrap();
            prop_assert!(lo * lo - tol <= t && t <= hi * hi + tol);
            if beta == 0.0 || c.is_alias_free(&q) {
                prop_assert!((math::sqrt(g.norm_sqr()) - hi).abs() <= tol);
            }
            let conj = dtft_g(-f, dt, c, &q).unwrap();
            prop_assert!(math::sqrt((conj - g.conj()).norm_sqr()) <= 1e-12);
        }
    }
}
