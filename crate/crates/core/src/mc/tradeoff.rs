//! SINR-gain / DoF-gain sweep over the compression factor.

use alloc::vec::Vec;

use crate::bounds::{dof_gain, sinr_gain, SinrGainForm};
use crate::error::{check_range, Result};
use crate::pulse::FtnConfig;
use crate::quadrature::Quadrature;
use crate::rates::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffRow {
    pub zeta: f64,
    pub sinr_gain: f64,
    pub dof_gain: f64,
}

/// Gains of user `k` of `template` (powers held fixed) for each `zeta` in
/// `[1/(1+beta), 1]`.
pub fn tradeoff_sweep(
    template: &Scenario,
    k: usize,
    zetas: &[f64],
    quad: Quadrature,
    form: SinrGainForm,
) -> Result<Vec<TradeoffRow>> {
    let lo = 1.0 / (1.0 + template.pulse().beta());
    zetas
        .iter()
        .map(|&zeta| {
            check_range("zeta", zeta, zeta >= lo - 1e-12 && zeta <= 1.0, "must lie in [1/(1+beta), 1]")?;
            let z = FtnConfig::new(zeta)?;
            let s = template.with_ftn(z);
            Ok(TradeoffRow {
                zeta,
                sinr_gain: sinr_gain(&s, k, quad, form)?,
                dof_gain: dof_gain(z, s.pulse()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseParams;
    use crate::rates::UserLink;
    use nalgebra::Complex;

    fn template(beta: f64) -> Scenario {
        let users = [0.5, 0.4, 0.1]
            .iter()
            .map(|&g: &f64| UserLink::new(Complex::new(g.sqrt(), 0.0), 0.0, 1.0).unwrap())
            .collect();
        Scenario::new(users, 100, 1.0, FtnConfig::nyquist(), PulseParams::new(beta, 1.0).unwrap())
            .unwrap()
            .with_total_snr(100.0)
    }

    #[test]
    fn endpoints_and_monotonicity() {
        let rows = tradeoff_sweep(&template(0.5), 0, &[1.0, 0.9, 0.8, 2.0 / 3.0], Quadrature::default(), SinrGainForm::Pointwise).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].dof_gain, 1.0);
        assert!(rows[0].sinr_gain > 1.0);
        assert!((rows[3].sinr_gain - 1.0).abs() < 1e-9);
        assert!((rows[3].dof_gain - 1.5).abs() < 1e-12);
        for w in rows.windows(2) {
            assert!(w[1].sinr_gain <= w[0].sinr_gain);
            assert!(w[1].dof_gain >= w[0].dof_gain);
        }
    }

    #[test]
    fn sinc_pulse_has_no_gain() {
        let rows = tradeoff_sweep(&template(0.0), 0, &[1.0], Quadrature::default(), SinrGainForm::Pointwise).unwrap();
        assert!((rows[0].sinr_gain - 1.0).abs() < 1e-9 && rows[0].dof_gain == 1.0);
    }

    #[test]
    fn rejects_zeta_below_threshold() {
        assert!(tradeoff_sweep(&template(0.5), 0, &[0.5], Quadrature::default(), SinrGainForm::Pointwise).is_err());
    }
}
