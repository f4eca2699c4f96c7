use ftn_noma_core::bounds::{rate_bounds, synchronous_rate};
use ftn_noma_core::mc::cell::CellConfig;
use ftn_noma_core::mc::ergodic::{ErgodicConfig, ErgodicContext, Scheme};
use ftn_noma_core::mc::instant::{InstantConfig, InstantContext};
use ftn_noma_core::rates::{sum_rate, RateEngine, RateNormalization};
use ftn_noma_core::{Complex, FtnConfig, PulseParams, Quadrature, Scenario, UserLink};

fn scenario(gains: &[f64], delays: &[f64], beta: f64, zeta: f64, n: usize, snr_db: f64) -> Scenario {
    let users = gains
        .iter()
        .zip(delays)
        .map(|(&g, &d)| UserLink::new(Complex::new(g.sqrt(), 0.0), d, 1.0).unwrap())
        .collect();
    Scenario::new(users, n, 1.0, FtnConfig::new(zeta).unwrap(), PulseParams::new(beta, 1.0).unwrap())
        .unwrap()
        .with_total_snr(10f64.powf(snr_db / 10.0))
}

#[test]
fn single_user_nyquist_rate_matches_closed_form() {
    let s = scenario(&[1.0], &[0.0], 0.3, 1.0, 100, 10.0);
    let r = RateEngine::for_scenario(&s).unwrap().report(&s).unwrap();
    assert!((r.per_user_normalized[0] - 2.6611).abs() < 1e-4);
    assert!((synchronous_rate(&s, 0).unwrap() - 2.6611).abs() < 1e-4);
}

#[test]
fn trials_do_not_depend_on_evaluation_order() {
    let cfg = InstantConfig {
        n_symbols: 24,
        snr_db: vec![0.0, 15.0],
        draws: 6,
        seed: 11,
        ..InstantConfig::reference_profile(0.3, 0.9)
    };
    let ctx = InstantContext::new(cfg).unwrap();
    let forward: Vec<_> = (0..6).map(|i| ctx.trial(i).unwrap()).collect();
    let backward: Vec<_> = (0..6).rev().map(|i| ctx.trial(i).unwrap()).collect();
    for (i, t) in forward.iter().enumerate() {
        assert_eq!(t, &backward[5 - i]);
        assert!(t.delays.iter().all(|&d| (0.0..=2.0).contains(&d)));
    }
}

#[test]
fn exact_rate_approaches_bounds_for_long_blocks() {
    let quad = Quadrature::default();
    let s = scenario(&[0.6, 0.4], &[0.0, 0.37], 0.3, 0.9, 200, 15.0);
    let r = RateEngine::for_scenario(&s).unwrap().report(&s).unwrap();
    for k in 0..2 {
        let b = rate_bounds(&s, k, quad).unwrap();
        let exact = r.per_user_normalized[k];
        assert!(exact > b.lower - 0.05 && exact < b.upper + 0.05, "user {k}: {exact} vs {b:?}");
    }
    assert!((sum_rate(&s).unwrap() - r.sum_normalized).abs() < 1e-9);
}

#[test]
fn single_user_cell_is_scheme_blind_at_nyquist() {
    let cfg = ErgodicConfig {
        cell: CellConfig {
            d0: 50.0,
            d1: 75.0,
            alpha: 3.76,
            n_users: 1,
            noise_dbm: -80.0,
            snr_sum_db: 20.0,
            max_delay: 2.0,
        },
        beta: 0.3,
        period: 1.0,
        zeta: 0.75,
        n_symbols: 30,
        trials: 4,
        seed: 3,
        quad: Quadrature::default(),
        normalization: RateNormalization::Frame,
    };
    let ctx = ErgodicContext::new(cfg).unwrap();
    for i in 0..4 {
        let t = ctx.trial(i).unwrap();
        let noma = t.sum_rates[Scheme::Noma.index()];
        let anoma = t.sum_rates[Scheme::Anoma.index()];
        assert!((noma - anoma).abs() < 1e-12 * noma.max(1.0));
        assert!(t.sum_rates[Scheme::AftnNoma.index()] > noma);
    }
}
