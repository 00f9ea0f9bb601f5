mod common;

use common::{fixture, fixture_bytes, FIXTURES};
use dirand::quadrature::{bff_coefficients, gauss_radau};
use dirand::tradeoff::{
    build_min_tradeoff, build_min_tradeoff_at, chsh_properties, crossover, load_certificate, DualCertificate,
    MinTradeoff, TradeoffError,
};
use dirand::{RandType, ZeroClass};
use proptest::prelude::*;
use serde_json::Value;

fn edit(name: &str, f: impl FnOnce(&mut Value)) -> Vec<u8> {
    let mut v: Value = serde_json::from_slice(&fixture_bytes(name)).unwrap();
    f(&mut v["di_rand_certificate_v1"]);
    serde_json::to_vec(&v).unwrap()
}

fn invariant_field(bytes: &[u8]) -> &'static str {
    match load_certificate(bytes) {
        Err(TradeoffError::Invariant { field, .. }) => field,
        other => panic!("expected an invariant error, got {other:?}"),
    }
}

fn toy() -> DualCertificate {
    DualCertificate {
        class: ZeroClass::Chsh,
        rand_type: RandType::Local,
        w_exp: 0.85,
        w_tol: 0.01,
        eta_z: 0.5,
        quadrature: gauss_radau(2, 1.0).unwrap(),
        lambda_win_terms: vec![1.0],
        lambda_z_terms: vec![vec![]],
        primal_terms: vec![0.0],
        gamma_win_star: 0.75,
        gamma_z_star: vec![],
        asymptotic_rate: 0.7,
    }
}

#[test]
fn fixtures_load() {
    for name in FIXTURES {
        let cert = fixture(name);
        assert!(cert.dual_feasibility_margin() >= 0.0, "{name}");
    }
    let c = fixture("2a_global.json");
    assert_eq!((c.class, c.rand_type), (ZeroClass::TwoA, RandType::Global));
    assert_eq!(c.asymptotic_rate, 1.7964);
}

#[test]
fn fixture_3b_bound_stays_below_rate() {
    let c = fixture("3b_blind.json");
    assert!(build_min_tradeoff(&c).eval(c.w_exp - c.w_tol) <= 0.9238 + 1e-6);
}

#[test]
fn toy_certificate_matches_hand_formula() {
    let cert = toy();
    cert.validate().unwrap();
    let c = bff_coefficients(&cert.quadrature).c;
    let f = build_min_tradeoff(&cert);
    assert!((f.lambda - c[0]).abs() < 1e-15);
    assert!((f.c_lambda - (c[1] - 0.75 * c[0])).abs() < 1e-15);
}

#[test]
fn round_trip_preserves_tradeoff() {
    for name in FIXTURES {
        let cert = fixture(name);
        let again = load_certificate(cert.to_json().as_bytes()).unwrap();
        assert_eq!(again, cert);
        assert_eq!(build_min_tradeoff(&again), build_min_tradeoff(&cert));
    }
}

#[test]
fn negative_eta_z_is_rejected() {
    let bytes = edit("2a_local.json", |c| c["eta_z"] = (-1e-3).into());
    assert_eq!(invariant_field(&bytes), "eta_z");
}

#[test]
fn term_count_mismatch_is_rejected() {
    let bytes = edit("2a_local.json", |c| {
        c["lambda_win_terms"].as_array_mut().unwrap().pop();
    });
    assert_eq!(invariant_field(&bytes), "lambda_win_terms");
}

#[test]
fn n_zero_mismatch_names_the_field() {
    let bytes = edit("2a_local.json", |c| {
        c["lambda_z_terms"][3].as_array_mut().unwrap().push(0.0.into());
    });
    assert_eq!(invariant_field(&bytes), "lambda_z_terms");
    let bytes = edit("3b_blind.json", |c| {
        c["gamma_z_star"].as_array_mut().unwrap().pop();
    });
    assert_eq!(invariant_field(&bytes), "gamma_z_star");
}

#[test]
fn inflated_dual_is_rejected() {
    let bytes = edit("chsh_local.json", |c| c["asymptotic_rate"] = 0.5.into());
    assert_eq!(invariant_field(&bytes), "asymptotic_rate");
}

#[test]
fn out_of_range_scores_are_rejected() {
    let bytes = edit("chsh_local.json", |c| c["w_exp"] = 0.9.into());
    assert_eq!(invariant_field(&bytes), "w_exp");
    let bytes = edit("chsh_local.json", |c| c["asymptotic_rate"] = 2.5.into());
    assert_eq!(invariant_field(&bytes), "asymptotic_rate");
}

#[test]
fn schema_errors() {
    let full = fixture_bytes("2a_local.json");
    assert!(matches!(load_certificate(&full[..full.len() / 2]), Err(TradeoffError::Schema(_))));
    let extra = edit("2a_local.json", |c| c["surprise"] = 1.into());
    assert!(matches!(load_certificate(&extra), Err(TradeoffError::Schema(_))));
    let unknown_class = edit("2a_local.json", |c| c["class"] = "9z".into());
    assert!(matches!(load_certificate(&unknown_class), Err(TradeoffError::Schema(_))));
    let wrong_key = br#"{"certificate": {}}"#;
    assert!(matches!(load_certificate(wrong_key), Err(TradeoffError::Schema(_))));
}

#[test]
fn zero_lambda_z_ignores_eta() {
    let mut cert = fixture("3b_blind.json");
    for row in &mut cert.lambda_z_terms {
        row.iter_mut().for_each(|v| *v = 0.0);
    }
    let a = build_min_tradeoff_at(&cert, 1e-6);
    let b = build_min_tradeoff_at(&cert, 0.3);
    assert_eq!(a, b);
}

fn variance_at(cf: &dirand::tradeoff::CrossoverTradeoff, nu: f64) -> f64 {
    let g = cf.gamma;
    let second = g * (nu * cf.at_test(true).powi(2) + (1.0 - nu) * cf.at_test(false).powi(2))
        + (1.0 - g) * cf.at_generation().powi(2);
    second - cf.base.eval(nu).powi(2)
}

proptest! {
    #[test]
    fn crossover_identity(
        lambda in 0.0f64..50.0, c in -20.0f64..20.0, gamma in 1e-3f64..=1.0, nup in 0.0f64..=1.0, nu in 0.0f64..=1.0,
    ) {
        let f = MinTradeoff::new(lambda, c);
        let cf = crossover(f, gamma, nup).unwrap();
        let scale = 1.0 + lambda / gamma + c.abs();
        prop_assert!((cf.eval_extended(nu) - f.eval(nu)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn properties_bound_the_values(
        lambda in 0.0f64..50.0, c in -20.0f64..20.0, gamma in 1e-3f64..=1.0, nup in 0.0f64..=1.0,
        nu in (1.0 - (2.0 + std::f64::consts::SQRT_2) / 4.0)..=((2.0 + std::f64::consts::SQRT_2) / 4.0),
    ) {
        let cf = crossover(MinTradeoff::new(lambda, c), gamma, nup).unwrap();
        let p = chsh_properties(&cf);
        let tol = 1e-9 * (1.0 + lambda / gamma).powi(2);
        for v in [cf.at_test(true), cf.at_test(false), cf.at_generation()] {
            prop_assert!(p.max_f >= v - 1e-12 * (1.0 + lambda / gamma));
        }
        prop_assert!(p.var_sigma >= -tol);
        prop_assert!(p.min_sigma <= p.max_f);
        prop_assert!(p.var_sigma >= variance_at(&cf, nu) - tol);
        let (lo, hi) = (c.min(lambda + c), c.max(lambda + c));
        prop_assert!(cf.f_perp >= lo - 1e-12 && cf.f_perp <= hi + 1e-12);
    }

    #[test]
    fn zero_tolerance_penalty_is_monotone(eta in 1e-9f64..0.5, name in prop::sample::select(FIXTURES.to_vec())) {
        let cert = fixture(name);
        let relaxed = build_min_tradeoff_at(&cert, eta);
        let strict = build_min_tradeoff_at(&cert, 0.0);
        prop_assert_eq!(relaxed.lambda, strict.lambda);
        if cert.class.n_zero() > 0 {
            prop_assert!(strict.eval(0.8) > relaxed.eval(0.8));
        } else {
            prop_assert_eq!(strict.eval(0.8), relaxed.eval(0.8));
        }
    }
}
