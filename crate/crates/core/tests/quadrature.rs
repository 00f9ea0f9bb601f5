use dirand::quadrature::{bff_coefficients, gauss_radau, Quadrature};
use proptest::prelude::*;

#[test]
fn two_point_rule() {
    let q = gauss_radau(2, 1.0).unwrap();
    assert!((q.nodes[0] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(q.nodes[1], 1.0);
    assert!((q.weights[0] - 0.75).abs() < 1e-15);
    assert!((q.weights[1] - 0.25).abs() < 1e-15);
    assert!((q.integrate(|t| t * t) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn two_point_coefficients() {
    let c = bff_coefficients(&gauss_radau(2, 1.0).unwrap());
    assert!((c.c[0] - 3.246_063_842_000_168).abs() < 1e-12);
    assert!((c.c[1] - 0.360_673_760_222_240_85).abs() < 1e-14);
    assert_eq!(c.c0, c.c.iter().sum::<f64>());
}

#[test]
fn twelve_and_eighteen_terms_are_valid() {
    for m in [12, 18] {
        let q = gauss_radau(m, 1.0).unwrap();
        q.validate().unwrap();
        assert_eq!(*q.nodes.last().unwrap(), 1.0);
        assert!(q.nodes.iter().all(|&t| t > 0.0 && t <= 1.0));
        assert!(q.weights.iter().all(|&w| w > 0.0));
    }
}

#[test]
fn invalid_arguments() {
    assert!(gauss_radau(1, 1.0).is_err());
    assert!(gauss_radau(4, 0.0).is_err());
    assert!(gauss_radau(4, 1.5).is_err());
}

#[test]
fn serialized_shape() {
    let q = gauss_radau(3, 0.9999).unwrap();
    let v: serde_json::Value = serde_json::to_value(&q).unwrap();
    let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["endpoint", "m", "nodes", "weights"]);
    let back: Quadrature = serde_json::from_value(v).unwrap();
    assert_eq!(back, q);
}

proptest! {
    #[test]
    fn random_polynomials_integrate_exactly(
        m in 2usize..=18,
        endpoint in 0.1f64..=1.0,
        coeffs in prop::collection::vec(-10.0f64..10.0, 35),
    ) {
        let q = gauss_radau(m, endpoint).unwrap();
        let deg = 2 * m - 2;
        let c = &coeffs[..=deg];
        let poly = |t: f64| c.iter().rev().fold(0.0, |acc, &a| acc * t + a);
        let exact: f64 = c
            .iter()
            .enumerate()
            .map(|(k, a)| a * endpoint.powi(k as i32 + 1) / (k as f64 + 1.0))
            .sum();
        let scale = c.iter().fold(0.0f64, |s, a| s.max(a.abs()));
        prop_assert!((q.integrate(poly) - exact).abs() <= 1e-9 * scale);
    }
}
