//! Writes the synthetic certificates in `fixtures/`.
//!
//! They stand in for solver output: the asymptotic rates are the published
//! values, the slope is either the analytic CHSH tangent or 1.5 times the
//! chord from the classical bound, and the per-term duals are spread evenly
//! over the quadrature so the aggregate reproduces those numbers.
//!
//! Usage: `cargo run -p dirand-core --example make_fixtures -- <dir>`

use std::path::PathBuf;

use dirand::quadrature::{bff_coefficients, gauss_radau};
use dirand::quantum::{correlation, strategy_for_class, w_quantum, winning_probability, GameSpec, W_CLASSICAL};
use dirand::tradeoff::DualCertificate;
use dirand::{RandType, ZeroClass};

const M: usize = 18;
const W_TOL: f64 = 2e-5;
const ETA_Z: f64 = 1e-10;
/// Total zero-constraint dual weight per constraint.
const LAMBDA_Z_TOTAL: f64 = 5.0;

/// Slope of `1 - h(1/2 + 1/2 sqrt(S^2/4 - 1))` in the winning probability,
/// with `S = 8 w - 4`.
fn chsh_tangent(w: f64) -> f64 {
    let s = 8.0 * w - 4.0;
    let root = (s * s / 4.0 - 1.0).sqrt();
    let p = 0.5 + 0.5 * root;
    let dp_ds = 0.5 * (s / 4.0) / root;
    -((1.0 - p) / p).log2() * dp_ds * 8.0
}

fn certificate(class: ZeroClass, rand_type: RandType, rate: f64) -> DualCertificate {
    let quadrature = gauss_radau(M, 1.0).expect("valid rule");
    let coeffs = bff_coefficients(&quadrature);
    let inner: f64 = coeffs.c[..M - 1].iter().sum();
    let c_m = coeffs.c[M - 1];

    let w_exp = match class {
        ZeroClass::Chsh => w_quantum(),
        _ => winning_probability(&correlation(&strategy_for_class(class)), &GameSpec::chsh()),
    };
    let lambda = match class {
        ZeroClass::Chsh => chsh_tangent(w_exp - W_TOL),
        _ => 1.5 * rate / (w_exp - W_CLASSICAL),
    };
    let n_zero = class.n_zero();
    DualCertificate {
        class,
        rand_type,
        w_exp,
        w_tol: W_TOL,
        eta_z: ETA_Z,
        quadrature,
        lambda_win_terms: vec![lambda / inner; M - 1],
        lambda_z_terms: vec![vec![LAMBDA_Z_TOTAL / inner; n_zero]; M - 1],
        primal_terms: vec![(rate - c_m) / inner; M - 1],
        gamma_win_star: w_exp,
        gamma_z_star: vec![0.0; n_zero],
        asymptotic_rate: rate,
    }
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir).expect("create output directory");
    let specs = [
        ("chsh_local.json", ZeroClass::Chsh, RandType::Local, 0.9981),
        ("2a_local.json", ZeroClass::TwoA, RandType::Local, 0.9992),
        ("2a_global.json", ZeroClass::TwoA, RandType::Global, 1.7964),
        ("3b_blind.json", ZeroClass::ThreeB, RandType::Blind, 0.9238),
    ];
    for (name, class, rand, rate) in specs {
        let cert = certificate(class, rand, rate);
        cert.validate().expect("fixture passes its own audit");
        std::fs::write(dir.join(name), cert.to_json() + "\n").expect("write fixture");
        println!(
            "{name}: slope {:.4}, margin {:.3e}, h(0.75) = {:.4}",
            cert.aggregate().lambda_w,
            cert.dual_feasibility_margin(),
            dirand::tradeoff::build_min_tradeoff(&cert).eval(0.75)
        );
    }
}
