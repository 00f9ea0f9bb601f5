//! Finite-size rate engine: the second-order correction, completeness and
//! soundness, input-randomness consumption and grid optimization over
//! `(beta, nu', gamma)`.

mod delta;
mod params;
mod scan;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use delta::{
    correction_delta, correction_delta_alpha, g_epsilon, leading_order_beta, zeta_exponent, zeta_exponent_chsh,
};
pub use params::{ProtocolParams, DEFAULT_EPSILON, DEFAULT_EPSILON_EXT, DEFAULT_ETA_Z, DEFAULT_W_TOL};
pub use scan::{default_beta_grid, default_nu_grid, lin_grid, log_grid, optimize, scan, write_rate_csv, RATE_CSV_SCHEMA};

use crate::extractor::{extractor_loss, ExtractorError};
use crate::quantum::w_quantum;
use crate::tradeoff::{build_min_tradeoff_at, chsh_properties, crossover, DualCertificate, TradeoffError};

#[derive(Debug, Error, PartialEq)]
pub enum GeatError {
    #[error("invalid protocol parameter `{field}`: {reason}")]
    Param { field: &'static str, reason: String },
    #[error("beta must lie in (0, 1), got {0}")]
    Beta(f64),
    #[error("non-abort probability must lie in (0, 1], got {0}")]
    PrOmega(f64),
    #[error("certificate is for {cert_class}/{cert_rand}, parameters ask for {class}/{rand}")]
    Mismatch {
        cert_class: String,
        cert_rand: String,
        class: String,
        rand: String,
    },
    #[error("evaluation point nu = {0} lies outside [1 - w_Q, w_Q]")]
    NuOutOfRange(f64),
    #[error("empty or invalid {0} grid")]
    Grid(&'static str),
    #[error(transparent)]
    Tradeoff(#[from] TradeoffError),
    #[error(transparent)]
    Extractor(#[from] ExtractorError),
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Honest non-abort lower bound
/// `(1 - e^(-2 w_tol^2 n)) (1 - e^(-2 eta_z'^2 n))^n_zero`.
pub fn pr_omega_bound(n: f64, w_tol: f64, eta_z_prime: f64, n_zero: usize) -> f64 {
    let score = -(-2.0 * w_tol * w_tol * n).exp_m1();
    let zero = -(-2.0 * eta_z_prime * eta_z_prime * n).exp_m1();
    score * zero.powi(n_zero as i32)
}

/// Completeness `1 - Pr[Omega]` for raw arguments; `n = 0` gives 1.
pub fn completeness_bound(n: f64, w_tol: f64, eta_z_prime: f64, n_zero: usize) -> f64 {
    1.0 - pr_omega_bound(n, w_tol, eta_z_prime, n_zero)
}

pub fn pr_omega(params: &ProtocolParams) -> f64 {
    pr_omega_bound(params.n as f64, params.w_tol, params.eta_z_prime, params.n_zero())
}

pub fn completeness(params: &ProtocolParams) -> f64 {
    completeness_bound(params.n as f64, params.w_tol, params.eta_z_prime, params.n_zero())
}

/// `eps_s = eps_EXT + 2 eps`.
pub fn soundness(params: &ProtocolParams) -> f64 {
    soundness_bound(params.epsilon, params.epsilon_ext)
}

pub fn soundness_bound(epsilon: f64, epsilon_ext: f64) -> f64 {
    epsilon_ext + 2.0 * epsilon
}

/// Input bits consumed per round, `gamma H(p) + h(gamma)`.
pub fn input_consumption(params: &ProtocolParams) -> f64 {
    input_consumption_at(params.gamma, params.input_dist_entropy)
}

pub fn input_consumption_at(gamma: f64, input_dist_entropy: f64) -> f64 {
    gamma * input_dist_entropy + binary_entropy(gamma)
}

/// Per-round extractor loss with `eps' = eps'' = eps_EXT / 2` and `delta_h = 1`.
pub fn extractor_loss_per_round(params: &ProtocolParams) -> Result<f64, GeatError> {
    let half = params.epsilon_ext / 2.0;
    Ok(extractor_loss(half, half, 1.0)? / params.n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub n: u64,
    pub gamma: f64,
    pub beta: f64,
    pub nu_prime: f64,
    pub h: f64,
    pub delta: f64,
    pub delta_ext: f64,
    pub delta_inp: f64,
    /// `max(raw_rate, 0)`.
    pub rate: f64,
    /// `h - delta - delta_ext - delta_inp`.
    pub raw_rate: f64,
    /// `n (h - delta)`, the bits handed to the extractor.
    pub smooth_min_entropy_total: f64,
    pub epsilon_c: f64,
    pub epsilon_s: f64,
    pub pr_omega_bound: f64,
}

/// Finite rate at one `(beta, nu')` point. `h` is the certificate's
/// min-tradeoff function at `w_exp - w_tol`, with the zero constraints
/// relaxed to `params.eta_z`.
pub fn finite_rate(
    cert: &DualCertificate,
    params: &ProtocolParams,
    beta: f64,
    nu_prime: f64,
) -> Result<RateBreakdown, GeatError> {
    if cert.class != params.class || cert.rand_type != params.rand_type {
        return Err(GeatError::Mismatch {
            cert_class: cert.class.to_string(),
            cert_rand: cert.rand_type.to_string(),
            class: params.class.to_string(),
            rand: params.rand_type.to_string(),
        });
    }
    params.validate()?;
    let w_q = w_quantum();
    let nu = params.w_exp - params.w_tol;
    if !(nu >= 1.0 - w_q && nu <= w_q) {
        return Err(GeatError::NuOutOfRange(nu));
    }
    if (nu - cert.certified_nu()).abs() > cert.w_tol {
        log::debug!(
            "evaluating at nu = {nu}, more than w_tol = {} away from the certified point {}",
            cert.w_tol,
            cert.certified_nu()
        );
    }

    let f = build_min_tradeoff_at(cert, params.eta_z);
    let h = f.eval(nu);
    let cf = crossover(f, params.gamma, nu_prime)?;
    let props = chsh_properties(&cf);
    let pr = pr_omega(params);
    let delta = correction_delta(&props, params.d_k, params.n, params.epsilon, beta, pr)?;
    let delta_ext = extractor_loss_per_round(params)?;
    let delta_inp = input_consumption(params);
    let raw_rate = h - delta - delta_ext - delta_inp;

    Ok(RateBreakdown {
        n: params.n,
        gamma: params.gamma,
        beta,
        nu_prime,
        h,
        delta,
        delta_ext,
        delta_inp,
        rate: raw_rate.max(0.0),
        raw_rate,
        smooth_min_entropy_total: params.n as f64 * (h - delta),
        epsilon_c: 1.0 - pr,
        epsilon_s: soundness(params),
        pr_omega_bound: pr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ZeroClass;
    use crate::randomness::RandType;

    #[test]
    fn completeness_examples() {
        let eps_c = completeness_bound(1e7, 1e-4, 5e-4, 3);
        assert!((eps_c - 0.8223).abs() < 5e-4, "{eps_c}");
        assert_eq!(completeness_bound(0.0, 1e-4, 5e-4, 3), 1.0);
        let e = completeness_bound(1e6, 1e-3, 5e-4, 0);
        assert!((e - (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn soundness_examples() {
        assert_eq!(soundness_bound(0.0, 0.0), 0.0);
        assert!((soundness_bound(1e-6, 1e-9) - 2.001e-6).abs() < 1e-20);
        let p = ProtocolParams::new(ZeroClass::Chsh, RandType::Local, 10);
        assert_eq!(soundness(&p), 1e-15 + 2e-12);
    }

    #[test]
    fn input_consumption_examples() {
        assert_eq!(input_consumption_at(1.0, 2.0), 2.0);
        assert_eq!(input_consumption_at(0.5, 2.0), 2.0);
        assert!(input_consumption_at(1e-9, 2.0) < 1e-7);
    }

    #[test]
    fn params_validation() {
        let p = ProtocolParams::new(ZeroClass::TwoA, RandType::Global, 100);
        assert_eq!(p.d_k, 4);
        p.validate().unwrap();
        let mut log9 = p.clone();
        log9.d_k = 2;
        log9.validate().unwrap();
        let mut bad = p.clone();
        bad.d_k = 3;
        assert!(matches!(bad.validate(), Err(GeatError::Param { field: "d_k", .. })));
        let mut local = ProtocolParams::new(ZeroClass::TwoA, RandType::Local, 100);
        local.d_k = 4;
        assert!(local.validate().is_err());
        assert!(p.clone().with_gamma(0.0).validate().is_err());
        let mut eta = p.clone();
        eta.eta_z_prime = eta.eta_z;
        assert!(matches!(eta.validate(), Err(GeatError::Param { field: "eta_z_prime", .. })));
    }
}
