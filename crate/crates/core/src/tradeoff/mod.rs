//! Dual certificates, affine min-tradeoff functions and their crossover
//! (spot-checking) version.
//!
//! Test statistics are binary (`c = 1` for a won test round, `c = 0` for a
//! lost one), so an affine tradeoff is determined by its slope `lambda` and
//! intercept `c_lambda`: `f(q) = lambda * q(1) + c_lambda`.

mod certificate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use certificate::{
    build_min_tradeoff, build_min_tradeoff_at, load_certificate, Aggregates, DualCertificate,
    CERTIFICATE_KEY, DUAL_FEASIBILITY_TOL,
};

use crate::quantum::{w_quantum, W_CLASSICAL};

#[derive(Debug, Error, PartialEq)]
pub enum TradeoffError {
    #[error("certificate schema error: {0}")]
    Schema(String),
    #[error("certificate invariant violated in `{field}`: {reason}")]
    Invariant { field: &'static str, reason: String },
    #[error("testing ratio must be positive")]
    NonPositiveGamma,
    #[error("testing ratio must not exceed 1, got {0}")]
    GammaAboveOne(f64),
    #[error("nu' must lie in [0, 1], got {0}")]
    NuPrime(f64),
    #[error("crossover requires a nonnegative slope, got {0}")]
    NegativeSlope(f64),
    #[error("w_q must lie in (0.75, 1], got {0}")]
    QuantumBound(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinTradeoff {
    pub lambda: f64,
    pub c_lambda: f64,
}

impl MinTradeoff {
    pub fn new(lambda: f64, c_lambda: f64) -> Self {
        Self { lambda, c_lambda }
    }

    /// Value at winning frequency `nu`.
    pub fn eval(&self, nu: f64) -> f64 {
        self.lambda * nu + self.c_lambda
    }

    /// Value on the point distribution `delta_c`, `c` in {0, 1}.
    pub fn at_outcome(&self, c: bool) -> f64 {
        self.eval(if c { 1.0 } else { 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverTradeoff {
    pub base: MinTradeoff,
    pub gamma: f64,
    pub nu_prime: f64,
    /// Value on generation rounds, `lambda nu' + c_lambda`.
    pub f_perp: f64,
}

/// Crossover tradeoff for testing probability `gamma`, with the
/// generation-round value placed at `nu_prime` on the base line.
pub fn crossover(f: MinTradeoff, gamma: f64, nu_prime: f64) -> Result<CrossoverTradeoff, TradeoffError> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(TradeoffError::NonPositiveGamma);
    }
    if gamma > 1.0 {
        return Err(TradeoffError::GammaAboveOne(gamma));
    }
    if !(0.0..=1.0).contains(&nu_prime) {
        return Err(TradeoffError::NuPrime(nu_prime));
    }
    if f.lambda < 0.0 {
        return Err(TradeoffError::NegativeSlope(f.lambda));
    }
    Ok(CrossoverTradeoff {
        base: f,
        gamma,
        nu_prime,
        f_perp: f.eval(nu_prime),
    })
}

impl CrossoverTradeoff {
    /// `f_gamma(delta_c)` for a test outcome `c`.
    pub fn at_test(&self, c: bool) -> f64 {
        let inv = 1.0 / self.gamma;
        inv * self.base.at_outcome(c) + (1.0 - inv) * self.f_perp
    }

    /// `f_gamma(delta_perp)`.
    pub fn at_generation(&self) -> f64 {
        self.f_perp
    }

    /// `f_gamma(q')` for the extended distribution with `q'(perp) = 1 - gamma`
    /// and `q'(c) = gamma q(c)`, where `q(1) = nu`.
    pub fn eval_extended(&self, nu: f64) -> f64 {
        let g = self.gamma;
        (1.0 - g) * self.at_generation()
            + g * nu * self.at_test(true)
            + g * (1.0 - nu) * self.at_test(false)
    }
}

/// Max, Min over feasible statistics, and maximal variance of a crossover
/// tradeoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffProperties {
    pub max_f: f64,
    pub min_sigma: f64,
    pub var_sigma: f64,
}

/// Closed-form properties over feasible winning frequencies
/// `nu in [1 - w_q, w_q]`.
pub fn properties(cf: &CrossoverTradeoff, w_q: f64) -> Result<TradeoffProperties, TradeoffError> {
    if !(w_q > W_CLASSICAL && w_q <= 1.0) {
        return Err(TradeoffError::QuantumBound(w_q));
    }
    let MinTradeoff { lambda, c_lambda } = cf.base;
    let (g, nup) = (cf.gamma, cf.nu_prime);
    let inv = 1.0 / g;

    let max_f = (1.0 - inv) * lambda * nup + lambda * inv + c_lambda;
    let min_sigma = (1.0 - w_q) * lambda + c_lambda;

    let nu0 = 0.5 * inv + (1.0 - inv) * nup;
    let d = lambda * lambda * (0.25 * inv * inv + inv * (1.0 - inv) * (1.0 - nup) * nup);
    let nearest = nu0.clamp(1.0 - w_q, w_q);
    let var_sigma = d - lambda * lambda * (nearest - nu0).powi(2);

    Ok(TradeoffProperties {
        max_f,
        min_sigma,
        var_sigma,
    })
}

/// Properties with the CHSH quantum bound.
pub fn chsh_properties(cf: &CrossoverTradeoff) -> TradeoffProperties {
    properties(cf, w_quantum()).expect("Tsirelson bound lies in (0.75, 1]")
}
