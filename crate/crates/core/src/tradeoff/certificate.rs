use serde::{Deserialize, Serialize};

use super::{MinTradeoff, TradeoffError};
use crate::quadrature::{bff_coefficients, Quadrature};
use crate::quantum::{w_quantum, ZeroClass, W_CLASSICAL};
use crate::randomness::RandType;

/// Top-level key of the certificate file.
pub const CERTIFICATE_KEY: &str = "di_rand_certificate_v1";

/// Slack allowed between the dual bound at the certified point and the
/// recorded primal rate.
pub const DUAL_FEASIBILITY_TOL: f64 = 1e-6;

/// Per-term dual variables and primal optima of the quadrature SDPs.
///
/// Term `i` (for `i < m`) carries `lambda_win_terms[i]`, the row
/// `lambda_z_terms[i]` (one entry per zero constraint) and
/// `primal_terms[i]`. The endpoint term enters only through `c_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualCertificate {
    pub class: ZeroClass,
    pub rand_type: RandType,
    pub w_exp: f64,
    pub w_tol: f64,
    pub eta_z: f64,
    pub quadrature: Quadrature,
    pub lambda_win_terms: Vec<f64>,
    pub lambda_z_terms: Vec<Vec<f64>>,
    pub primal_terms: Vec<f64>,
    pub gamma_win_star: f64,
    pub gamma_z_star: Vec<f64>,
    pub asymptotic_rate: f64,
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    di_rand_certificate_v1: DualCertificate,
}

/// Aggregated dual quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregates {
    /// `sum_{i<m} c_i lambda_win^i`.
    pub lambda_w: f64,
    /// `sum_{i<m} c_i lambda_z^i`, one entry per constraint.
    pub lambda_z: Vec<f64>,
    /// `-lambda_w gamma*_win + lambda_z . gamma*_z + c_m + sum_{i<m} c_i Xi*_i`.
    pub c_const: f64,
}

fn invariant(field: &'static str, reason: impl Into<String>) -> TradeoffError {
    TradeoffError::Invariant {
        field,
        reason: reason.into(),
    }
}

/// Parses and audits a certificate file.
pub fn load_certificate(bytes: &[u8]) -> Result<DualCertificate, TradeoffError> {
    let file: CertificateFile =
        serde_json::from_slice(bytes).map_err(|e| TradeoffError::Schema(e.to_string()))?;
    let cert = file.di_rand_certificate_v1;
    cert.validate()?;
    Ok(cert)
}

impl DualCertificate {
    pub fn to_json(&self) -> String {
        let file = CertificateFile {
            di_rand_certificate_v1: self.clone(),
        };
        serde_json::to_string_pretty(&file).expect("certificate serializes")
    }

    /// Point at which the dual problem was solved, `w_exp - w_tol`.
    pub fn certified_nu(&self) -> f64 {
        self.w_exp - self.w_tol
    }

    pub fn validate(&self) -> Result<(), TradeoffError> {
        let w_q = w_quantum();
        if !(self.w_exp >= W_CLASSICAL && self.w_exp <= w_q) {
            return Err(invariant(
                "w_exp",
                format!("{} outside [{W_CLASSICAL}, {w_q}]", self.w_exp),
            ));
        }
        if !(self.w_tol > 0.0 && self.w_tol < 1.0) {
            return Err(invariant("w_tol", format!("{} outside (0, 1)", self.w_tol)));
        }
        if !(self.eta_z > 0.0 && self.eta_z < 1.0) {
            return Err(invariant("eta_z", format!("{} outside (0, 1)", self.eta_z)));
        }
        if !(self.asymptotic_rate >= 0.0 && self.asymptotic_rate <= 2.0) {
            return Err(invariant(
                "asymptotic_rate",
                format!("{} outside [0, 2]", self.asymptotic_rate),
            ));
        }
        self.quadrature
            .validate()
            .map_err(|e| invariant("quadrature", e.to_string()))?;

        let terms = self.quadrature.m - 1;
        let n_zero = self.class.n_zero();
        if self.lambda_win_terms.len() != terms {
            return Err(invariant(
                "lambda_win_terms",
                format!("expected m-1 = {terms} entries, got {}", self.lambda_win_terms.len()),
            ));
        }
        if self.primal_terms.len() != terms {
            return Err(invariant(
                "primal_terms",
                format!("expected m-1 = {terms} entries, got {}", self.primal_terms.len()),
            ));
        }
        if self.lambda_z_terms.len() != terms {
            return Err(invariant(
                "lambda_z_terms",
                format!("expected m-1 = {terms} rows, got {}", self.lambda_z_terms.len()),
            ));
        }
        if let Some((i, row)) = self
            .lambda_z_terms
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != n_zero)
        {
            return Err(invariant(
                "lambda_z_terms",
                format!(
                    "row {i} has {} entries but class {} has n_zero = {n_zero}",
                    row.len(),
                    self.class
                ),
            ));
        }
        if self.gamma_z_star.len() != n_zero {
            return Err(invariant(
                "gamma_z_star",
                format!(
                    "{} entries but class {} has n_zero = {n_zero}",
                    self.gamma_z_star.len(),
                    self.class
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.gamma_win_star) {
            return Err(invariant("gamma_win_star", "must lie in [0, 1]"));
        }
        let all_finite = self
            .lambda_win_terms
            .iter()
            .chain(self.lambda_z_terms.iter().flatten())
            .chain(&self.primal_terms)
            .chain(&self.gamma_z_star)
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(invariant("lambda_win_terms", "non-finite dual or primal value"));
        }

        let agg = self.aggregate();
        if agg.lambda_w < 0.0 {
            return Err(invariant(
                "lambda_win_terms",
                format!("aggregated slope {} is negative", agg.lambda_w),
            ));
        }
        let margin = self.dual_feasibility_margin();
        if margin < -DUAL_FEASIBILITY_TOL {
            return Err(invariant(
                "asymptotic_rate",
                format!(
                    "dual bound at nu = {} exceeds the recorded rate by {}",
                    self.certified_nu(),
                    -margin
                ),
            ));
        }
        Ok(())
    }

    /// Recomputes the aggregated slope, zero-constraint duals and intercept
    /// constant from the per-term data.
    pub fn aggregate(&self) -> Aggregates {
        let coeffs = bff_coefficients(&self.quadrature);
        let m = self.quadrature.m;
        let inner = &coeffs.c[..m - 1];
        let c_m = coeffs.c[m - 1];

        let lambda_w: f64 = inner
            .iter()
            .zip(&self.lambda_win_terms)
            .map(|(c, l)| c * l)
            .sum();
        let n_zero = self.gamma_z_star.len();
        let mut lambda_z = vec![0.0; n_zero];
        for (c, row) in inner.iter().zip(&self.lambda_z_terms) {
            for (acc, l) in lambda_z.iter_mut().zip(row) {
                *acc += c * l;
            }
        }
        let primal: f64 = inner.iter().zip(&self.primal_terms).map(|(c, x)| c * x).sum();
        let zero_part: f64 = lambda_z
            .iter()
            .zip(&self.gamma_z_star)
            .map(|(l, g)| l * g)
            .sum();
        Aggregates {
            c_const: -lambda_w * self.gamma_win_star + zero_part + c_m + primal,
            lambda_w,
            lambda_z,
        }
    }

    /// `asymptotic_rate - f(w_exp - w_tol)` with the certificate's own `eta_z`.
    pub fn dual_feasibility_margin(&self) -> f64 {
        let f = build_min_tradeoff(self);
        self.asymptotic_rate - f.eval(self.certified_nu())
    }
}

/// Affine min-tradeoff function with the certificate's zero tolerance.
pub fn build_min_tradeoff(cert: &DualCertificate) -> MinTradeoff {
    build_min_tradeoff_at(cert, cert.eta_z)
}

/// `f(nu) = lambda_w nu - lambda_z . eta_z + C`, with every zero constraint
/// relaxed to the same tolerance `eta_z`.
pub fn build_min_tradeoff_at(cert: &DualCertificate, eta_z: f64) -> MinTradeoff {
    let agg = cert.aggregate();
    let penalty: f64 = agg.lambda_z.iter().sum::<f64>() * eta_z;
    MinTradeoff {
        lambda: agg.lambda_w,
        c_lambda: agg.c_const - penalty,
    }
}
