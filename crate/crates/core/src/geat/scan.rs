use std::io::Write;

use rayon::prelude::*;

use super::{finite_rate, GeatError, ProtocolParams, RateBreakdown};
use crate::tradeoff::DualCertificate;

/// First line of every rate CSV.
pub const RATE_CSV_SCHEMA: &str = "# di_rand_rate_csv v1";

const CSV_COLUMNS: [&str; 11] = [
    "n", "gamma", "beta", "nu_prime", "h", "delta", "delta_inp", "delta_ext", "rate", "epsilon_c", "epsilon_s",
];

/// `k` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp())
        .collect()
}

/// `k` evenly spaced points from `lo` to `hi` inclusive.
pub fn lin_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    (0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
        .collect()
}

/// 50 log-spaced points in `[1e-6, 0.9]`.
pub fn default_beta_grid() -> Vec<f64> {
    log_grid(1e-6, 0.9, 50)
}

/// 21 points in `[0, 1]`.
pub fn default_nu_grid() -> Vec<f64> {
    lin_grid(0.0, 1.0, 21)
}

fn check_grids(beta: &[f64], nu: &[f64], gamma: &[f64]) -> Result<(), GeatError> {
    if beta.is_empty() || !beta.iter().all(|b| *b > 0.0 && *b < 1.0) {
        return Err(GeatError::Grid("beta"));
    }
    if nu.is_empty() || !nu.iter().all(|v| (0.0..=1.0).contains(v)) {
        return Err(GeatError::Grid("nu'"));
    }
    if gamma.is_empty() || !gamma.iter().all(|g| *g > 0.0 && *g <= 1.0) {
        return Err(GeatError::Grid("gamma"));
    }
    Ok(())
}

/// Evaluates every grid point, in `(gamma, beta, nu')` row-major order.
pub fn scan(
    cert: &DualCertificate,
    params: &ProtocolParams,
    beta_grid: &[f64],
    nu_grid: &[f64],
    gamma_grid: &[f64],
) -> Result<Vec<RateBreakdown>, GeatError> {
    check_grids(beta_grid, nu_grid, gamma_grid)?;
    let nu = params.w_exp - params.w_tol;
    if (nu - cert.certified_nu()).abs() > cert.w_tol {
        log::warn!(
            "evaluating at nu = {nu}, more than w_tol = {} away from the certified point {}",
            cert.w_tol,
            cert.certified_nu()
        );
    }
    let points: Vec<(f64, f64, f64)> = gamma_grid
        .iter()
        .flat_map(|&g| {
            beta_grid
                .iter()
                .flat_map(move |&b| nu_grid.iter().map(move |&v| (g, b, v)))
        })
        .collect();
    points
        .par_iter()
        .map(|&(g, b, v)| finite_rate(cert, &params.clone().with_gamma(g), b, v))
        .collect()
}

fn better(a: &RateBreakdown, b: &RateBreakdown) -> bool {
    let key = |r: &RateBreakdown| if r.raw_rate.is_nan() { f64::NEG_INFINITY } else { r.raw_rate };
    let (ka, kb) = (key(a), key(b));
    if ka != kb {
        return ka > kb;
    }
    (a.beta, a.nu_prime, a.gamma) < (b.beta, b.nu_prime, b.gamma)
}

/// Best point of the grid product, ranked by the unclamped rate. Ties go
/// to the lexicographically smallest `(beta, nu', gamma)`, so the result
/// does not depend on evaluation order.
pub fn optimize(
    cert: &DualCertificate,
    params: &ProtocolParams,
    beta_grid: &[f64],
    nu_grid: &[f64],
    gamma_grid: &[f64],
) -> Result<RateBreakdown, GeatError> {
    let all = scan(cert, params, beta_grid, nu_grid, gamma_grid)?;
    let mut best = all[0];
    for r in &all[1..] {
        if better(r, &best) {
            best = *r;
        }
    }
    Ok(best)
}

/// Writes the schema line, a header and one row per breakdown.
pub fn write_rate_csv<W: Write>(mut out: W, rows: &[RateBreakdown]) -> std::io::Result<()> {
    writeln!(out, "{RATE_CSV_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.gamma.to_string(),
            r.beta.to_string(),
            r.nu_prime.to_string(),
            r.h.to_string(),
            r.delta.to_string(),
            r.delta_inp.to_string(),
            r.delta_ext.to_string(),
            r.rate.to_string(),
            r.epsilon_c.to_string(),
            r.epsilon_s.to_string(),
        ])?;
    }
    w.flush()
}
