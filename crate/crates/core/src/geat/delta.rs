//! Second-order correction of the smooth min-entropy bound, written twice:
//! once in the `beta` parameterization and once directly in the Renyi order
//! `alpha = (1 + 2 beta) / (1 + beta)`. The two must agree.

use std::f64::consts::{E, LN_2};

use super::GeatError;
use crate::quantum::w_quantum;
use crate::tradeoff::TradeoffProperties;

/// `1 - sqrt(1 - eps^2)` without cancellation.
pub(crate) fn one_minus_sqrt(eps: f64) -> f64 {
    eps * eps / (1.0 + (1.0 - eps * eps).sqrt())
}

/// `g(eps) = -log(1 - sqrt(1 - eps^2))`.
pub fn g_epsilon(eps: f64) -> f64 {
    -one_minus_sqrt(eps).log2()
}

/// `2 log d_K + Max(f) - Min_Sigma(f)`, the base-2 exponent of `zeta`.
pub fn zeta_exponent(props: &TradeoffProperties, d_k: u32) -> f64 {
    2.0 * f64::from(d_k).log2() + props.max_f - props.min_sigma
}

/// CHSH closed form of the same exponent:
/// `2 log d_K + lambda (gamma_0 (1 - nu') + w_Q)` with `gamma_0 = (1 - gamma) / gamma`.
pub fn zeta_exponent_chsh(lambda: f64, gamma: f64, nu_prime: f64, d_k: u32) -> f64 {
    let g0 = (1.0 - gamma) / gamma;
    2.0 * f64::from(d_k).log2() + lambda * (g0 * (1.0 - nu_prime) + w_quantum())
}

/// `ln(2^e + e^2)` for large `e` without forming `2^e`.
fn ln_zeta_plus_e2(exponent: f64) -> f64 {
    let lz = exponent * LN_2;
    if lz > 2.0 {
        lz + (2.0 - lz).exp().ln_1p()
    } else {
        2.0 + (lz - 2.0).exp().ln_1p()
    }
}

fn check(beta: f64, pr_omega: f64, n: u64, epsilon: f64) -> Result<(), GeatError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(GeatError::Beta(beta));
    }
    if !(pr_omega > 0.0 && pr_omega <= 1.0) {
        return Err(GeatError::PrOmega(pr_omega));
    }
    if n == 0 {
        return Err(GeatError::Param {
            field: "n",
            reason: "must be at least 1".into(),
        });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(GeatError::Param {
            field: "epsilon",
            reason: format!("{epsilon} outside (0, 1)"),
        });
    }
    Ok(())
}

/// Per-round correction
///
/// ```text
/// Delta = (ln2/2) beta [log(2 d_K^2 + 1) + V]^2
///       + (1/n) [((1+beta)/beta) g(eps) + ((1+2beta)/beta) log(1/Pr[Omega])]
///       + beta^2 / (6 ln2 (1-beta)^3) zeta^beta ln^3(zeta + e^2)
/// ```
///
/// with `V = sqrt(2 + Var_Sigma)` and `zeta = 2^(2 log d_K + Max - Min_Sigma)`.
/// Every term is a penalty.
pub fn correction_delta(
    props: &TradeoffProperties,
    d_k: u32,
    n: u64,
    epsilon: f64,
    beta: f64,
    pr_omega: f64,
) -> Result<f64, GeatError> {
    check(beta, pr_omega, n, epsilon)?;
    let n = n as f64;
    let v = (2.0 + props.var_sigma).sqrt();
    let log_dim = (2.0 * f64::from(d_k).powi(2) + 1.0).log2();
    let second = 0.5 * LN_2 * beta * (log_dim + v).powi(2);

    let smoothing = ((1.0 + beta) / beta * g_epsilon(epsilon)
        - (1.0 + 2.0 * beta) / beta * pr_omega.log2())
        / n;

    let ez = zeta_exponent(props, d_k);
    let zeta_beta = (beta * ez * LN_2).exp();
    let third = beta * beta / (6.0 * LN_2 * (1.0 - beta).powi(3)) * zeta_beta * ln_zeta_plus_e2(ez).powi(3);

    Ok(second + smoothing + third)
}

/// The same correction evaluated in the Renyi-order form
/// `((a-1)/(2-a)) (ln2/2) V_G^2 + (g(eps) + a log(1/Pr)) / ((a-1) n) + ((a-1)/(2-a))^2 K'(a)`.
pub fn correction_delta_alpha(
    props: &TradeoffProperties,
    d_k: u32,
    n: u64,
    epsilon: f64,
    beta: f64,
    pr_omega: f64,
) -> Result<f64, GeatError> {
    check(beta, pr_omega, n, epsilon)?;
    let alpha = (1.0 + 2.0 * beta) / (1.0 + beta);
    let ratio = (alpha - 1.0) / (2.0 - alpha);
    let d = f64::from(d_k);

    let v_g = (2.0 * d * d + 1.0).log2() + (2.0 + props.var_sigma).sqrt();
    let second = ratio * LN_2 / 2.0 * v_g * v_g;

    let smoothing = (g_epsilon(epsilon) + alpha * (1.0 / pr_omega).log2()) / ((alpha - 1.0) * n as f64);

    let ez = 2.0 * d.log2() + props.max_f - props.min_sigma;
    let k_prime = (2.0 - alpha).powi(3) / (6.0 * (3.0 - 2.0 * alpha).powi(3) * LN_2)
        * 2f64.powf(ratio * ez)
        * if ez * LN_2 < 700.0 {
            (2f64.powf(ez) + E * E).ln().powi(3)
        } else {
            ln_zeta_plus_e2(ez).powi(3)
        };
    Ok(second + smoothing + ratio * ratio * k_prime)
}

/// `beta` balancing the two leading terms of the correction,
/// `sqrt(g(eps) / (A n))` with `A = (ln2/2) [log(2 d_K^2 + 1) + V]^2`,
/// capped at 0.9. Scales as `n^(-1/2)`.
pub fn leading_order_beta(props: &TradeoffProperties, d_k: u32, n: u64, epsilon: f64) -> f64 {
    let v = (2.0 + props.var_sigma).sqrt();
    let a = 0.5 * LN_2 * ((2.0 * f64::from(d_k).powi(2) + 1.0).log2() + v).powi(2);
    (g_epsilon(epsilon) / (a * n as f64)).sqrt().min(0.9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_smoothing_term() {
        assert!((one_minus_sqrt(0.6) - 0.2).abs() < 1e-16);
        // 1 - sqrt(1 - 1e-24) is 5e-25 to leading order.
        assert!((g_epsilon(1e-12) - (2e24f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn ln_shift_both_branches() {
        for e in [0.0, 1.0, 2.8, 3.0, 10.0, 100.0] {
            let direct = (2f64.powf(e) + E * E).ln();
            assert!((ln_zeta_plus_e2(e) - direct).abs() < 1e-13 * direct, "{e}");
        }
        // Far past f64 range the leading term dominates.
        assert!((ln_zeta_plus_e2(5000.0) - 5000.0 * LN_2).abs() < 1e-9);
    }

    #[test]
    fn flat_tradeoff_closed_form() {
        let props = TradeoffProperties {
            max_f: 0.3,
            min_sigma: 0.3,
            var_sigma: 0.0,
        };
        let (beta, n, eps, pr) = (0.01, 1_000_000u64, 1e-6, 0.5);
        let got = correction_delta(&props, 2, n, eps, beta, pr).unwrap();
        let v = 2f64.sqrt();
        let zeta = 4f64;
        let want = 0.5 * LN_2 * beta * (9f64.log2() + v).powi(2)
            + ((1.0 + beta) / beta * g_epsilon(eps) + (1.0 + 2.0 * beta) / beta) / n as f64
            + beta * beta / (6.0 * LN_2 * (1.0 - beta).powi(3)) * zeta.powf(beta) * (zeta + E * E).ln().powi(3);
        assert!((got - want).abs() < 1e-15 * want);
    }

    #[test]
    fn argument_errors() {
        let p = TradeoffProperties {
            max_f: 1.0,
            min_sigma: 0.0,
            var_sigma: 1.0,
        };
        assert!(matches!(correction_delta(&p, 2, 10, 1e-6, 0.0, 0.5), Err(GeatError::Beta(_))));
        assert!(matches!(correction_delta(&p, 2, 10, 1e-6, 1.0, 0.5), Err(GeatError::Beta(_))));
        assert!(matches!(correction_delta(&p, 2, 10, 1e-6, 0.5, 0.0), Err(GeatError::PrOmega(_))));
    }
}
