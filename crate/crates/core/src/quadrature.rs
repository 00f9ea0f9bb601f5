//! Gauss-Radau rules on `(0, endpoint]` with the right endpoint as the fixed
//! node, and the logarithm-expansion coefficients derived from them.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_TERMS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature needs at least 2 terms, got {0}")]
    TooFewTerms(usize),
    #[error("quadrature supports at most {MAX_TERMS} terms, got {0}")]
    TooManyTerms(usize),
    #[error("endpoint must lie in (0, 1], got {0}")]
    Endpoint(f64),
    #[error("invalid quadrature: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    pub m: usize,
    pub endpoint: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `c_i = w_i / (t_i ln 2)` and `c0 = sum_i c_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BffCoefficients {
    pub c: Vec<f64>,
    pub c0: f64,
}

/// Radau rule on `[0, endpoint]` via the Jacobi matrix of the Legendre
/// polynomials with its last diagonal entry modified so that `+1` is an
/// eigenvalue.
pub fn gauss_radau(m: usize, endpoint: f64) -> Result<Quadrature, QuadratureError> {
    if m < 2 {
        return Err(QuadratureError::TooFewTerms(m));
    }
    if m > MAX_TERMS {
        return Err(QuadratureError::TooManyTerms(m));
    }
    if !(endpoint > 0.0 && endpoint <= 1.0) {
        return Err(QuadratureError::Endpoint(endpoint));
    }

    // Monic Legendre recurrence: p_{k+1} = x p_k - b_k p_{k-1}, b_k = k^2 / (4k^2 - 1).
    let b = |k: usize| {
        let k = k as f64;
        k * k / (4.0 * k * k - 1.0)
    };
    // Ratio p_{m-2}(1) / p_{m-1}(1), propagated as a ratio to stay bounded.
    let mut ratio = 0.0; // p_{-1}/p_0
    for k in 0..m - 1 {
        // p_{k+1}(1) / p_k(1) = 1 - b_k * p_{k-1}(1) / p_k(1)
        let next = 1.0 - if k == 0 { 0.0 } else { b(k) * ratio };
        ratio = 1.0 / next;
    }
    let last_diag = 1.0 - b(m - 1) * ratio;

    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let off = b(k).sqrt();
        jac[(k, k - 1)] = off;
        jac[(k - 1, k)] = off;
    }
    jac[(m - 1, m - 1)] = last_diag;

    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            // Legendre weight has total mass 2 on [-1, 1].
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let half = 0.5 * endpoint;
    let mut nodes: Vec<f64> = pairs.iter().map(|&(x, _)| half * (x + 1.0)).collect();
    let weights: Vec<f64> = pairs.iter().map(|&(_, w)| half * w).collect();
    nodes[m - 1] = endpoint;

    let q = Quadrature {
        m,
        endpoint,
        nodes,
        weights,
    };
    q.validate()?;
    Ok(q)
}

impl Quadrature {
    /// Structural checks: lengths, node ordering and containment, positive
    /// weights, and total mass equal to the endpoint.
    pub fn validate(&self) -> Result<(), QuadratureError> {
        let fail = |s: String| Err(QuadratureError::Invalid(s));
        if self.m < 2 {
            return Err(QuadratureError::TooFewTerms(self.m));
        }
        if !(self.endpoint > 0.0 && self.endpoint <= 1.0) {
            return Err(QuadratureError::Endpoint(self.endpoint));
        }
        if self.nodes.len() != self.m || self.weights.len() != self.m {
            return fail(format!(
                "expected {} nodes and weights, got {} and {}",
                self.m,
                self.nodes.len(),
                self.weights.len()
            ));
        }
        if self.nodes[0] <= 0.0 || self.nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return fail("nodes must be strictly increasing in (0, endpoint]".into());
        }
        if self.nodes[self.m - 1] != self.endpoint {
            return fail("last node must equal the endpoint".into());
        }
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return fail("weights must be positive".into());
        }
        let mass: f64 = self.weights.iter().sum();
        if (mass - self.endpoint).abs() > 1e-12 {
            return fail(format!("weights sum to {mass}, expected {}", self.endpoint));
        }
        Ok(())
    }

    /// `sum_i w_i g(t_i)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t))
            .sum()
    }
}

pub fn bff_coefficients(q: &Quadrature) -> BffCoefficients {
    let ln2 = std::f64::consts::LN_2;
    let c: Vec<f64> = q
        .nodes
        .iter()
        .zip(&q.weights)
        .map(|(&t, &w)| w / (t * ln2))
        .collect();
    let c0 = c.iter().sum();
    BffCoefficients { c, c0 }
}
