//! Seeded randomness extraction by Toeplitz hashing and the output-length
//! law of the leftover hash lemma for delta-almost two-universal families.

mod bits;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bits::BitString;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractorError {
    #[error("hash family too weak for target eps'' (need 4 eps''^2 - delta_h + 1 > 0)")]
    HashTooWeak,
    #[error("invalid extractor parameter: {0}")]
    Parameter(String),
    #[error("input has {got} bits, the extractor expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("seed has {got} bits, the extractor expects {expected}")]
    SeedLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractorSpec {
    pub input_len: usize,
    pub output_len: usize,
    pub delta_h: f64,
    pub epsilon_prime: f64,
    pub epsilon_dprime: f64,
}

impl ExtractorSpec {
    /// Toeplitz spec with `eps' = eps'' = eps_ext / 2` and `delta_h = 1`.
    pub fn toeplitz(input_len: usize, output_len: usize, epsilon_ext: f64) -> Self {
        Self {
            input_len,
            output_len,
            delta_h: 1.0,
            epsilon_prime: epsilon_ext / 2.0,
            epsilon_dprime: epsilon_ext / 2.0,
        }
    }

    pub fn epsilon_ext(&self) -> f64 {
        self.epsilon_prime + self.epsilon_dprime
    }

    /// Seed bits consumed by the Toeplitz family.
    pub fn seed_len(&self) -> usize {
        if self.output_len == 0 {
            0
        } else {
            self.input_len + self.output_len - 1
        }
    }

    pub fn validate(&self) -> Result<(), ExtractorError> {
        check_eps(self.epsilon_prime, self.epsilon_dprime, self.delta_h).map(|_| ())
    }
}

fn check_eps(eps_prime: f64, eps_dprime: f64, delta_h: f64) -> Result<f64, ExtractorError> {
    if !(eps_prime > 0.0 && eps_prime.is_finite()) {
        return Err(ExtractorError::Parameter(format!("eps' must be positive, got {eps_prime}")));
    }
    if !(eps_dprime > 0.0 && eps_dprime.is_finite()) {
        return Err(ExtractorError::Parameter(format!("eps'' must be positive, got {eps_dprime}")));
    }
    if !(delta_h >= 1.0) {
        return Err(ExtractorError::Parameter(format!("delta_h must be >= 1, got {delta_h}")));
    }
    // 4 eps''^2 - (delta_h - 1) keeps full precision when delta_h = 1.
    let slack = 4.0 * eps_dprime * eps_dprime - (delta_h - 1.0);
    if !(slack > 0.0) {
        return Err(ExtractorError::HashTooWeak);
    }
    Ok(slack)
}

/// Entropy spent by the extractor:
/// `log(1 + 2/eps'^2) + log(1 / (4 eps''^2 - delta_h + 1))`, in bits.
pub fn extractor_loss(eps_prime: f64, eps_dprime: f64, delta_h: f64) -> Result<f64, ExtractorError> {
    let slack = check_eps(eps_prime, eps_dprime, delta_h)?;
    // 1 + 2/eps'^2 computed as ln(2/eps'^2) + ln1p(eps'^2/2) to avoid overflow for tiny eps'.
    let ratio = eps_prime * eps_prime / 2.0;
    let first = (-ratio.log2()) + ratio.ln_1p() / std::f64::consts::LN_2;
    Ok(first - slack.log2())
}

/// `floor(k_ext - extractor_loss)`, clamped at zero.
pub fn output_length(k_ext: f64, eps_prime: f64, eps_dprime: f64, delta_h: f64) -> Result<usize, ExtractorError> {
    if !(k_ext > 0.0 && k_ext.is_finite()) {
        return Err(ExtractorError::Parameter(format!("k_ext must be positive, got {k_ext}")));
    }
    let loss = extractor_loss(eps_prime, eps_dprime, delta_h)?;
    let l = (k_ext - loss).floor();
    Ok(if l > 0.0 { l as usize } else { 0 })
}

/// Multiplies `input` by the `output_len x input_len` Toeplitz matrix over
/// GF(2) whose first column is `seed[0..l]` and whose first row continues
/// with `seed[l..]`.
pub fn extract(input: &BitString, seed: &BitString, spec: &ExtractorSpec) -> Result<BitString, ExtractorError> {
    if input.len() != spec.input_len {
        return Err(ExtractorError::InputLength {
            expected: spec.input_len,
            got: input.len(),
        });
    }
    if seed.len() != spec.seed_len() {
        return Err(ExtractorError::SeedLength {
            expected: spec.seed_len(),
            got: seed.len(),
        });
    }
    let (n, l) = (spec.input_len, spec.output_len);
    if l == 0 {
        return Ok(BitString::zeros(0));
    }
    // Diagonal sequence r[l-1+j-i] = T[i][j]: reversed first column, then the row tail.
    let mut diag = BitString::zeros(n + l - 1);
    for k in 0..l {
        diag.set(k, seed.get(l - 1 - k));
    }
    for k in l..n + l - 1 {
        diag.set(k, seed.get(k));
    }

    let x = input.words();
    let mut out = BitString::zeros(l);
    for i in 0..l {
        let start = l - 1 - i;
        let mut acc = 0u64;
        for (w, &xw) in x.iter().enumerate() {
            acc ^= diag.window(start + 64 * w) & xw;
        }
        out.set(i, acc.count_ones() & 1 == 1);
    }
    Ok(out)
}
