use serde::{Deserialize, Serialize};

use super::GeatError;
use crate::quantum::ZeroClass;
use crate::randomness::RandType;

pub const DEFAULT_W_TOL: f64 = 1e-4;
pub const DEFAULT_ETA_Z: f64 = 1e-3;
pub const DEFAULT_EPSILON: f64 = 1e-12;
pub const DEFAULT_EPSILON_EXT: f64 = 1e-15;

/// Parameters of one protocol run: round count, testing ratio, thresholds
/// and security targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: u64,
    pub gamma: f64,
    pub w_exp: f64,
    pub w_tol: f64,
    pub eta_z: f64,
    pub eta_z_prime: f64,
    pub epsilon: f64,
    pub epsilon_ext: f64,
    pub rand_type: RandType,
    pub class: ZeroClass,
    /// Shannon entropy of the test-round input distribution, in bits.
    pub input_dist_entropy: f64,
    /// Output alphabet size per round.
    pub d_k: u32,
}

impl ProtocolParams {
    /// Defaults: `gamma = 1`, `w_tol = 1e-4`, `eta_z = 1e-3`,
    /// `eta_z' = eta_z / 2`, `epsilon = 1e-12`, `epsilon_ext = 1e-15`,
    /// uniform inputs and the natural `d_k` of `rand_type`.
    /// `w_exp` is left at the CHSH quantum bound.
    pub fn new(class: ZeroClass, rand_type: RandType, n: u64) -> Self {
        Self {
            n,
            gamma: 1.0,
            w_exp: crate::quantum::w_quantum(),
            w_tol: DEFAULT_W_TOL,
            eta_z: DEFAULT_ETA_Z,
            eta_z_prime: DEFAULT_ETA_Z / 2.0,
            epsilon: DEFAULT_EPSILON,
            epsilon_ext: DEFAULT_EPSILON_EXT,
            rand_type,
            class,
            input_dist_entropy: 2.0,
            d_k: rand_type.output_dimension(),
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_w_exp(mut self, w_exp: f64) -> Self {
        self.w_exp = w_exp;
        self
    }

    pub fn with_w_tol(mut self, w_tol: f64) -> Self {
        self.w_tol = w_tol;
        self
    }

    /// Sets `eta_z` and resets `eta_z'` to `eta_z / 2`.
    pub fn with_eta_z(mut self, eta_z: f64) -> Self {
        self.eta_z = eta_z;
        self.eta_z_prime = eta_z / 2.0;
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    pub fn n_zero(&self) -> usize {
        self.class.n_zero()
    }

    /// Checks the rules required by the rate engine.
    pub fn validate(&self) -> Result<(), GeatError> {
        let bad = |field: &'static str, reason: String| Err(GeatError::Param { field, reason });
        if self.n < 1 {
            return bad("n", "must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma", format!("{} outside (0, 1]", self.gamma));
        }
        if !(self.w_tol > 0.0 && self.w_tol < 1.0) {
            return bad("w_tol", format!("{} outside (0, 1)", self.w_tol));
        }
        if !(self.eta_z > 0.0 && self.eta_z < 1.0) {
            return bad("eta_z", format!("{} outside (0, 1)", self.eta_z));
        }
        if !(self.eta_z_prime > 0.0 && self.eta_z_prime < self.eta_z) {
            return bad("eta_z_prime", format!("{} outside (0, eta_z)", self.eta_z_prime));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", format!("{} outside (0, 1)", self.epsilon));
        }
        if !(self.epsilon_ext > 0.0 && self.epsilon_ext < 1.0) {
            return bad("epsilon_ext", format!("{} outside (0, 1)", self.epsilon_ext));
        }
        if !(self.input_dist_entropy >= 0.0 && self.input_dist_entropy <= 2.0) {
            return bad(
                "input_dist_entropy",
                format!("{} outside [0, 2]", self.input_dist_entropy),
            );
        }
        let natural = self.rand_type.output_dimension();
        // Global randomness also accepts d_k = 2, the `log 9` variant.
        let d_ok = self.d_k == natural || (self.rand_type == RandType::Global && self.d_k == 2);
        if !d_ok {
            return bad(
                "d_k",
                format!("{} not allowed for {} randomness", self.d_k, self.rand_type),
            );
        }
        Ok(())
    }
}
