//! Certified randomness rates for CHSH-based device-independent randomness
//! expansion with zero-probability constraints.
//!
//! * [`quantum`]: the game, constraint classes, honest strategies and behaviors.
//! * [`quadrature`]: Gauss-Radau rules and the coefficients of the entropy expansion.
//! * [`tradeoff`]: dual certificates, min-tradeoff and crossover functions.
//! * [`geat`]: finite-size corrections, completeness, soundness and rate scans.
//! * [`extractor`]: Toeplitz hashing and the extractor length law.
//! * [`sim`]: round-by-round protocol simulation.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod extractor;
pub mod geat;
pub mod quadrature;
pub mod quantum;
pub mod randomness;
pub mod sim;
pub mod tradeoff;

pub use quantum::ZeroClass;
pub use randomness::RandType;
