use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("unsupported randomness type: {0} (expected local, global or blind)")]
pub struct UnknownRandType(pub String);

/// Which register randomness is extracted from.
///
/// * `Local`: Alice's output given both inputs (chi = 0).
/// * `Global`: both outputs given both inputs (chi = 1).
/// * `Blind`: Alice's output given both inputs and Bob's output (chi = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandType {
    Local,
    Global,
    Blind,
}

impl RandType {
    pub fn chi(&self) -> u8 {
        match self {
            RandType::Local => 0,
            RandType::Global => 1,
            RandType::Blind => 2,
        }
    }

    /// Output alphabet size per round.
    pub fn output_dimension(&self) -> u32 {
        match self {
            RandType::Global => 4,
            RandType::Local | RandType::Blind => 2,
        }
    }

    /// Whether Bob's output is recorded on generation rounds too: as side
    /// information for blind randomness, as half of `K = AB` for global.
    pub fn records_generation_b(&self) -> bool {
        matches!(self, RandType::Global | RandType::Blind)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RandType::Local => "local",
            RandType::Global => "global",
            RandType::Blind => "blind",
        }
    }
}

impl fmt::Display for RandType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RandType {
    type Err = UnknownRandType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" | "0" => Ok(RandType::Local),
            "global" | "1" => Ok(RandType::Global),
            "blind" | "2" => Ok(RandType::Blind),
            other => Err(UnknownRandType(other.to_string())),
        }
    }
}
