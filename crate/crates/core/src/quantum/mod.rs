//! The CHSH game, zero-probability constraint classes and honest two-qubit
//! strategies.
//!
//! Behaviors are stored as 16 probabilities indexed `(a, b, x, y)` in
//! row-major order, i.e. `p[8a + 4b + 2x + y] = P(a, b | x, y)`.

mod refine;
mod strategy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use strategy::{correlation, strategy_for_class, StateFamily, Strategy};

/// Tolerance used for the normalization and no-signaling checks.
pub const BEHAVIOR_TOL: f64 = 1e-12;

/// Classical bound of the CHSH winning probability.
pub const W_CLASSICAL: f64 = 0.75;

/// Tsirelson bound of the CHSH winning probability, `(2 + sqrt 2) / 4`.
pub fn w_quantum() -> f64 {
    (2.0 + std::f64::consts::SQRT_2) / 4.0
}

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("unsupported class: {0}")]
    UnsupportedClass(String),
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
}

/// Flat index of `(a, b, x, y)` in a behavior table.
#[inline]
pub const fn index(a: u8, b: u8, x: u8, y: u8) -> usize {
    ((a as usize) << 3) | ((b as usize) << 2) | ((x as usize) << 1) | (y as usize)
}

/// One input/output tuple `(a, b, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub a: u8,
    pub b: u8,
    pub x: u8,
    pub y: u8,
}

impl Event {
    pub const fn new(a: u8, b: u8, x: u8, y: u8) -> Self {
        Self { a, b, x, y }
    }

    pub const fn index(&self) -> usize {
        index(self.a, self.b, self.x, self.y)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({},{}|{},{})", self.a, self.b, self.x, self.y)
    }
}

const S_1: [Event; 1] = [Event::new(0, 0, 0, 0)];
const S_2A: [Event; 2] = [Event::new(0, 0, 0, 0), Event::new(1, 1, 0, 0)];
const S_2B: [Event; 2] = [Event::new(0, 0, 0, 0), Event::new(1, 1, 1, 0)];
const S_2B_SWAP: [Event; 2] = [Event::new(0, 0, 0, 0), Event::new(1, 1, 0, 1)];
const S_2C: [Event; 2] = [Event::new(0, 0, 0, 0), Event::new(1, 0, 1, 1)];
const S_3A: [Event; 3] = [
    Event::new(0, 0, 0, 0),
    Event::new(1, 1, 1, 0),
    Event::new(1, 1, 0, 1),
];
const S_3B: [Event; 3] = [
    Event::new(0, 0, 0, 0),
    Event::new(1, 1, 0, 0),
    Event::new(1, 0, 1, 1),
];

/// Zero-probability constraint class. `Chsh` carries no constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ZeroClass {
    Chsh,
    One,
    TwoA,
    TwoB,
    TwoBSwap,
    TwoC,
    ThreeA,
    ThreeB,
}

impl ZeroClass {
    pub const ALL: [ZeroClass; 8] = [
        ZeroClass::Chsh,
        ZeroClass::One,
        ZeroClass::TwoA,
        ZeroClass::TwoB,
        ZeroClass::TwoBSwap,
        ZeroClass::TwoC,
        ZeroClass::ThreeA,
        ZeroClass::ThreeB,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ZeroClass::Chsh => "chsh",
            ZeroClass::One => "1",
            ZeroClass::TwoA => "2a",
            ZeroClass::TwoB => "2b",
            ZeroClass::TwoBSwap => "2b_swap",
            ZeroClass::TwoC => "2c",
            ZeroClass::ThreeA => "3a",
            ZeroClass::ThreeB => "3b",
        }
    }

    /// The index set `S_kappa` in canonical order.
    pub fn constraint_set(&self) -> &'static [Event] {
        match self {
            ZeroClass::Chsh => &[],
            ZeroClass::One => &S_1,
            ZeroClass::TwoA => &S_2A,
            ZeroClass::TwoB => &S_2B,
            ZeroClass::TwoBSwap => &S_2B_SWAP,
            ZeroClass::TwoC => &S_2C,
            ZeroClass::ThreeA => &S_3A,
            ZeroClass::ThreeB => &S_3B,
        }
    }

    pub fn n_zero(&self) -> usize {
        self.constraint_set().len()
    }
}

impl fmt::Display for ZeroClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ZeroClass {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ZeroClass::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| QuantumError::UnsupportedClass(s.to_string()))
    }
}

impl TryFrom<String> for ZeroClass {
    type Error = QuantumError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ZeroClass> for String {
    fn from(c: ZeroClass) -> Self {
        c.label().to_string()
    }
}

/// Input distribution and win predicate of a two-input two-output game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    /// `input_dist[x][y] = P(x, y)`.
    input_dist: [[f64; 2]; 2],
    /// `win[index(a, b, x, y)]` is 1 when the tuple wins.
    win: [u8; 16],
}

impl GameSpec {
    pub fn new(input_dist: [[f64; 2]; 2], win: [u8; 16]) -> Result<Self, QuantumError> {
        let flat = input_dist.iter().flatten();
        if flat.clone().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(QuantumError::InvalidGame(
                "input probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = flat.sum();
        if (total - 1.0).abs() > BEHAVIOR_TOL {
            return Err(QuantumError::InvalidGame(format!(
                "input probabilities sum to {total}"
            )));
        }
        if win.iter().any(|&w| w > 1) {
            return Err(QuantumError::InvalidGame("win values must be 0 or 1".into()));
        }
        Ok(Self { input_dist, win })
    }

    /// CHSH with uniform inputs; a round is won when `xy ^ a ^ b == 1`.
    pub fn chsh() -> Self {
        let mut win = [0u8; 16];
        for (a, b, x, y) in tuples() {
            win[index(a, b, x, y)] = (x & y) ^ a ^ b;
        }
        Self {
            input_dist: [[0.25; 2]; 2],
            win,
        }
    }

    pub fn input_prob(&self, x: u8, y: u8) -> f64 {
        self.input_dist[x as usize][y as usize]
    }

    pub fn wins(&self, x: u8, y: u8, a: u8, b: u8) -> bool {
        self.win[index(a, b, x, y)] == 1
    }

    /// Shannon entropy of the input distribution in bits.
    pub fn input_entropy(&self) -> f64 {
        self.input_dist
            .iter()
            .flatten()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }
}

impl Default for GameSpec {
    fn default() -> Self {
        Self::chsh()
    }
}

/// All 16 `(a, b, x, y)` tuples in table order.
pub fn tuples() -> impl Iterator<Item = (u8, u8, u8, u8)> {
    (0..16u8).map(|i| (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1))
}

/// Conditional distribution `P(a, b | x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BehaviorRepr", into = "BehaviorRepr")]
pub struct Behavior {
    p: [f64; 16],
}

#[derive(Serialize, Deserialize)]
struct BehaviorRepr {
    p: Vec<f64>,
}

impl TryFrom<BehaviorRepr> for Behavior {
    type Error = QuantumError;

    fn try_from(r: BehaviorRepr) -> Result<Self, Self::Error> {
        let p: [f64; 16] = r.p.try_into().map_err(|v: Vec<f64>| {
            QuantumError::InvalidBehavior(format!("expected 16 entries, got {}", v.len()))
        })?;
        Behavior::new(p)
    }
}

impl From<Behavior> for BehaviorRepr {
    fn from(b: Behavior) -> Self {
        BehaviorRepr { p: b.p.to_vec() }
    }
}

impl Behavior {
    /// Validates normalization, range and no-signaling.
    pub fn new(p: [f64; 16]) -> Result<Self, QuantumError> {
        let b = Self { p };
        b.check()?;
        Ok(b)
    }

    /// `P(a, b | x, y) = 1/4` everywhere.
    pub fn uniform() -> Self {
        Self { p: [0.25; 16] }
    }

    pub fn get(&self, a: u8, b: u8, x: u8, y: u8) -> f64 {
        self.p[index(a, b, x, y)]
    }

    pub fn probs(&self) -> &[f64; 16] {
        &self.p
    }

    /// Distribution of `(a, b)` given inputs, ordered `(0,0), (0,1), (1,0), (1,1)`.
    pub fn conditional(&self, x: u8, y: u8) -> [f64; 4] {
        [
            self.get(0, 0, x, y),
            self.get(0, 1, x, y),
            self.get(1, 0, x, y),
            self.get(1, 1, x, y),
        ]
    }

    fn check(&self) -> Result<(), QuantumError> {
        if let Some(v) = self.p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(QuantumError::InvalidBehavior(format!(
                "entry {v} outside [0, 1]"
            )));
        }
        for x in 0..2 {
            for y in 0..2 {
                let s: f64 = self.conditional(x, y).iter().sum();
                if (s - 1.0).abs() > BEHAVIOR_TOL {
                    return Err(QuantumError::InvalidBehavior(format!(
                        "P(.,.|{x},{y}) sums to {s}"
                    )));
                }
            }
        }
        for x in 0..2 {
            for a in 0..2 {
                let m0 = self.get(a, 0, x, 0) + self.get(a, 1, x, 0);
                let m1 = self.get(a, 0, x, 1) + self.get(a, 1, x, 1);
                if (m0 - m1).abs() > BEHAVIOR_TOL {
                    return Err(QuantumError::InvalidBehavior(format!(
                        "Alice's marginal P(a={a}|x={x}) depends on y"
                    )));
                }
            }
        }
        for y in 0..2 {
            for b in 0..2 {
                let m0 = self.get(0, b, 0, y) + self.get(1, b, 0, y);
                let m1 = self.get(0, b, 1, y) + self.get(1, b, 1, y);
                if (m0 - m1).abs() > BEHAVIOR_TOL {
                    return Err(QuantumError::InvalidBehavior(format!(
                        "Bob's marginal P(b={b}|y={y}) depends on x"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exchanges the roles of the two parties: `P'(a,b|x,y) = P(b,a|y,x)`.
    pub fn swap_parties(&self) -> Self {
        let mut p = [0.0; 16];
        for (a, b, x, y) in tuples() {
            p[index(a, b, x, y)] = self.get(b, a, y, x);
        }
        Self { p }
    }

    pub(crate) fn from_raw(p: [f64; 16]) -> Self {
        Self { p }
    }
}

/// `sum_{x,y} P(x,y) sum_{a,b} win(x,y,a,b) P(a,b|x,y)`.
pub fn winning_probability(b: &Behavior, g: &GameSpec) -> f64 {
    tuples()
        .filter(|&(a, bb, x, y)| g.wins(x, y, a, bb))
        .map(|(a, bb, x, y)| g.input_prob(x, y) * b.get(a, bb, x, y))
        .sum()
}

/// The behavior's probabilities on the class constraint set, in canonical order.
pub fn zero_violations(b: &Behavior, class: ZeroClass) -> Vec<f64> {
    class
        .constraint_set()
        .iter()
        .map(|e| b.probs()[e.index()])
        .collect()
}
