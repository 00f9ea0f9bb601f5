use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::refine::maximize;
use super::{tuples, winning_probability, Behavior, GameSpec, QuantumError, ZeroClass};

type Vec4 = [Complex64; 4];
type Mat2 = [[Complex64; 2]; 2];

/// Two-qubit state families, basis order `|ab>` with Alice's qubit first.
///
/// * `Psi1 = cos(phi)(cos(theta)|01> + sin(theta)|10>) + sin(phi)|11>`
/// * `Psi2 = cos(theta)|01> + sin(theta)|10>`
/// * `Psi3 = sin(phi)(cos(alpha)|01> - sin(alpha)|11>) + cos(phi)|10>`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateFamily {
    Psi1,
    Psi2,
    Psi3,
}

/// Honest strategy: a pure two-qubit state and binary observables
/// `A_x = cos(2t) Z - sin(2t) X`, with half-angle `t = alice0` for `x = 0`
/// and `t = alpha` for `x = 1` (Bob: `bob0`, `beta`).
///
/// Table strategies measure `Z` on input 0, so `alice0 = bob0 = 0`.
/// `swapped` exchanges the parties after evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub theta: f64,
    pub phi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub state_family: StateFamily,
    #[serde(default)]
    pub alice0: f64,
    #[serde(default)]
    pub bob0: f64,
    #[serde(default)]
    pub swapped: bool,
}

impl Strategy {
    pub fn new(
        state_family: StateFamily,
        theta: f64,
        phi: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self, QuantumError> {
        let s = Self {
            theta,
            phi,
            alpha,
            beta,
            state_family,
            alice0: 0.0,
            bob0: 0.0,
            swapped: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_base_angles(mut self, alice0: f64, bob0: f64) -> Result<Self, QuantumError> {
        self.alice0 = alice0;
        self.bob0 = bob0;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), QuantumError> {
        let angles = [self.theta, self.phi, self.alpha, self.beta, self.alice0, self.bob0];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(QuantumError::InvalidStrategy("angles must be finite".into()));
        }
        Ok(())
    }

    /// State vector in the computational basis.
    pub fn state(&self) -> Vec4 {
        let (c, s) = (self.theta.cos(), self.theta.sin());
        let re = |v: [f64; 4]| v.map(|x| Complex64::new(x, 0.0));
        match self.state_family {
            StateFamily::Psi1 => {
                let (cp, sp) = (self.phi.cos(), self.phi.sin());
                re([0.0, cp * c, cp * s, sp])
            }
            StateFamily::Psi2 => re([0.0, c, s, 0.0]),
            StateFamily::Psi3 => {
                let (cp, sp) = (self.phi.cos(), self.phi.sin());
                let (ca, sa) = (self.alpha.cos(), self.alpha.sin());
                re([0.0, sp * ca, cp, -sp * sa])
            }
        }
    }

    pub fn alice_observable(&self, x: u8) -> Mat2 {
        observable(if x == 0 { self.alice0 } else { self.alpha })
    }

    pub fn bob_observable(&self, y: u8) -> Mat2 {
        observable(if y == 0 { self.bob0 } else { self.beta })
    }
}

fn observable(t: f64) -> Mat2 {
    let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
    let r = |v: f64| Complex64::new(v, 0.0);
    [[r(c), r(-s)], [r(-s), r(-c)]]
}

/// Projector onto outcome `o` of a +-1 observable: `(1 + (-1)^o O) / 2`.
fn projector(obs: &Mat2, o: u8) -> Mat2 {
    let sign = if o == 0 { 0.5 } else { -0.5 };
    let mut p = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            p[i][j] = obs[i][j] * sign;
        }
        p[i][i] += 0.5;
    }
    p
}

/// `<psi| M (x) N |psi>` for 2x2 operators on Alice and Bob.
fn expectation(psi: &Vec4, m: &Mat2, n: &Mat2) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            let mut row = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                for l in 0..2 {
                    row += m[i][k] * n[j][l] * psi[2 * k + l];
                }
            }
            acc += psi[2 * i + j].conj() * row;
        }
    }
    acc.re
}

/// Born-rule behavior of a strategy.
pub fn correlation(s: &Strategy) -> Behavior {
    let psi = s.state();
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
    let mut p = [0.0; 16];
    for (a, b, x, y) in tuples() {
        let m = projector(&s.alice_observable(x), a);
        let n = projector(&s.bob_observable(y), b);
        // Clamp rounding noise of order 1e-17 around exact zeros.
        p[super::index(a, b, x, y)] = (expectation(&psi, &m, &n) / norm).clamp(0.0, 1.0);
    }
    let beh = Behavior::from_raw(p);
    if s.swapped {
        beh.swap_parties()
    } else {
        beh
    }
}

fn chsh_score(s: &Strategy) -> f64 {
    winning_probability(&correlation(s), &GameSpec::chsh())
}

fn psi1(theta: f64, phi: f64, alpha: f64, beta: f64) -> Strategy {
    Strategy {
        theta,
        phi,
        alpha,
        beta,
        state_family: StateFamily::Psi1,
        alice0: 0.0,
        bob0: 0.0,
        swapped: false,
    }
}

fn class_2c(theta: f64, alpha: f64) -> Strategy {
    let beta = FRAC_PI_2 - alpha;
    let phi = (theta.sin() / beta.tan() - alpha.tan() * theta.cos()).atan();
    psi1(theta, phi, alpha, beta)
}

fn class_3b(alpha: f64) -> Strategy {
    Strategy {
        theta: (alpha.tan() * alpha.tan()).atan(),
        phi: 0.0,
        alpha,
        beta: alpha,
        state_family: StateFamily::Psi2,
        alice0: 0.0,
        bob0: 0.0,
        swapped: false,
    }
}

fn class_2b() -> Strategy {
    Strategy {
        theta: 0.0,
        phi: FRAC_PI_4,
        alpha: FRAC_PI_6,
        beta: FRAC_PI_4,
        state_family: StateFamily::Psi3,
        alice0: 0.0,
        bob0: 0.0,
        swapped: false,
    }
}

/// CHSH-maximizing honest strategy for each class.
///
/// Parameters quoted numerically are refined by maximizing the CHSH score over
/// the free parameters, with the class's extra conditions imposed exactly.
pub fn strategy_for_class(class: ZeroClass) -> Strategy {
    match class {
        ZeroClass::Chsh => Strategy {
            theta: FRAC_PI_4,
            phi: 0.0,
            alpha: FRAC_PI_4,
            beta: FRAC_PI_8,
            state_family: StateFamily::Psi2,
            alice0: 0.0,
            bob0: -FRAC_PI_8,
            swapped: false,
        },
        ZeroClass::One => {
            let [phi, ab] = maximize(
                |p: &[f64; 2]| chsh_score(&psi1(FRAC_PI_4, p[0], p[1], p[1])),
                [0.2275, -0.6403],
            );
            psi1(FRAC_PI_4, phi, ab, ab)
        }
        ZeroClass::TwoA => Strategy {
            theta: FRAC_PI_4,
            phi: 0.0,
            alpha: -5.0 * PI / 6.0,
            beta: FRAC_PI_6,
            state_family: StateFamily::Psi2,
            alice0: 0.0,
            bob0: 0.0,
            swapped: false,
        },
        ZeroClass::TwoB => class_2b(),
        ZeroClass::TwoBSwap => Strategy {
            swapped: true,
            ..class_2b()
        },
        ZeroClass::TwoC => {
            let [theta, alpha] = maximize(
                |p: &[f64; 2]| chsh_score(&class_2c(p[0], p[1])),
                [0.5815, 0.8068],
            );
            class_2c(theta, alpha)
        }
        ZeroClass::ThreeA => {
            let alpha = 0.5 * (-2.0 * (2.0 + 5f64.sqrt()).sqrt()).atan();
            let phi = (alpha.tan() / alpha.sin()).atan();
            Strategy {
                theta: 0.0,
                phi,
                alpha,
                beta: alpha,
                state_family: StateFamily::Psi3,
                alice0: 0.0,
                bob0: 0.0,
                swapped: false,
            }
        }
        ZeroClass::ThreeB => {
            let [alpha] = maximize(|p: &[f64; 1]| chsh_score(&class_3b(p[0])), [0.6354]);
            class_3b(alpha)
        }
    }
}
