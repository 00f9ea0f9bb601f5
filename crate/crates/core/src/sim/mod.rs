//! Round-by-round simulation of the spot-checking protocol against an honest
//! strategy.
//!
//! Sampling uses ChaCha20 seeded with `seed` on stream `stream` (the trial
//! index). Every round draws exactly three 64-bit words, whether or not they
//! are used: the test flag (`T = 1` iff a uniform double is below `gamma`),
//! the inputs (top two bits of the word, `x` then `y`) and the outcome (a
//! uniform double inverted through the conditional CDF of `(a, b)`). Round
//! `i` therefore always reads words `3i .. 3i + 3` of the stream.

mod io;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{read_transcript_binary, write_transcript_binary, write_transcript_csv, TRANSCRIPT_MAGIC, TRANSCRIPT_VERSION};

use crate::geat::ProtocolParams;
use crate::quantum::{correlation, Behavior, Event, GameSpec, Strategy, ZeroClass};
use crate::randomness::RandType;

/// Generation-round inputs `(x*, y*)`.
pub const GENERATION_INPUTS: (u8, u8) = (0, 0);

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation parameter `{field}`: {reason}")]
    Param { field: &'static str, reason: String },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("inconsistent round {index}: {reason}")]
    Record { index: usize, reason: String },
    #[error("transcript has no seed and cannot be written in replay form")]
    NoOrigin,
    #[error("not a transcript file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Checks applied before simulating. Looser than the rate engine: `gamma = 0`
/// and `w_tol = 1` are meaningful here.
pub fn validate_sim_params(params: &ProtocolParams) -> Result<(), SimError> {
    let unit = |field: &'static str, v: f64| {
        if (0.0..=1.0).contains(&v) {
            Ok(())
        } else {
            Err(SimError::Param {
                field,
                reason: format!("{v} outside [0, 1]"),
            })
        }
    };
    unit("gamma", params.gamma)?;
    unit("w_exp", params.w_exp)?;
    unit("w_tol", params.w_tol)?;
    unit("eta_z", params.eta_z)
}

/// One protocol round as seen by Alice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Round {
    pub t: bool,
    pub x: u8,
    pub y: u8,
    pub a: u8,
    /// `None` when Bob was not asked to report.
    pub b: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub rounds: u64,
    pub tests: u64,
    pub wins: u64,
    /// Hits per zero constraint, in the class's constraint order.
    pub zero_hits: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AbortReason {
    Score { wins: u64, threshold: f64 },
    ZeroConstraint { index: usize, event: String, hits: u64, threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Abort(AbortReason),
}

impl Verdict {
    pub fn is_abort(&self) -> bool {
        matches!(self, Verdict::Abort(_))
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Abort(AbortReason::Score { wins, threshold }) => {
                write!(f, "abort: {wins} wins below threshold {threshold}")
            }
            Verdict::Abort(AbortReason::ZeroConstraint { index, event, hits, threshold }) => {
                write!(f, "abort: zero constraint {index} ({event}) hit {hits} times, threshold {threshold}")
            }
        }
    }
}

/// Abort decision on aggregated counts. Thresholds use the expected test
/// count `gamma n`, not the realized one.
pub fn check_abort_counts(counts: &Counts, params: &ProtocolParams) -> Verdict {
    let expected_tests = params.gamma * counts.rounds as f64;
    let threshold = (params.w_exp - params.w_tol) * expected_tests;
    if (counts.wins as f64) < threshold {
        return Verdict::Abort(AbortReason::Score {
            wins: counts.wins,
            threshold,
        });
    }
    let zero_threshold = params.eta_z * expected_tests;
    for (index, (&hits, event)) in counts.zero_hits.iter().zip(params.class.constraint_set()).enumerate() {
        if hits as f64 > zero_threshold {
            return Verdict::Abort(AbortReason::ZeroConstraint {
                index,
                event: event.to_string(),
                hits,
                threshold: zero_threshold,
            });
        }
    }
    Verdict::Pass
}

/// Precomputed conditional CDFs of `(a, b)` for each input pair.
#[derive(Debug, Clone)]
struct Sampler {
    cdf: [[f64; 4]; 4],
    gamma: f64,
    game: GameSpec,
    events: &'static [Event],
    keep_b: bool,
}

impl Sampler {
    fn new(behavior: &Behavior, params: &ProtocolParams) -> Self {
        let mut cdf = [[0.0; 4]; 4];
        for (k, row) in cdf.iter_mut().enumerate() {
            let p = behavior.conditional((k >> 1) as u8, (k & 1) as u8);
            let mut acc = 0.0;
            for (c, v) in row.iter_mut().zip(p) {
                acc += v;
                *c = acc;
            }
        }
        Self {
            cdf,
            gamma: params.gamma,
            game: GameSpec::chsh(),
            events: params.class.constraint_set(),
            keep_b: params.rand_type.records_generation_b(),
        }
    }

    fn round(&self, rng: &mut ChaCha20Rng) -> Round {
        let t = rng.random::<f64>() < self.gamma;
        let inputs = rng.next_u64() >> 62;
        let u = rng.random::<f64>();
        let (x, y) = if t {
            ((inputs >> 1) as u8, (inputs & 1) as u8)
        } else {
            GENERATION_INPUTS
        };
        let row = &self.cdf[usize::from(x) * 2 + usize::from(y)];
        // Zero-probability outcomes have an empty CDF step and are never drawn.
        let k = row.iter().position(|&c| u < c).unwrap_or_else(|| {
            (0..4).rev().find(|&k| k == 0 || row[k] > row[k - 1]).unwrap_or(3)
        });
        let (a, b) = ((k >> 1) as u8, (k & 1) as u8);
        Round {
            t,
            x,
            y,
            a,
            b: (t || self.keep_b).then_some(b),
        }
    }

    /// `(C_w, C_z)` for a test round.
    fn score(&self, r: &Round, b: u8) -> (bool, impl Iterator<Item = bool> + '_) {
        let r = *r;
        (
            self.game.wins(r.x, r.y, r.a, b),
            self.events
                .iter()
                .map(move |e| e.a == r.a && e.b == b && e.x == r.x && e.y == r.y),
        )
    }
}

fn rng_for(origin: Origin) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(origin.seed);
    rng.set_stream(origin.stream);
    rng
}

/// Test flags and inputs of every round, regenerated from the seed.
pub(crate) fn replay_inputs(params: &ProtocolParams, origin: Origin, n: u64) -> Vec<(bool, u8, u8)> {
    let mut rng = rng_for(origin);
    (0..n)
        .map(|_| {
            let t = rng.random::<f64>() < params.gamma;
            let inputs = rng.next_u64() >> 62;
            let _ = rng.next_u64();
            if t {
                (true, (inputs >> 1) as u8, (inputs & 1) as u8)
            } else {
                (false, GENERATION_INPUTS.0, GENERATION_INPUTS.1)
            }
        })
        .collect()
}

/// Per-round record of one run, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    params: ProtocolParams,
    origin: Option<Origin>,
    t: Vec<bool>,
    x: Vec<u8>,
    y: Vec<u8>,
    a: Vec<u8>,
    b: Vec<Option<u8>>,
    c_win: Vec<Option<bool>>,
    c_zero: Vec<Vec<Option<bool>>>,
    counts: Counts,
    verdict: Verdict,
}

impl Transcript {
    /// Builds a transcript from explicit rounds, recomputing statistics and
    /// the verdict. `params.n` is ignored in favour of `rounds.len()`.
    pub fn from_rounds(rounds: &[Round], params: &ProtocolParams) -> Result<Self, SimError> {
        Self::assemble(rounds.iter().copied(), params, None)
    }

    fn assemble(
        rounds: impl Iterator<Item = Round>,
        params: &ProtocolParams,
        origin: Option<Origin>,
    ) -> Result<Self, SimError> {
        let game = GameSpec::chsh();
        let events = params.class.constraint_set();
        let keep_b = params.rand_type.records_generation_b();
        let mut tr = Transcript {
            params: params.clone(),
            origin,
            t: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
            c_win: Vec::new(),
            c_zero: vec![Vec::new(); events.len()],
            counts: Counts {
                zero_hits: vec![0; events.len()],
                ..Counts::default()
            },
            verdict: Verdict::Pass,
        };
        for (index, r) in rounds.enumerate() {
            if r.x > 1 || r.y > 1 || r.a > 1 || r.b.is_some_and(|b| b > 1) {
                return Err(SimError::Record {
                    index,
                    reason: "inputs and outputs must be bits".into(),
                });
            }
            if r.t && r.b.is_none() {
                return Err(SimError::Record {
                    index,
                    reason: "test round without Bob's output".into(),
                });
            }
            if !r.t && !keep_b && r.b.is_some() {
                return Err(SimError::Record {
                    index,
                    reason: format!("Bob's output recorded on a generation round for {} randomness", params.rand_type),
                });
            }
            if !r.t && (r.x, r.y) != GENERATION_INPUTS {
                return Err(SimError::Record {
                    index,
                    reason: "generation round with inputs other than (x*, y*)".into(),
                });
            }
            tr.t.push(r.t);
            tr.x.push(r.x);
            tr.y.push(r.y);
            tr.a.push(r.a);
            tr.b.push(r.b);
            tr.counts.rounds += 1;
            match (r.t, r.b) {
                (true, Some(b)) => {
                    let win = game.wins(r.x, r.y, r.a, b);
                    tr.counts.tests += 1;
                    tr.counts.wins += u64::from(win);
                    tr.c_win.push(Some(win));
                    for (j, e) in events.iter().enumerate() {
                        let hit = e.a == r.a && e.b == b && e.x == r.x && e.y == r.y;
                        tr.counts.zero_hits[j] += u64::from(hit);
                        tr.c_zero[j].push(Some(hit));
                    }
                }
                _ => {
                    tr.c_win.push(None);
                    for col in &mut tr.c_zero {
                        col.push(None);
                    }
                }
            }
        }
        tr.params.n = tr.counts.rounds;
        tr.verdict = check_abort_counts(&tr.counts, params);
        Ok(tr)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn origin(&self) -> Option<Origin> {
        self.origin
    }

    pub fn round(&self, i: usize) -> Round {
        Round {
            t: self.t[i],
            x: self.x[i],
            y: self.y[i],
            a: self.a[i],
            b: self.b[i],
        }
    }

    pub fn rounds(&self) -> impl Iterator<Item = Round> + '_ {
        (0..self.len()).map(|i| self.round(i))
    }

    pub fn t(&self) -> &[bool] {
        &self.t
    }

    pub fn x(&self) -> &[u8] {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn a(&self) -> &[u8] {
        &self.a
    }

    pub fn b(&self) -> &[Option<u8>] {
        &self.b
    }

    /// `C_w` per round, `None` on generation rounds.
    pub fn c_win(&self) -> &[Option<bool>] {
        &self.c_win
    }

    /// `C_z` column for constraint `j`.
    pub fn c_zero(&self, j: usize) -> &[Option<bool>] {
        &self.c_zero[j]
    }

    pub fn counts(&self) -> &Counts {
        &self.counts
    }

    pub fn verdict(&self) -> &Verdict {
        &self.verdict
    }

    /// The target source `K` over generation rounds, the raw material for
    /// extraction: `A` per round, or `A` then `B` for global randomness.
    pub fn generation_bits(&self) -> Vec<bool> {
        let global = self.params.rand_type == RandType::Global;
        let mut out = Vec::new();
        for r in self.rounds().filter(|r| !r.t) {
            out.push(r.a == 1);
            if let (true, Some(b)) = (global, r.b) {
                out.push(b == 1);
            }
        }
        out
    }
}

/// Abort decision for a transcript.
pub fn check_abort(t: &Transcript, params: &ProtocolParams) -> Verdict {
    let mut counts = t.counts.clone();
    counts.rounds = t.len() as u64;
    check_abort_counts(&counts, params)
}

/// Runs `params.n` rounds on stream 0 of `seed`.
pub fn run_protocol(strategy: &Strategy, params: &ProtocolParams, seed: u64) -> Result<Transcript, SimError> {
    run_protocol_stream(&correlation(strategy), params, Origin { seed, stream: 0 })
}

/// Runs `params.n` rounds for a given behavior on an explicit stream.
pub fn run_protocol_stream(behavior: &Behavior, params: &ProtocolParams, origin: Origin) -> Result<Transcript, SimError> {
    validate_sim_params(params)?;
    let sampler = Sampler::new(behavior, params);
    let mut rng = rng_for(origin);
    Transcript::assemble((0..params.n).map(|_| sampler.round(&mut rng)), params, Some(origin))
}

/// Statistics of one run without per-round storage.
pub fn run_counts(behavior: &Behavior, params: &ProtocolParams, origin: Origin) -> Result<(Counts, Verdict), SimError> {
    validate_sim_params(params)?;
    let sampler = Sampler::new(behavior, params);
    let mut rng = rng_for(origin);
    let mut counts = Counts {
        zero_hits: vec![0; sampler.events.len()],
        ..Counts::default()
    };
    for _ in 0..params.n {
        let r = sampler.round(&mut rng);
        counts.rounds += 1;
        if let (true, Some(b)) = (r.t, r.b) {
            let (win, hits) = sampler.score(&r, b);
            counts.tests += 1;
            counts.wins += u64::from(win);
            for (acc, hit) in counts.zero_hits.iter_mut().zip(hits) {
                *acc += u64::from(hit);
            }
        }
    }
    let verdict = check_abort_counts(&counts, params);
    Ok((counts, verdict))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: u64,
    pub counts: Counts,
    pub verdict: Verdict,
}

/// Independent runs on streams `0 .. trials`, evaluated in parallel and
/// returned in trial order.
pub fn run_trials(behavior: &Behavior, params: &ProtocolParams, trials: u64, seed: u64) -> Result<Vec<TrialSummary>, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    validate_sim_params(params)?;
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (counts, verdict) = run_counts(behavior, params, Origin { seed, stream: trial })?;
            Ok(TrialSummary { trial, counts, verdict })
        })
        .collect()
}

/// Fraction of aborting runs among `trials` honest runs.
pub fn empirical_completeness(strategy: &Strategy, params: &ProtocolParams, trials: u64, seed: u64) -> Result<f64, SimError> {
    let runs = run_trials(&correlation(strategy), params, trials, seed)?;
    let aborts = runs.iter().filter(|r| r.verdict.is_abort()).count();
    Ok(aborts as f64 / trials as f64)
}

/// Empirical frequency of each zero event among test rounds.
pub fn zero_hit_rates(counts: &Counts) -> Vec<f64> {
    counts
        .zero_hits
        .iter()
        .map(|&h| if counts.tests == 0 { 0.0 } else { h as f64 / counts.tests as f64 })
        .collect()
}

/// Constraint events of the class, for labelling output columns.
pub fn constraint_labels(class: ZeroClass) -> Vec<String> {
    class.constraint_set().iter().map(|e| e.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::strategy_for_class;

    fn params(class: ZeroClass, rand: RandType, n: u64) -> ProtocolParams {
        ProtocolParams::new(class, rand, n)
    }

    #[test]
    fn same_seed_same_transcript() {
        let s = strategy_for_class(ZeroClass::TwoA);
        let p = params(ZeroClass::TwoA, RandType::Local, 2000).with_gamma(0.3);
        let a = run_protocol(&s, &p, 7).unwrap();
        let b = run_protocol(&s, &p, 7).unwrap();
        assert_eq!(a, b);
        let c = run_protocol(&s, &p, 8).unwrap();
        assert_ne!(a.a(), c.a());
    }

    #[test]
    fn counts_path_matches_transcript_path() {
        let s = strategy_for_class(ZeroClass::ThreeB);
        let p = params(ZeroClass::ThreeB, RandType::Blind, 5000).with_gamma(0.4);
        let origin = Origin { seed: 11, stream: 3 };
        let behavior = correlation(&s);
        let t = run_protocol_stream(&behavior, &p, origin).unwrap();
        let (counts, verdict) = run_counts(&behavior, &p, origin).unwrap();
        assert_eq!(t.counts(), &counts);
        assert_eq!(t.verdict(), &verdict);
    }

    #[test]
    fn transcript_invariants() {
        let s = strategy_for_class(ZeroClass::TwoA);
        for rand in [RandType::Local, RandType::Global, RandType::Blind] {
            let p = params(ZeroClass::TwoA, rand, 3000).with_gamma(0.25);
            let t = run_protocol(&s, &p, 1).unwrap();
            for (i, r) in t.rounds().enumerate() {
                assert_eq!(t.c_win()[i].is_none(), !r.t);
                if rand == RandType::Local {
                    assert_eq!(r.b.is_some(), r.t);
                } else {
                    assert!(r.b.is_some());
                }
                if !r.t {
                    assert_eq!((r.x, r.y), GENERATION_INPUTS);
                }
            }
            let rebuilt = Transcript::from_rounds(&t.rounds().collect::<Vec<_>>(), &p).unwrap();
            assert_eq!(rebuilt.counts(), t.counts());
        }
    }

    #[test]
    fn no_tests_when_gamma_zero() {
        let s = strategy_for_class(ZeroClass::TwoA);
        let p = params(ZeroClass::TwoA, RandType::Local, 1000).with_gamma(0.0);
        let t = run_protocol(&s, &p, 3).unwrap();
        assert_eq!(t.counts().tests, 0);
        assert_eq!(t.verdict(), &Verdict::Pass);
    }

    #[test]
    fn replay_matches_run() {
        let s = strategy_for_class(ZeroClass::One);
        let p = params(ZeroClass::One, RandType::Local, 500).with_gamma(0.5);
        let t = run_protocol(&s, &p, 99).unwrap();
        let replay = replay_inputs(&p, Origin { seed: 99, stream: 0 }, 500);
        for (r, (tt, x, y)) in t.rounds().zip(replay) {
            assert_eq!((r.t, r.x, r.y), (tt, x, y));
        }
    }

    #[test]
    fn rejected_records() {
        let p = params(ZeroClass::TwoA, RandType::Local, 0);
        let gen_with_b = Round { t: false, x: 0, y: 0, a: 0, b: Some(1) };
        assert!(matches!(Transcript::from_rounds(&[gen_with_b], &p), Err(SimError::Record { index: 0, .. })));
        let test_without_b = Round { t: true, x: 1, y: 0, a: 0, b: None };
        assert!(Transcript::from_rounds(&[test_without_b], &p).is_err());
    }
}
