//! The game model: a pair of mean-reward matrices plus the derived objects
//! everything else is measured against (best responses, the equilibrium the
//! leader aims for, worst-case responses, and the instance's gap profile).
//!
//! Indexing convention throughout: `a` is the leader's action (row), `b` is
//! the follower's action (column), and all mean rewards live in `[0, 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle;
use crate::rng::RngStream;

/// Sentinel reported for a gap whose defining minimization ranges over an
/// empty set (for example `delta4` when no pair pays the follower strictly
/// less than the manipulation target). Infinity keeps downstream
/// `min`-of-gaps epsilon derivations well-defined: an empty term simply
/// drops out.
pub const EMPTY_GAP_SENTINEL: f64 = f64::INFINITY;

/// Attempt cap for [`random_game`]'s rejection sampling.
const MAX_GENERATION_ATTEMPTS: usize = 100;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("mean matrices must be non-empty and rectangular")]
    BadShape,
    #[error("matrices mu_l and mu_f must have identical dimensions")]
    DimensionMismatch,
    #[error("mean reward at ({a}, {b}) is {value}, outside [0, 1]")]
    MeanOutOfRange { a: usize, b: usize, value: f64 },
    #[error(
        "failed to draw a game with unique best responses, equilibrium and \
         manipulation target within {0} attempts"
    )]
    GenerationCapExceeded(usize),
}

/// Which player's mean-reward matrix to read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Player {
    Leader,
    Follower,
}

/// A joint action: leader plays `a`, follower plays `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionPair {
    pub a: usize,
    pub b: usize,
}

impl ActionPair {
    pub fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }
}

impl std::fmt::Display for ActionPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// A deterministic follower strategy: one response per leader action.
/// Totality holds by construction (`map[a]` exists for every `a`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResponseFunction {
    map: Vec<usize>,
}

impl ResponseFunction {
    pub fn new(map: Vec<usize>) -> Self {
        assert!(
            !map.is_empty(),
            "a response function needs at least one row"
        );
        Self { map }
    }

    /// The follower action prescribed against leader action `a`.
    pub fn respond(&self, a: usize) -> usize {
        self.map[a]
    }

    /// The full response table, indexed by leader action.
    pub fn table(&self) -> &[usize] {
        &self.map
    }

    /// Number of leader actions this function covers.
    pub fn leader_actions(&self) -> usize {
        self.map.len()
    }
}

/// Equilibrium report: the pair itself plus whether it was determined
/// uniquely (unique leader argmax and a unique best response in every row).
/// Ties are broken toward the lowest index, so `pair` is well-defined either
/// way; `unique` lets callers detect degenerate instances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equilibrium {
    pub pair: ActionPair,
    pub unique: bool,
}

/// The instance's suboptimality gaps. Each field is the minimum of a set of
/// strictly positive differences; when that set is empty the field holds
/// [`EMPTY_GAP_SENTINEL`]. See the field docs for the exact quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapProfile {
    /// Worst-row margin of the follower's best response over its runner-up:
    /// `min_a min_{b != br(a)} [mu_f(a, br(a)) - mu_f(a, b)]`.
    pub delta1: f64,
    /// Leader's margin at the equilibrium over committing to any other action
    /// against a best-responding follower:
    /// `min_{a != a_se} [mu_l(se) - mu_l(a, br(a))]`.
    pub delta2: f64,
    /// Leader's margin at the manipulation target over any other action when
    /// the follower answers everything else with the leader's worst case:
    /// `min_{a != a_fm} [mu_l(fm) - mu_l(a, wr(a))]`.
    pub delta3: f64,
    /// Follower's margin of the manipulation target over strictly worse
    /// pairs: `min over pairs p with mu_f(p) < mu_f(fm) of [mu_f(fm) - mu_f(p)]`.
    pub delta4: f64,
    /// Worst-row margin of any follower action over the leader's worst case:
    /// `min_a min_{b != wr(a)} [mu_l(a, b) - mu_l(a, wr(a))]`.
    pub delta5: f64,
    /// Slack by which pairs the follower would prefer to the manipulation
    /// target fail the enforceability condition:
    /// `min over pairs p = (a, b) with mu_f(p) > mu_f(fm) of
    /// [max_{a' != a} mu_l(a', wr(a')) - mu_l(p)]`.
    pub delta6: f64,
    /// The follower's gain from manipulation over honest best response:
    /// `mu_f(fm) - mu_f(se)`. Always >= 0; exactly 0 when the equilibrium
    /// pair is itself the best manipulation target.
    pub manipulation_gap: f64,
}

impl GapProfile {
    /// Smallest gap governing best-response-phase learning:
    /// `min(delta1, delta2)`.
    pub fn best_response_epsilon(&self) -> f64 {
        self.delta1.min(self.delta2)
    }

    /// Smallest gap governing manipulation-phase learning:
    /// `min(delta4, delta5, delta6)`.
    pub fn manipulation_epsilon(&self) -> f64 {
        self.delta4.min(self.delta5).min(self.delta6)
    }
}

/// Serialized shape of a game: explicit dimensions plus row-major matrices,
/// `mu_l[a][b]` / `mu_f[a][b]`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameMatrices {
    #[serde(rename = "A")]
    a: usize,
    #[serde(rename = "B")]
    b: usize,
    mu_l: Vec<Vec<f64>>,
    mu_f: Vec<Vec<f64>>,
}

/// An instance: mean-reward matrices for both players over the joint action
/// space. Immutable after construction; construction validates shape and the
/// `[0, 1]` range, so every accessor can assume a well-formed instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameMatrices", into = "GameMatrices")]
pub struct GameInstance {
    leader_actions: usize,
    follower_actions: usize,
    mu_l: Vec<Vec<f64>>,
    mu_f: Vec<Vec<f64>>,
}

impl TryFrom<GameMatrices> for GameInstance {
    type Error = GameError;

    fn try_from(raw: GameMatrices) -> Result<Self, GameError> {
        let game = GameInstance::new(raw.mu_l, raw.mu_f)?;
        if game.leader_actions != raw.a || game.follower_actions != raw.b {
            return Err(GameError::BadShape);
        }
        Ok(game)
    }
}

impl From<GameInstance> for GameMatrices {
    fn from(game: GameInstance) -> Self {
        GameMatrices {
            a: game.leader_actions,
            b: game.follower_actions,
            mu_l: game.mu_l,
            mu_f: game.mu_f,
        }
    }
}

impl GameInstance {
    /// Builds an instance from the two mean matrices, validating that they
    /// are non-empty, rectangular, dimension-matched, and within `[0, 1]`.
    pub fn new(mu_l: Vec<Vec<f64>>, mu_f: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let leader_actions = mu_l.len();
        if leader_actions == 0 || mu_l[0].is_empty() {
            return Err(GameError::BadShape);
        }
        let follower_actions = mu_l[0].len();
        if mu_l.iter().any(|row| row.len() != follower_actions) {
            return Err(GameError::BadShape);
        }
        if mu_f.len() != leader_actions || mu_f.iter().any(|row| row.len() != follower_actions) {
            return Err(GameError::DimensionMismatch);
        }
        for (matrix, _) in [(&mu_l, Player::Leader), (&mu_f, Player::Follower)] {
            for (a, row) in matrix.iter().enumerate() {
                for (b, &value) in row.iter().enumerate() {
                    if !(0.0..=1.0).contains(&value) {
                        return Err(GameError::MeanOutOfRange { a, b, value });
                    }
                }
            }
        }
        Ok(Self {
            leader_actions,
            follower_actions,
            mu_l,
            mu_f,
        })
    }

    /// The 2x2 instance used by the `table1-example` preset: the follower's
    /// best manipulation target pays it 1.0 while honest best response pays
    /// only 0.1, so the manipulation gap is 0.9.
    pub fn table1() -> Self {
        Self::new(
            vec![vec![0.3, 0.1], vec![0.2, 0.3]],
            vec![vec![0.1, 0.05], vec![1.0, 0.1]],
        )
        .expect("literal matrices are well-formed")
    }

    /// The 2x2 instance used by the `nonconvergence-ucb-ucb` preset: a
    /// leader running plain UCB against a UCB follower keeps sampling the
    /// near-tied follower row and never settles on its equilibrium action.
    pub fn nonconvergence_example() -> Self {
        Self::new(
            vec![vec![0.95, 0.9], vec![1.0, 0.0]],
            vec![vec![0.3, 0.2], vec![0.8, 0.79]],
        )
        .expect("literal matrices are well-formed")
    }

    /// Number of leader actions (rows).
    pub fn leader_actions(&self) -> usize {
        self.leader_actions
    }

    /// Number of follower actions (columns).
    pub fn follower_actions(&self) -> usize {
        self.follower_actions
    }

    /// Mean reward of `who` at a joint action. Panics on an out-of-bounds
    /// pair, as does any other indexed accessor.
    pub fn mean(&self, who: Player, pair: ActionPair) -> f64 {
        match who {
            Player::Leader => self.mu_l[pair.a][pair.b],
            Player::Follower => self.mu_f[pair.a][pair.b],
        }
    }

    /// Leader's mean reward at `(a, b)`.
    pub fn leader_mean(&self, a: usize, b: usize) -> f64 {
        self.mu_l[a][b]
    }

    /// Follower's mean reward at `(a, b)`.
    pub fn follower_mean(&self, a: usize, b: usize) -> f64 {
        self.mu_f[a][b]
    }

    /// Draws a Bernoulli reward in `{0, 1}` with the pair's mean as success
    /// probability. Consumes exactly one draw from `rng`.
    pub fn sample_reward(&self, who: Player, pair: ActionPair, rng: &mut RngStream) -> f64 {
        if rng.bernoulli(self.mean(who, pair)) {
            1.0
        } else {
            0.0
        }
    }

    /// The follower action maximizing `mu_f(a, .)`, lowest index on ties.
    pub fn best_response(&self, a: usize) -> usize {
        argmax(&self.mu_f[a])
    }

    /// The follower action minimizing `mu_l(a, .)` — the response that hurts
    /// the leader the most. Lowest index on ties.
    pub fn worst_response(&self, a: usize) -> usize {
        argmin(&self.mu_l[a])
    }

    /// The full best-response table as a response function.
    pub fn best_response_function(&self) -> ResponseFunction {
        ResponseFunction::new(
            (0..self.leader_actions)
                .map(|a| self.best_response(a))
                .collect(),
        )
    }

    /// The leader's optimum against a best-responding follower, together
    /// with a uniqueness report. Ties break toward the lowest index.
    pub fn stackelberg_equilibrium(&self) -> Equilibrium {
        let mut responses_unique = true;
        let mut induced = Vec::with_capacity(self.leader_actions);
        for a in 0..self.leader_actions {
            let b = self.best_response(a);
            responses_unique &= unique_extreme(&self.mu_f[a], self.mu_f[a][b]);
            induced.push(self.mu_l[a][b]);
        }
        let a_se = argmax(&induced);
        let argmax_unique = unique_extreme(&induced, induced[a_se]);
        Equilibrium {
            pair: ActionPair::new(a_se, self.best_response(a_se)),
            unique: responses_unique && argmax_unique,
        }
    }

    /// Computes the instance's gap profile. The manipulation target is taken
    /// from the exhaustive oracle (falling back to the equivalent greedy
    /// solver when the instance is too large to enumerate); on degenerate
    /// instances with no qualified manipulation at all (strict dominance
    /// fails everywhere), the equilibrium pair stands in for the target,
    /// which makes the manipulation gap 0 and the target-relative gaps
    /// sentinel values.
    pub fn gap_profile(&self) -> GapProfile {
        let se = self.stackelberg_equilibrium().pair;
        let fm = match oracle::best_manipulation_oracle(self) {
            Ok(scored) => scored.plan.target(),
            Err(oracle::OracleError::CapExceeded { .. }) => crate::follower::fbm_solve(self)
                .map(|plan| plan.target())
                .unwrap_or(se),
            Err(oracle::OracleError::NoQualifiedManipulation) => se,
        };
        let br: Vec<usize> = (0..self.leader_actions)
            .map(|a| self.best_response(a))
            .collect();
        let wr: Vec<usize> = (0..self.leader_actions)
            .map(|a| self.worst_response(a))
            .collect();
        let mu_fm_f = self.mu_f[fm.a][fm.b];
        let mu_fm_l = self.mu_l[fm.a][fm.b];

        let mut delta1 = EMPTY_GAP_SENTINEL;
        let mut delta5 = EMPTY_GAP_SENTINEL;
        for a in 0..self.leader_actions {
            for b in 0..self.follower_actions {
                if b != br[a] {
                    delta1 = delta1.min(self.mu_f[a][br[a]] - self.mu_f[a][b]);
                }
                if b != wr[a] {
                    delta5 = delta5.min(self.mu_l[a][b] - self.mu_l[a][wr[a]]);
                }
            }
        }

        let mut delta2 = EMPTY_GAP_SENTINEL;
        let mut delta3 = EMPTY_GAP_SENTINEL;
        let se_value = self.mu_l[se.a][se.b];
        for a in 0..self.leader_actions {
            if a != se.a {
                delta2 = delta2.min(se_value - self.mu_l[a][br[a]]);
            }
            if a != fm.a {
                delta3 = delta3.min(mu_fm_l - self.mu_l[a][wr[a]]);
            }
        }

        // Largest worst-case payoff the leader can fall back on outside a
        // given row; used by the enforceability slack below.
        let floor: Vec<f64> = (0..self.leader_actions)
            .map(|a| self.mu_l[a][wr[a]])
            .collect();

        let mut delta4 = EMPTY_GAP_SENTINEL;
        let mut delta6 = EMPTY_GAP_SENTINEL;
        for a in 0..self.leader_actions {
            for b in 0..self.follower_actions {
                let value = self.mu_f[a][b];
                if value < mu_fm_f {
                    delta4 = delta4.min(mu_fm_f - value);
                } else if value > mu_fm_f {
                    let rival = max_excluding(&floor, a);
                    delta6 = delta6.min(rival - self.mu_l[a][b]);
                }
            }
        }

        GapProfile {
            delta1,
            delta2,
            delta3,
            delta4,
            delta5,
            delta6,
            manipulation_gap: mu_fm_f - self.mu_f[se.a][se.b],
        }
    }

    /// True when per-row best responses, the equilibrium argmax, and the
    /// best manipulation target are all strictly unique. Random games are
    /// resampled until this holds so that learning targets are unambiguous.
    fn has_unique_structure(&self) -> bool {
        let mut induced = Vec::with_capacity(self.leader_actions);
        for a in 0..self.leader_actions {
            let b = self.best_response(a);
            if !unique_extreme(&self.mu_f[a], self.mu_f[a][b]) {
                return false;
            }
            induced.push(self.mu_l[a][b]);
        }
        if !unique_extreme(&induced, induced[argmax(&induced)]) {
            return false;
        }

        // The best manipulation target must exist and be unique. A pair is
        // enforceable exactly when its leader payoff strictly beats the best
        // worst-case payoff available in the other rows, so scanning pairs
        // directly is equivalent to consulting the exhaustive oracle.
        let floor: Vec<f64> = (0..self.leader_actions)
            .map(|a| self.mu_l[a][self.worst_response(a)])
            .collect();
        let mut best: Option<f64> = None;
        let mut best_unique = false;
        for a in 0..self.leader_actions {
            let rival = max_excluding(&floor, a);
            for b in 0..self.follower_actions {
                if self.mu_l[a][b] > rival {
                    let value = self.mu_f[a][b];
                    match best {
                        Some(current) if value == current => best_unique = false,
                        Some(current) if value > current => {
                            best = Some(value);
                            best_unique = true;
                        }
                        None => {
                            best = Some(value);
                            best_unique = true;
                        }
                        _ => {}
                    }
                }
            }
        }
        best.is_some() && best_unique
    }
}

/// Draws a game with i.i.d. uniform `(0, 1)` mean entries, resampling until
/// best responses, the equilibrium, and the best manipulation target are all
/// unique. Fails after [`MAX_GENERATION_ATTEMPTS`] rejections (which, with
/// continuous draws, indicates something is badly wrong rather than bad
/// luck).
pub fn random_game(
    leader_actions: usize,
    follower_actions: usize,
    rng: &mut RngStream,
) -> Result<GameInstance, GameError> {
    if leader_actions == 0 || follower_actions == 0 {
        return Err(GameError::BadShape);
    }
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let draw = |rng: &mut RngStream| -> Vec<Vec<f64>> {
            (0..leader_actions)
                .map(|_| (0..follower_actions).map(|_| rng.uniform_open()).collect())
                .collect()
        };
        let mu_l = draw(rng);
        let mu_f = draw(rng);
        let game = GameInstance::new(mu_l, mu_f).expect("draws lie in (0, 1)");
        if game.has_unique_structure() {
            return Ok(game);
        }
    }
    Err(GameError::GenerationCapExceeded(MAX_GENERATION_ATTEMPTS))
}

/// Index of the maximum value, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the minimum value, lowest index on ties.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// True when `extreme` occurs exactly once in `values`.
fn unique_extreme(values: &[f64], extreme: f64) -> bool {
    values.iter().filter(|&&v| v == extreme).count() == 1
}

/// `max_{i != skip} values[i]`; negative infinity when no other entry exists.
pub(crate) fn max_excluding(values: &[f64], skip: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}
