//! The round protocol and the measurement harness around it.
//!
//! Each round: the leader commits an action, the follower observes it and
//! responds, both receive rewards (Bernoulli draws or exact means), and each
//! side updates its own learner from its own feedback. A [`SimConfig`]
//! pins everything — game source, algorithms, feedback setting, horizon,
//! seeds, noise — so that `(config, seed)` determines a run byte for byte.
//!
//! Randomness is split into named substreams per run seed (action sampling,
//! leader reward noise, follower reward noise), so replacing one algorithm
//! never perturbs the draws any other component sees.

use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::follower::{fmucb_plan, pessimistic_fbm_solve, FollowerBanditState, ManipulationPlan};
use crate::game::{
    random_game, ActionPair, Equilibrium, GameError, GameInstance, GapProfile, Player,
    ResponseFunction,
};
use crate::leader::{Exp3State, LeaderError, UcbLeaderState, UcbeState};
use crate::rng::RngStream;

/// Window length (in rounds) for trailing "has it converged" metrics.
pub const DEFAULT_TRAILING_WINDOW: u64 = 1000;

/// Default confidence parameter for every UCB-style rule.
pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("seeds must be non-empty")]
    NoSeeds,
    #[error("trailing_window must lie in [1, horizon]")]
    BadTrailingWindow,
    #[error("checkpoints must be strictly increasing and lie in [1, horizon]")]
    BadCheckpoints,
    #[error("{param} = {value} outside its valid range {range}")]
    ParamOutOfRange {
        param: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("parameter `{param}` does not apply to the `{algo}` algorithm")]
    ForeignParam {
        param: &'static str,
        algo: &'static str,
    },
    #[error(
        "follower strategy `{strategy}` runs in the `{required}` information \
         setting, but the config requests `{given}`"
    )]
    InformationMismatch {
        strategy: &'static str,
        required: &'static str,
        given: &'static str,
    },
    #[error("random game dimensions must be at least 1x1")]
    BadGameDimensions,
    #[error(
        "the leader's exploration budget needs a gap estimate here: supply \
         `epsilon` explicitly (the exhaustive oracle cannot certify gaps for \
         a game this large)"
    )]
    EpsilonRequired,
    #[error("gap-derived epsilon is 0 (tied game); supply `epsilon` explicitly")]
    ZeroEpsilon,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Leader(#[from] LeaderError),
    #[error("the game admits no qualified manipulation, so `{strategy}` has no target to pursue")]
    DegenerateManipulation { strategy: &'static str },
}

/// What the follower observes beyond its own reward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoSetting {
    /// Own reward only.
    Limited,
    /// Both mean matrices are known exactly.
    Omniscient,
    /// Both players' reward samples are observed each round.
    NoisySide,
}

impl InfoSetting {
    fn name(self) -> &'static str {
        match self {
            InfoSetting::Limited => "limited",
            InfoSetting::Omniscient => "omniscient",
            InfoSetting::NoisySide => "noisy_side",
        }
    }
}

/// Reward noise model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Rewards are Bernoulli draws with the pair's mean.
    #[default]
    Bernoulli,
    /// Rewards equal the pair's mean exactly (no RNG draws consumed).
    Noiseless,
}

/// How much per-round detail to keep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceGranularity {
    /// Keep nothing per-round; metrics only.
    None,
    /// Keep records at checkpoint rounds.
    #[default]
    Checkpoints,
    /// Keep every round.
    Full,
}

/// Built-in instances addressable by name in configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedGame {
    Table1,
    Nonconvergence,
}

/// Parameters for a seeded random instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGameSpec {
    #[serde(rename = "A")]
    pub leader_actions: usize,
    #[serde(rename = "B")]
    pub follower_actions: usize,
    pub seed: u64,
}

/// Where the game comes from: a named example, a seeded random draw, or
/// explicit matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameSource {
    Named(NamedGame),
    Random { random: RandomGameSpec },
    Explicit { explicit: GameInstance },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderAlgo {
    Exp3,
    Ucbe,
    Ucb,
}

impl LeaderAlgo {
    pub fn name(self) -> &'static str {
        match self {
            LeaderAlgo::Exp3 => "exp3",
            LeaderAlgo::Ucbe => "ucbe",
            LeaderAlgo::Ucb => "ucb",
        }
    }
}

/// Leader algorithm choice plus optional parameters. Omitted parameters take
/// horizon-tuned defaults: `alpha = eta = horizon^(-1/3)` for exp3,
/// `delta = 0.01` for the UCB family, and a UCBE budget derived from the
/// instance's own gap profile (`multiplier = 1`). Parameters that do not
/// belong to the chosen algorithm are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeaderSpec {
    pub algo: LeaderAlgo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0_multiplier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl LeaderSpec {
    pub fn exp3(alpha: f64, eta: f64) -> Self {
        Self {
            algo: LeaderAlgo::Exp3,
            alpha: Some(alpha),
            eta: Some(eta),
            delta: None,
            s0_multiplier: None,
            epsilon: None,
        }
    }

    pub fn ucbe(delta: f64, s0_multiplier: f64, epsilon: Option<f64>) -> Self {
        Self {
            algo: LeaderAlgo::Ucbe,
            alpha: None,
            eta: None,
            delta: Some(delta),
            s0_multiplier: Some(s0_multiplier),
            epsilon,
        }
    }

    pub fn ucb(delta: f64) -> Self {
        Self {
            algo: LeaderAlgo::Ucb,
            alpha: None,
            eta: None,
            delta: Some(delta),
            s0_multiplier: None,
            epsilon: None,
        }
    }

    pub fn defaults(algo: LeaderAlgo) -> Self {
        Self {
            algo,
            alpha: None,
            eta: None,
            delta: None,
            s0_multiplier: None,
            epsilon: None,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let check_absent = |param: &'static str, value: &Option<f64>| {
            if value.is_some() {
                Err(ConfigError::ForeignParam {
                    param,
                    algo: self.algo.name(),
                })
            } else {
                Ok(())
            }
        };
        match self.algo {
            LeaderAlgo::Exp3 => {
                check_absent("delta", &self.delta)?;
                check_absent("s0_multiplier", &self.s0_multiplier)?;
                check_absent("epsilon", &self.epsilon)?;
                if let Some(alpha) = self.alpha {
                    check_range("alpha", alpha, 0.0..=1.0)?;
                }
                if let Some(eta) = self.eta {
                    check_positive("eta", eta)?;
                }
            }
            LeaderAlgo::Ucbe => {
                check_absent("alpha", &self.alpha)?;
                check_absent("eta", &self.eta)?;
                if let Some(delta) = self.delta {
                    check_range("delta", delta, f64::MIN_POSITIVE..=1.0)?;
                }
                if let Some(m) = self.s0_multiplier {
                    check_positive("s0_multiplier", m)?;
                }
                if let Some(eps) = self.epsilon {
                    if eps.is_nan() || eps <= 0.0 {
                        return Err(ConfigError::ParamOutOfRange {
                            param: "epsilon",
                            value: eps,
                            range: "(0, inf]",
                        });
                    }
                }
            }
            LeaderAlgo::Ucb => {
                check_absent("alpha", &self.alpha)?;
                check_absent("eta", &self.eta)?;
                check_absent("s0_multiplier", &self.s0_multiplier)?;
                check_absent("epsilon", &self.epsilon)?;
                if let Some(delta) = self.delta {
                    check_range("delta", delta, f64::MIN_POSITIVE..=1.0)?;
                }
            }
        }
        Ok(())
    }
}

fn check_range(
    param: &'static str,
    value: f64,
    range: std::ops::RangeInclusive<f64>,
) -> Result<(), ConfigError> {
    if range.contains(&value) && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::ParamOutOfRange {
            param,
            value,
            range: "[0, 1]",
        })
    }
}

fn check_positive(param: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::ParamOutOfRange {
            param,
            value,
            range: "(0, inf)",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowerStrategy {
    /// Learned honest best response (limited feedback).
    Ucb,
    /// Omniscient best manipulation.
    Fbm,
    /// Manipulation learned from noisy side information.
    Fmucb,
    /// Omniscient manipulation under adversarial tie-breaking.
    FbmPessimistic,
}

impl FollowerStrategy {
    pub fn name(self) -> &'static str {
        match self {
            FollowerStrategy::Ucb => "ucb",
            FollowerStrategy::Fbm => "fbm",
            FollowerStrategy::Fmucb => "fmucb",
            FollowerStrategy::FbmPessimistic => "fbm_pessimistic",
        }
    }

    /// The information setting each strategy is defined for.
    pub fn required_information(self) -> InfoSetting {
        match self {
            FollowerStrategy::Ucb => InfoSetting::Limited,
            FollowerStrategy::Fbm => InfoSetting::Omniscient,
            FollowerStrategy::Fmucb => InfoSetting::NoisySide,
            FollowerStrategy::FbmPessimistic => InfoSetting::Omniscient,
        }
    }

    /// Whether the strategy pursues a manipulation target rather than the
    /// equilibrium.
    pub fn is_manipulative(self) -> bool {
        !matches!(self, FollowerStrategy::Ucb)
    }
}

/// Follower strategy choice plus optional confidence parameter (UCB-style
/// strategies only; defaults to 0.01).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FollowerSpec {
    pub strategy: FollowerStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl FollowerSpec {
    pub fn new(strategy: FollowerStrategy) -> Self {
        Self {
            strategy,
            delta: None,
        }
    }

    pub fn with_delta(strategy: FollowerStrategy, delta: f64) -> Self {
        Self {
            strategy,
            delta: Some(delta),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if let Some(delta) = self.delta {
            if !self.strategy.is_learning() {
                return Err(ConfigError::ForeignParam {
                    param: "delta",
                    algo: self.strategy.name(),
                });
            }
            check_range("delta", delta, f64::MIN_POSITIVE..=1.0)?;
        }
        Ok(())
    }
}

impl FollowerStrategy {
    fn is_learning(self) -> bool {
        matches!(self, FollowerStrategy::Ucb | FollowerStrategy::Fmucb)
    }
}

/// Full description of an experiment: everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub game: GameSource,
    pub leader: LeaderSpec,
    pub follower: FollowerSpec,
    /// Optional; defaults to (and must match) the strategy's own setting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub information: Option<InfoSetting>,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub noise: NoiseMode,
    /// Window for trailing convergence metrics; defaults to 1000 (clipped
    /// to the horizon implicitly by validation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trailing_window: Option<u64>,
    /// Explicit checkpoint rounds; defaults to a log-spaced grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default)]
    pub trace: TraceGranularity,
}

impl SimConfig {
    /// Minimal config with defaults everywhere else.
    pub fn new(
        game: GameSource,
        leader: LeaderSpec,
        follower: FollowerSpec,
        horizon: u64,
        seeds: Vec<u64>,
    ) -> Self {
        Self {
            game,
            leader,
            follower,
            information: None,
            horizon,
            seeds,
            noise: NoiseMode::default(),
            trailing_window: None,
            checkpoints: None,
            trace: TraceGranularity::default(),
        }
    }

    /// Checks every cross-field invariant. Run construction calls this too,
    /// so a config that validates is a config that runs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon == 0 {
            return Err(ConfigError::ZeroHorizon);
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::NoSeeds);
        }
        if let Some(window) = self.trailing_window {
            if window == 0 || window > self.horizon {
                return Err(ConfigError::BadTrailingWindow);
            }
        }
        if let Some(cps) = &self.checkpoints {
            let increasing = cps.windows(2).all(|w| w[0] < w[1]);
            let in_range = cps.iter().all(|&t| t >= 1 && t <= self.horizon);
            if !(increasing && in_range) {
                return Err(ConfigError::BadCheckpoints);
            }
        }
        if let GameSource::Random { random } = &self.game {
            if random.leader_actions == 0 || random.follower_actions == 0 {
                return Err(ConfigError::BadGameDimensions);
            }
        }
        self.leader.validate()?;
        self.follower.validate()?;
        let required = self.follower.strategy.required_information();
        if let Some(given) = self.information {
            if given != required {
                return Err(ConfigError::InformationMismatch {
                    strategy: self.follower.strategy.name(),
                    required: required.name(),
                    given: given.name(),
                });
            }
        }
        Ok(())
    }

    /// The information setting the runs will use.
    pub fn effective_information(&self) -> InfoSetting {
        self.follower.strategy.required_information()
    }

    /// Materializes the configured game. Random sources use their own seed
    /// and substream, independent of the run seeds.
    pub fn resolve_game(&self) -> Result<GameInstance, GameError> {
        match &self.game {
            GameSource::Named(NamedGame::Table1) => Ok(GameInstance::table1()),
            GameSource::Named(NamedGame::Nonconvergence) => {
                Ok(GameInstance::nonconvergence_example())
            }
            GameSource::Random { random } => {
                let mut rng = RngStream::substream(random.seed, "game-generation");
                random_game(random.leader_actions, random.follower_actions, &mut rng)
            }
            GameSource::Explicit { explicit } => Ok(explicit.clone()),
        }
    }

    /// Effective trailing window (default, clipped to the horizon).
    pub fn effective_trailing_window(&self) -> u64 {
        self.trailing_window
            .unwrap_or(DEFAULT_TRAILING_WINDOW)
            .min(self.horizon)
    }

    /// Effective checkpoint grid.
    pub fn effective_checkpoints(&self) -> Vec<u64> {
        self.checkpoints
            .clone()
            .unwrap_or_else(|| log_spaced_checkpoints(self.horizon))
    }
}

/// Log-spaced checkpoint grid over `[1, horizon]`: multiplicative steps of
/// about 1.25, always including both endpoints.
pub fn log_spaced_checkpoints(horizon: u64) -> Vec<u64> {
    let mut cps = Vec::new();
    let mut t = 1u64;
    while t < horizon {
        cps.push(t);
        t = (t + 1).max((t as f64 * 1.25) as u64);
    }
    cps.push(horizon);
    cps
}

/// Ground truth the metrics are computed against: equilibrium, best
/// responses, gap profile, and the oracle manipulation plans.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub equilibrium: Equilibrium,
    pub best_response: ResponseFunction,
    pub gaps: GapProfile,
    /// The optimistic manipulation plan; `None` on degenerate instances.
    pub manipulation: Option<ManipulationPlan>,
    /// The adversarial-tie-break manipulation plan (total).
    pub pessimistic: ManipulationPlan,
}

impl GroundTruth {
    pub fn compute(game: &GameInstance) -> Self {
        Self {
            equilibrium: game.stackelberg_equilibrium(),
            best_response: game.best_response_function(),
            gaps: game.gap_profile(),
            manipulation: crate::follower::fbm_solve(game).ok(),
            pessimistic: pessimistic_fbm_solve(game),
        }
    }

    /// The pair a given strategy is trying to converge to.
    fn target_for(&self, strategy: FollowerStrategy) -> Result<ActionPair, SimError> {
        match strategy {
            FollowerStrategy::Ucb => Ok(self.equilibrium.pair),
            FollowerStrategy::Fbm | FollowerStrategy::Fmucb => {
                self.manipulation.as_ref().map(|p| p.target()).ok_or(
                    SimError::DegenerateManipulation {
                        strategy: strategy.name(),
                    },
                )
            }
            FollowerStrategy::FbmPessimistic => Ok(self.pessimistic.target()),
        }
    }
}

/// Leader learner dispatch.
enum LeaderLearner {
    Exp3(Exp3State),
    Ucbe(UcbeState),
    Ucb(UcbLeaderState),
}

impl LeaderLearner {
    fn build(
        spec: &LeaderSpec,
        game: &GameInstance,
        horizon: u64,
        truth: &GroundTruth,
        manipulative_follower: bool,
    ) -> Result<Self, SimError> {
        let actions = game.leader_actions();
        match spec.algo {
            LeaderAlgo::Exp3 => {
                let default_rate = (horizon as f64).powf(-1.0 / 3.0);
                let alpha = spec.alpha.unwrap_or(default_rate);
                let eta = spec.eta.unwrap_or(default_rate);
                Ok(Self::Exp3(Exp3State::new(actions, alpha, eta)?))
            }
            LeaderAlgo::Ucbe => {
                let delta = spec.delta.unwrap_or(DEFAULT_DELTA);
                let multiplier = spec.s0_multiplier.unwrap_or(1.0);
                let epsilon = match spec.epsilon {
                    Some(eps) => eps,
                    None => {
                        let derived = if manipulative_follower {
                            truth.gaps.manipulation_epsilon()
                        } else {
                            truth.gaps.best_response_epsilon()
                        };
                        if derived <= 0.0 {
                            return Err(ConfigError::ZeroEpsilon.into());
                        }
                        derived
                    }
                };
                let s0 = crate::leader::ucbe_exploration_budget(
                    actions,
                    game.follower_actions(),
                    horizon,
                    delta,
                    epsilon,
                    multiplier,
                );
                Ok(Self::Ucbe(UcbeState::new(actions, s0)?))
            }
            LeaderAlgo::Ucb => {
                let delta = spec.delta.unwrap_or(DEFAULT_DELTA);
                Ok(Self::Ucb(UcbLeaderState::new(actions, horizon, delta)?))
            }
        }
    }

    fn select(&self, rng: &mut RngStream) -> usize {
        match self {
            Self::Exp3(s) => s.select(rng),
            Self::Ucbe(s) => s.select(),
            Self::Ucb(s) => s.select(),
        }
    }

    fn update(&mut self, action: usize, reward: f64) {
        let result = match self {
            Self::Exp3(s) => s.update(action, reward),
            Self::Ucbe(s) => s.update(action, reward),
            Self::Ucb(s) => s.update(action, reward),
        };
        result.expect("rewards from the game are always in [0, 1]");
    }

    fn distribution_fingerprint(&self) -> Option<u64> {
        match self {
            Self::Exp3(s) => Some(s.distribution_fingerprint()),
            _ => None,
        }
    }
}

/// Follower strategy dispatch.
enum FollowerRuntime {
    Ucb(FollowerBanditState),
    Committed(ManipulationPlan),
    Fmucb(FollowerBanditState),
}

impl FollowerRuntime {
    fn build(
        spec: &FollowerSpec,
        game: &GameInstance,
        horizon: u64,
        truth: &GroundTruth,
    ) -> Result<Self, SimError> {
        let delta = spec.delta.unwrap_or(DEFAULT_DELTA);
        let (a_n, b_n) = (game.leader_actions(), game.follower_actions());
        match spec.strategy {
            FollowerStrategy::Ucb => Ok(Self::Ucb(FollowerBanditState::new(
                a_n, b_n, horizon, delta, false,
            ))),
            FollowerStrategy::Fbm => {
                let plan = truth
                    .manipulation
                    .clone()
                    .ok_or(SimError::DegenerateManipulation {
                        strategy: spec.strategy.name(),
                    })?;
                Ok(Self::Committed(plan))
            }
            FollowerStrategy::FbmPessimistic => Ok(Self::Committed(truth.pessimistic.clone())),
            FollowerStrategy::Fmucb => Ok(Self::Fmucb(FollowerBanditState::new(
                a_n, b_n, horizon, delta, true,
            ))),
        }
    }
}

/// One recorded round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: u64,
    pub pair: ActionPair,
    pub leader_reward: f64,
    pub follower_reward: f64,
    /// Bit-exact fingerprint of the leader's sampling distribution at
    /// selection time (randomized leaders only).
    pub leader_distribution: Option<u64>,
    /// The manipulation target the follower was steering toward this round
    /// (manipulation strategies only).
    pub plan_target: Option<ActionPair>,
    /// True when the follower's candidate scan exhausted and fell back.
    pub plan_fallback: bool,
}

/// Running averages snapshotted at one checkpoint round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckpointMetrics {
    pub t: u64,
    /// Mean per-round gap to the equilibrium payoff against an honest
    /// follower: nonnegative and nondecreasing in its cumulative form.
    pub mean_action_regret: f64,
    /// Mean per-round gap to the equilibrium payoff at the pairs actually
    /// played; can be negative when manipulation helps the leader.
    pub mean_realized_regret: f64,
    pub follower_mean_reward: f64,
    /// Mean per-round shortfall of the follower's play against its honest
    /// best response.
    pub mean_follower_br_regret: f64,
    /// Fraction of rounds so far whose plan differed from the oracle plan
    /// (manipulation learners only; 0 elsewhere).
    pub wrong_plan_rate: f64,
}

/// End-of-run metrics for a single seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub horizon: u64,
    /// The pair this run's follower strategy is aiming for (equilibrium or
    /// manipulation target).
    pub target_pair: ActionPair,
    pub leader_action_counts: Vec<u64>,
    pub cumulative_action_regret: f64,
    pub cumulative_realized_regret: f64,
    pub cumulative_follower_br_regret: f64,
    /// Full-run average of the follower's mean reward at the played pairs.
    pub follower_mean_reward: f64,
    /// Same average over the trailing window only.
    pub trailing_follower_mean_reward: f64,
    /// Fraction of trailing-window rounds that played exactly the target.
    pub trailing_hit_rate: f64,
    /// Whether the final round played the target.
    pub final_round_hit: bool,
    /// Rounds whose rebuilt plan differed from the oracle plan.
    pub wrong_plan_rounds: u64,
    /// Whether the final round's rebuilt plan differed from the oracle plan
    /// (always false for strategies that never rebuild).
    pub final_plan_wrong: bool,
    /// Rounds that used the exhausted-scan fallback plan.
    pub fallback_rounds: u64,
    pub checkpoints: Vec<CheckpointMetrics>,
}

/// A finished run: per-round records (per the trace granularity) + metrics.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<RoundRecord>,
    pub metrics: RunMetrics,
}

/// One aggregate cell of the cross-seed summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub checkpoint_t: u64,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n_seeds: usize,
}

/// A full batch: the resolved game, its ground truth, every seed's output,
/// and the cross-seed summary.
#[derive(Debug)]
pub struct BatchResult {
    pub game: GameInstance,
    pub truth: GroundTruth,
    pub runs: Vec<RunOutput>,
    pub summary: Vec<SummaryRow>,
}

/// Executes one seed of a validated config. `(config, seed)` fully
/// determines the output, including every reward draw.
pub fn run_game(config: &SimConfig, seed: u64) -> Result<RunOutput, SimError> {
    config.validate()?;
    let game = config.resolve_game()?;
    let truth = GroundTruth::compute(&game);
    run_one(config, &game, &truth, seed)
}

fn run_one(
    config: &SimConfig,
    game: &GameInstance,
    truth: &GroundTruth,
    seed: u64,
) -> Result<RunOutput, SimError> {
    let horizon = config.horizon;
    let strategy = config.follower.strategy;
    let target = truth.target_for(strategy)?;
    let mut leader = LeaderLearner::build(
        &config.leader,
        game,
        horizon,
        truth,
        strategy.is_manipulative(),
    )?;
    let mut follower = FollowerRuntime::build(&config.follower, game, horizon, truth)?;

    let mut sample_rng = RngStream::substream(seed, "leader-sample");
    let mut leader_reward_rng = RngStream::substream(seed, "leader-reward");
    let mut follower_reward_rng = RngStream::substream(seed, "follower-reward");

    let window = config.effective_trailing_window() as usize;
    let checkpoints = config.effective_checkpoints();
    let mut next_checkpoint = 0usize;

    let mut records = Vec::with_capacity(match config.trace {
        TraceGranularity::None => 0,
        TraceGranularity::Checkpoints => checkpoints.len(),
        TraceGranularity::Full => horizon as usize,
    });

    let se_value = game.leader_mean(truth.equilibrium.pair.a, truth.equilibrium.pair.b);
    let mut action_counts = vec![0u64; game.leader_actions()];
    let mut cum_action_regret = 0.0;
    let mut cum_realized_regret = 0.0;
    let mut cum_br_regret = 0.0;
    let mut follower_reward_sum = 0.0;
    let mut wrong_plan_rounds = 0u64;
    let mut final_plan_wrong = false;
    let mut fallback_rounds = 0u64;
    let mut checkpoint_metrics = Vec::with_capacity(checkpoints.len());

    // Ring buffers over the trailing window.
    let mut trail_hit = vec![false; window];
    let mut trail_value = vec![0.0f64; window];

    for t in 1..=horizon {
        let a = leader.select(&mut sample_rng);
        let (b, plan_target, plan_fallback, plan_wrong) = match &follower {
            FollowerRuntime::Ucb(state) => (state.ucb_respond(a), None, false, false),
            FollowerRuntime::Committed(plan) => {
                (plan.respond(a), Some(plan.target()), false, false)
            }
            FollowerRuntime::Fmucb(state) => {
                let current = fmucb_plan(state);
                let wrong = match &truth.manipulation {
                    Some(oracle_plan) => current.plan != *oracle_plan,
                    None => true,
                };
                (
                    current.plan.respond(a),
                    Some(current.plan.target()),
                    current.fallback,
                    wrong,
                )
            }
        };
        let pair = ActionPair::new(a, b);
        let (r_l, r_f) = match config.noise {
            NoiseMode::Bernoulli => (
                game.sample_reward(Player::Leader, pair, &mut leader_reward_rng),
                game.sample_reward(Player::Follower, pair, &mut follower_reward_rng),
            ),
            NoiseMode::Noiseless => (
                game.mean(Player::Leader, pair),
                game.mean(Player::Follower, pair),
            ),
        };

        let fingerprint = leader.distribution_fingerprint();
        leader.update(a, r_l);
        match &mut follower {
            FollowerRuntime::Ucb(state) => state
                .update(pair, r_f, None)
                .expect("limited-feedback update carries no leader reward"),
            FollowerRuntime::Fmucb(state) => state
                .update(pair, r_f, Some(r_l))
                .expect("side-information update carries the leader reward"),
            FollowerRuntime::Committed(_) => {}
        }

        // Metrics against true means.
        let br_b = truth.best_response.respond(a);
        cum_action_regret += se_value - game.leader_mean(a, br_b);
        cum_realized_regret += se_value - game.leader_mean(a, b);
        cum_br_regret += game.follower_mean(a, br_b) - game.follower_mean(a, b);
        let follower_value = game.follower_mean(a, b);
        follower_reward_sum += follower_value;
        action_counts[a] += 1;
        wrong_plan_rounds += u64::from(plan_wrong);
        final_plan_wrong = plan_wrong;
        fallback_rounds += u64::from(plan_fallback);

        let slot = ((t - 1) as usize) % window;
        trail_hit[slot] = pair == target;
        trail_value[slot] = follower_value;

        let at_checkpoint =
            next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] == t;
        if at_checkpoint {
            next_checkpoint += 1;
            let tf = t as f64;
            checkpoint_metrics.push(CheckpointMetrics {
                t,
                mean_action_regret: cum_action_regret / tf,
                mean_realized_regret: cum_realized_regret / tf,
                follower_mean_reward: follower_reward_sum / tf,
                mean_follower_br_regret: cum_br_regret / tf,
                wrong_plan_rate: wrong_plan_rounds as f64 / tf,
            });
        }

        let record_round = match config.trace {
            TraceGranularity::None => false,
            TraceGranularity::Checkpoints => at_checkpoint,
            TraceGranularity::Full => true,
        };
        if record_round {
            records.push(RoundRecord {
                t,
                pair,
                leader_reward: r_l,
                follower_reward: r_f,
                leader_distribution: fingerprint,
                plan_target,
                plan_fallback,
            });
        }
    }

    let window_f = window as f64;
    let trailing_hits = trail_hit.iter().filter(|&&h| h).count() as f64;
    let trailing_sum: f64 = trail_value.iter().sum();
    let last_slot = ((horizon - 1) as usize) % window;

    let metrics = RunMetrics {
        seed,
        horizon,
        target_pair: target,
        leader_action_counts: action_counts,
        cumulative_action_regret: cum_action_regret,
        cumulative_realized_regret: cum_realized_regret,
        cumulative_follower_br_regret: cum_br_regret,
        follower_mean_reward: follower_reward_sum / horizon as f64,
        trailing_follower_mean_reward: trailing_sum / window_f,
        trailing_hit_rate: trailing_hits / window_f,
        final_round_hit: trail_hit[last_slot],
        wrong_plan_rounds,
        final_plan_wrong,
        fallback_rounds,
        checkpoints: checkpoint_metrics,
    };
    Ok(RunOutput { records, metrics })
}

/// Executes every configured seed, optionally across threads, and builds the
/// cross-seed summary. Results are ordered by seed position regardless of
/// thread scheduling, so output is deterministic for any thread count.
pub fn batch_run(config: &SimConfig, threads: usize) -> Result<BatchResult, SimError> {
    config.validate()?;
    let game = config.resolve_game()?;
    let truth = GroundTruth::compute(&game);
    // Surface degenerate-target errors before spawning anything.
    truth.target_for(config.follower.strategy)?;

    let seeds = &config.seeds;
    let mut runs: Vec<Option<RunOutput>> = Vec::new();
    runs.resize_with(seeds.len(), || None);

    let workers = threads.max(1).min(seeds.len());
    if workers <= 1 {
        for (i, &seed) in seeds.iter().enumerate() {
            runs[i] = Some(run_one(config, &game, &truth, seed)?);
        }
    } else {
        let results = thread::scope(|scope| {
            let mut handles = Vec::with_capacity(workers);
            for worker in 0..workers {
                let game = &game;
                let truth = &truth;
                let handle = scope.spawn(move || {
                    let mut out = Vec::new();
                    let mut i = worker;
                    while i < seeds.len() {
                        out.push((i, run_one(config, game, truth, seeds[i])));
                        i += workers;
                    }
                    out
                });
                handles.push(handle);
            }
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker threads do not panic"))
                .collect::<Vec<_>>()
        });
        for (i, result) in results {
            runs[i] = Some(result?);
        }
    }

    let runs: Vec<RunOutput> = runs
        .into_iter()
        .map(|r| r.expect("every seed ran"))
        .collect();
    let summary = summarize(config, &truth, &runs);
    Ok(BatchResult {
        game,
        truth,
        runs,
        summary,
    })
}

/// Cross-seed mean and (population) standard deviation for each checkpoint
/// metric, plus final-scope rows at the horizon.
fn summarize(config: &SimConfig, truth: &GroundTruth, runs: &[RunOutput]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    let n = runs.len();
    let checkpoint_count = runs[0].metrics.checkpoints.len();

    let mut push = |t: u64, metric: &str, values: Vec<f64>| {
        // Bitwise-identical values (e.g. noiseless deterministic runs) get
        // an exactly-zero spread rather than division-rounding dust.
        let identical = values.windows(2).all(|w| w[0].to_bits() == w[1].to_bits());
        let (mean, std) = if identical {
            (values[0], 0.0)
        } else {
            let mean = values.iter().sum::<f64>() / n as f64;
            let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            (mean, variance.sqrt())
        };
        rows.push(SummaryRow {
            checkpoint_t: t,
            metric: metric.to_string(),
            mean,
            std,
            n_seeds: n,
        });
    };

    for c in 0..checkpoint_count {
        let t = runs[0].metrics.checkpoints[c].t;
        let grab = |f: fn(&CheckpointMetrics) -> f64| -> Vec<f64> {
            runs.iter().map(|r| f(&r.metrics.checkpoints[c])).collect()
        };
        push(t, "mean_action_regret", grab(|m| m.mean_action_regret));
        push(t, "mean_realized_regret", grab(|m| m.mean_realized_regret));
        push(t, "follower_mean_reward", grab(|m| m.follower_mean_reward));
        push(
            t,
            "mean_follower_br_regret",
            grab(|m| m.mean_follower_br_regret),
        );
        push(t, "wrong_plan_rate", grab(|m| m.wrong_plan_rate));
    }

    let t = config.horizon;
    let grab =
        |f: fn(&RunMetrics) -> f64| -> Vec<f64> { runs.iter().map(|r| f(&r.metrics)).collect() };
    push(t, "trailing_hit_rate", grab(|m| m.trailing_hit_rate));
    push(
        t,
        "trailing_follower_mean_reward",
        grab(|m| m.trailing_follower_mean_reward),
    );
    push(
        t,
        "final_round_hit",
        grab(|m| if m.final_round_hit { 1.0 } else { 0.0 }),
    );
    push(t, "wrong_plan_rounds", grab(|m| m.wrong_plan_rounds as f64));
    push(t, "fallback_rounds", grab(|m| m.fallback_rounds as f64));
    push(t, "manipulation_gap", vec![truth.gaps.manipulation_gap; n]);
    rows
}

/// Outcome of the fixed diagnostic run demonstrating that a vanilla-UCB
/// leader facing a UCB follower can stall away from its equilibrium action.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NonconvergenceProbe {
    pub horizon: u64,
    /// Fraction of rounds the leader played its equilibrium action.
    pub equilibrium_action_fraction: f64,
    pub mean_realized_regret: f64,
    pub cumulative_realized_regret: f64,
}

/// Runs the diagnostic: the built-in near-tie instance, vanilla UCB on both
/// sides, exact (noiseless) rewards, one deterministic run.
pub fn nonconvergence_probe(horizon: u64) -> Result<NonconvergenceProbe, SimError> {
    let mut config = SimConfig::new(
        GameSource::Named(NamedGame::Nonconvergence),
        LeaderSpec::ucb(DEFAULT_DELTA),
        FollowerSpec::with_delta(FollowerStrategy::Ucb, DEFAULT_DELTA),
        horizon,
        vec![1],
    );
    config.noise = NoiseMode::Noiseless;
    config.trace = TraceGranularity::None;
    let out = run_game(&config, 1)?;
    let se_action = GameInstance::nonconvergence_example()
        .stackelberg_equilibrium()
        .pair
        .a;
    let fraction = out.metrics.leader_action_counts[se_action] as f64 / horizon as f64;
    Ok(NonconvergenceProbe {
        horizon,
        equilibrium_action_fraction: fraction,
        mean_realized_regret: out.metrics.cumulative_realized_regret / horizon as f64,
        cumulative_realized_regret: out.metrics.cumulative_realized_regret,
    })
}
