//! Leader-side learners. Three algorithms cover the regimes studied here:
//!
//! * [`Exp3State`] — adversarial-style exponential weights with explicit
//!   uniform exploration mixed in, for followers whose responses drift as
//!   they learn (no stationarity assumption).
//! * [`UcbeState`] — UCB with an enlarged, horizon-tuned exploration bonus
//!   `sqrt(S0 / n)`, which keeps exploring long enough to survive a
//!   follower whose early responses are misleading.
//! * [`UcbLeaderState`] — vanilla UCB with the `sqrt(2 ln(T/delta) / n)`
//!   bonus. Included deliberately: against a learning follower it can lock
//!   onto the wrong action, and the simulator exposes that failure.
//!
//! All rewards are assumed to lie in `[0, 1]`; updates reject anything else.
//! Unvisited actions report an empirical mean of 0 and a visit count floored
//! at 1 inside the bonus, so indices are total from the first round on.

use thiserror::Error;

use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum LeaderError {
    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error("{name} = {value} outside its valid range {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("action {action} out of range for {actions} actions")]
    ActionOutOfRange { action: usize, actions: usize },
}

fn check_reward(reward: f64) -> Result<(), LeaderError> {
    if (0.0..=1.0).contains(&reward) {
        Ok(())
    } else {
        Err(LeaderError::RewardOutOfRange(reward))
    }
}

/// Exponential-weights learner over leader actions.
///
/// Maintains cumulative importance-weighted scores `y` and the induced
/// softmax distribution `x`. Actions are drawn from the exploration mixture
/// `x~ = (1 - alpha) * x + alpha / A`, which keeps every sampling
/// probability at least `alpha / A` and thereby bounds the importance
/// weights.
#[derive(Clone, Debug)]
pub struct Exp3State {
    y: Vec<f64>,
    x: Vec<f64>,
    alpha: f64,
    eta: f64,
    rounds: u64,
}

impl Exp3State {
    /// `alpha` is the uniform-exploration weight in `[0, 1]` (1 means pure
    /// uniform sampling); `eta` is the positive learning rate.
    pub fn new(actions: usize, alpha: f64, eta: f64) -> Result<Self, LeaderError> {
        Self::from_scores(vec![0.0; actions], alpha, eta)
    }

    /// Restores a learner from explicit cumulative scores; useful for tests
    /// and for inspecting the softmax at a known state.
    pub fn from_scores(y: Vec<f64>, alpha: f64, eta: f64) -> Result<Self, LeaderError> {
        assert!(!y.is_empty(), "need at least one action");
        if !(0.0..=1.0).contains(&alpha) {
            return Err(LeaderError::ParamOutOfRange {
                name: "alpha",
                value: alpha,
                range: "[0, 1]",
            });
        }
        if !eta.is_finite() || eta <= 0.0 {
            return Err(LeaderError::ParamOutOfRange {
                name: "eta",
                value: eta,
                range: "(0, inf)",
            });
        }
        let x = softmax(&y);
        Ok(Self {
            y,
            x,
            alpha,
            eta,
            rounds: 0,
        })
    }

    pub fn actions(&self) -> usize {
        self.y.len()
    }

    /// Cumulative importance-weighted scores, one per action.
    pub fn scores(&self) -> &[f64] {
        &self.y
    }

    /// The softmax distribution over actions (before exploration mixing).
    pub fn probabilities(&self) -> &[f64] {
        &self.x
    }

    /// Probability that [`Self::select`] draws `action`.
    pub fn sampling_probability(&self, action: usize) -> f64 {
        (1.0 - self.alpha) * self.x[action] + self.alpha / self.actions() as f64
    }

    /// The full sampling distribution `x~`.
    pub fn sampling_distribution(&self) -> Vec<f64> {
        (0..self.actions())
            .map(|a| self.sampling_probability(a))
            .collect()
    }

    /// Draws one action from the exploration mixture. Consumes exactly one
    /// uniform draw and does not mutate the learner.
    pub fn select(&self, rng: &mut RngStream) -> usize {
        // Inverse-CDF walk without materializing the distribution; this is
        // the per-round hot path.
        let u = rng.uniform();
        let mut acc = 0.0;
        for a in 0..self.actions() {
            acc += self.sampling_probability(a);
            if u < acc {
                return a;
            }
        }
        self.actions() - 1
    }

    /// Feeds back the observed reward for the action actually played. The
    /// reward is importance-weighted by the sampling probability, added to
    /// that action's score, and the softmax is recomputed.
    pub fn update(&mut self, action: usize, reward: f64) -> Result<(), LeaderError> {
        if action >= self.actions() {
            return Err(LeaderError::ActionOutOfRange {
                action,
                actions: self.actions(),
            });
        }
        check_reward(reward)?;
        let prob = self.sampling_probability(action);
        self.y[action] += self.eta * reward / prob;
        self.x = softmax(&self.y);
        self.rounds += 1;
        debug_assert!({
            let sum: f64 = self.x.iter().sum();
            (sum - 1.0).abs() < 1e-9 && self.x.iter().all(|&p| p >= 0.0)
        });
        Ok(())
    }

    /// Rounds observed so far.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Fingerprint of the current sampling distribution (bit-exact), used to
    /// stamp per-round trace records.
    pub fn distribution_fingerprint(&self) -> u64 {
        let mut bytes = Vec::with_capacity(self.actions() * 8);
        for a in 0..self.actions() {
            bytes.extend_from_slice(&self.sampling_probability(a).to_bits().to_le_bytes());
        }
        crate::rng::fnv1a(&bytes)
    }
}

/// Numerically stable softmax: the max score is subtracted before
/// exponentiation, which leaves the result unchanged mathematically and
/// keeps `exp` in range no matter how large the scores grow.
fn softmax(y: &[f64]) -> Vec<f64> {
    let shift = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = y.iter().map(|&v| (v - shift).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Shared mean/count bookkeeping for the two UCB-style leaders.
#[derive(Clone, Debug)]
struct ArmStats {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl ArmStats {
    fn new(actions: usize) -> Self {
        assert!(actions > 0, "need at least one action");
        Self {
            counts: vec![0; actions],
            sums: vec![0.0; actions],
        }
    }

    fn actions(&self) -> usize {
        self.counts.len()
    }

    /// Empirical mean; 0 for unvisited arms (the count is floored at 1).
    fn mean(&self, action: usize) -> f64 {
        self.sums[action] / (self.counts[action].max(1) as f64)
    }

    fn update(&mut self, action: usize, reward: f64) -> Result<(), LeaderError> {
        if action >= self.actions() {
            return Err(LeaderError::ActionOutOfRange {
                action,
                actions: self.actions(),
            });
        }
        check_reward(reward)?;
        self.counts[action] += 1;
        self.sums[action] += reward;
        Ok(())
    }
}

/// UCB with an enlarged exploration bonus `sqrt(S0 / max(1, n))`.
///
/// `S0` is a horizon-level exploration budget rather than a per-round
/// confidence width; see [`ucbe_exploration_budget`] for the standard way to
/// derive it from instance gaps.
#[derive(Clone, Debug)]
pub struct UcbeState {
    stats: ArmStats,
    s0: f64,
}

impl UcbeState {
    pub fn new(actions: usize, s0: f64) -> Result<Self, LeaderError> {
        if !s0.is_finite() || s0 < 0.0 {
            return Err(LeaderError::ParamOutOfRange {
                name: "s0",
                value: s0,
                range: "[0, inf)",
            });
        }
        Ok(Self {
            stats: ArmStats::new(actions),
            s0,
        })
    }

    pub fn actions(&self) -> usize {
        self.stats.actions()
    }

    pub fn count(&self, action: usize) -> u64 {
        self.stats.counts[action]
    }

    pub fn mean(&self, action: usize) -> f64 {
        self.stats.mean(action)
    }

    /// The optimistic index `mean + sqrt(S0 / max(1, n))`.
    pub fn index(&self, action: usize) -> f64 {
        self.stats.mean(action) + (self.s0 / self.stats.counts[action].max(1) as f64).sqrt()
    }

    /// Index-maximizing action, lowest index on ties. A pure function of the
    /// state: no randomness, no mutation.
    pub fn select(&self) -> usize {
        argmax_of(self.actions(), |a| self.index(a))
    }

    pub fn update(&mut self, action: usize, reward: f64) -> Result<(), LeaderError> {
        self.stats.update(action, reward)
    }
}

/// Allocation-free argmax over `f(0..n)`, lowest index on ties.
fn argmax_of(n: usize, f: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_value = f(0);
    for a in 1..n {
        let value = f(a);
        if value > best_value {
            best = a;
            best_value = value;
        }
    }
    best
}

/// Vanilla UCB with the `sqrt(2 ln(T / delta) / max(1, n))` bonus.
#[derive(Clone, Debug)]
pub struct UcbLeaderState {
    stats: ArmStats,
    // 2 ln(T / delta), precomputed.
    bonus_scale: f64,
}

impl UcbLeaderState {
    pub fn new(actions: usize, horizon: u64, delta: f64) -> Result<Self, LeaderError> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(LeaderError::ParamOutOfRange {
                name: "delta",
                value: delta,
                range: "(0, 1]",
            });
        }
        if horizon == 0 {
            return Err(LeaderError::ParamOutOfRange {
                name: "horizon",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        Ok(Self {
            stats: ArmStats::new(actions),
            bonus_scale: 2.0 * (horizon as f64 / delta).ln(),
        })
    }

    pub fn actions(&self) -> usize {
        self.stats.actions()
    }

    pub fn count(&self, action: usize) -> u64 {
        self.stats.counts[action]
    }

    pub fn mean(&self, action: usize) -> f64 {
        self.stats.mean(action)
    }

    /// The optimistic index `mean + sqrt(2 ln(T / delta) / max(1, n))`.
    pub fn index(&self, action: usize) -> f64 {
        self.stats.mean(action)
            + (self.bonus_scale / self.stats.counts[action].max(1) as f64).sqrt()
    }

    /// Index-maximizing action, lowest index on ties.
    pub fn select(&self) -> usize {
        argmax_of(self.actions(), |a| self.index(a))
    }

    pub fn update(&mut self, action: usize, reward: f64) -> Result<(), LeaderError> {
        self.stats.update(action, reward)
    }
}

/// The standard horizon-tuned exploration budget for [`UcbeState`]:
///
/// `S0 = multiplier * (follower_actions / epsilon^3) * ln(leader_actions * follower_actions * horizon / delta)`
///
/// where `epsilon` is the smallest gap the leader must resolve. An infinite
/// `epsilon` (a fully degenerate gap profile) yields `S0 = 0`, i.e. pure
/// greedy play, which is the only sensible limit there.
pub fn ucbe_exploration_budget(
    leader_actions: usize,
    follower_actions: usize,
    horizon: u64,
    delta: f64,
    epsilon: f64,
    multiplier: f64,
) -> f64 {
    let log_term = ((leader_actions * follower_actions) as f64 * horizon as f64 / delta).ln();
    multiplier * (follower_actions as f64 / epsilon.powi(3)) * log_term
}
