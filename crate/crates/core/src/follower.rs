//! Follower-side strategies.
//!
//! The follower sees the leader's action before moving, so its choices are
//! per-leader-action policies rather than flat bandit arms. Four strategies
//! are provided:
//!
//! * [`FollowerBanditState::ucb_respond`] — honest best response learned by
//!   per-cell UCB on the follower's own rewards.
//! * [`fbm_solve`] — omniscient best manipulation: knowing both mean
//!   matrices, commit to the response function that steers a
//!   reward-maximizing leader to the follower's favorite enforceable pair.
//! * [`fmucb_plan`] — the bandit-feedback counterpart of `fbm_solve`. It
//!   rebuilds the plan every round from confidence bounds: optimistic upper
//!   bounds on the follower's own means pick the candidate target, and
//!   pessimistic lower bounds on the *leader's* means (observable here
//!   because this strategy runs in the side-information setting) supply
//!   conservative threat payoffs and acceptance tests.
//! * [`pessimistic_fbm_solve`] — manipulation under adversarial leader
//!   tie-breaking: maximize the worst follower payoff over all leader
//!   optima induced by the commitment.
//!
//! Plan tie-breaking is deterministic everywhere: candidates are ranked by
//! value, then by lowest `(a, b)`.

use thiserror::Error;

use crate::game::{argmax, argmin, max_excluding, ActionPair, GameInstance, ResponseFunction};

#[derive(Debug, Error)]
pub enum FollowerError {
    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error("leader reward supplied in the limited-feedback setting")]
    UnexpectedLeaderReward,
    #[error("leader reward missing in the side-information setting")]
    MissingLeaderReward,
    #[error("joint action ({a}, {b}) out of range for a {rows}x{cols} game")]
    PairOutOfRange {
        a: usize,
        b: usize,
        rows: usize,
        cols: usize,
    },
}

#[derive(Debug, Error)]
#[error(
    "no response function qualifies: every commitment leaves the leader a tied-or-better deviation"
)]
pub struct NoQualifiedManipulation;

/// A committed response function together with the joint action it is built
/// to steer the leader into. Invariant (checked at construction): the plan
/// actually answers `target.a` with `target.b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManipulationPlan {
    response: ResponseFunction,
    target: ActionPair,
}

impl ManipulationPlan {
    pub fn new(response: ResponseFunction, target: ActionPair) -> Self {
        assert_eq!(
            response.respond(target.a),
            target.b,
            "plan must respond to its own target row with the target action"
        );
        Self { response, target }
    }

    pub fn response(&self) -> &ResponseFunction {
        &self.response
    }

    pub fn target(&self) -> ActionPair {
        self.target
    }

    /// The committed response to leader action `a`.
    pub fn respond(&self, a: usize) -> usize {
        self.response.respond(a)
    }
}

/// Per-pair reward statistics for the learning follower strategies.
///
/// Counts and follower-reward sums are always tracked; leader-reward sums
/// are tracked only when the state is constructed for the side-information
/// setting, and feeding a leader reward to a limited-feedback state (or
/// omitting one from a side-information state) is an error rather than a
/// silent mismatch.
#[derive(Clone, Debug)]
pub struct FollowerBanditState {
    leader_actions: usize,
    follower_actions: usize,
    counts: Vec<u64>,
    follower_sums: Vec<f64>,
    leader_sums: Vec<f64>,
    side_information: bool,
    // ln(T / delta) and ln(A * B * T / delta), precomputed.
    log_horizon: f64,
    log_joint_horizon: f64,
}

impl FollowerBanditState {
    /// `side_information` selects whether leader rewards are recorded.
    /// `horizon` and `delta` set the confidence widths used by the response
    /// rules.
    pub fn new(
        leader_actions: usize,
        follower_actions: usize,
        horizon: u64,
        delta: f64,
        side_information: bool,
    ) -> Self {
        assert!(leader_actions > 0 && follower_actions > 0);
        assert!(horizon > 0, "horizon must be at least one round");
        assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
        let cells = leader_actions * follower_actions;
        let t = horizon as f64;
        Self {
            leader_actions,
            follower_actions,
            counts: vec![0; cells],
            follower_sums: vec![0.0; cells],
            leader_sums: if side_information {
                vec![0.0; cells]
            } else {
                Vec::new()
            },
            side_information,
            log_horizon: (t / delta).ln(),
            log_joint_horizon: (cells as f64 * t / delta).ln(),
        }
    }

    pub fn leader_actions(&self) -> usize {
        self.leader_actions
    }

    pub fn follower_actions(&self) -> usize {
        self.follower_actions
    }

    pub fn side_information(&self) -> bool {
        self.side_information
    }

    fn cell(&self, pair: ActionPair) -> usize {
        pair.a * self.follower_actions + pair.b
    }

    fn check_pair(&self, pair: ActionPair) -> Result<(), FollowerError> {
        if pair.a < self.leader_actions && pair.b < self.follower_actions {
            Ok(())
        } else {
            Err(FollowerError::PairOutOfRange {
                a: pair.a,
                b: pair.b,
                rows: self.leader_actions,
                cols: self.follower_actions,
            })
        }
    }

    pub fn count(&self, pair: ActionPair) -> u64 {
        self.counts[self.cell(pair)]
    }

    /// Empirical mean of the follower's reward; 0 for unvisited cells.
    pub fn follower_mean(&self, pair: ActionPair) -> f64 {
        let cell = self.cell(pair);
        self.follower_sums[cell] / (self.counts[cell].max(1) as f64)
    }

    /// Empirical mean of the leader's reward; 0 for unvisited cells.
    /// Meaningful only in the side-information setting.
    pub fn leader_mean(&self, pair: ActionPair) -> f64 {
        debug_assert!(self.side_information);
        let cell = self.cell(pair);
        self.leader_sums[cell] / (self.counts[cell].max(1) as f64)
    }

    /// Records one observed round. `leader_reward` must be present exactly
    /// when the state was built for the side-information setting.
    pub fn update(
        &mut self,
        pair: ActionPair,
        follower_reward: f64,
        leader_reward: Option<f64>,
    ) -> Result<(), FollowerError> {
        self.check_pair(pair)?;
        if !(0.0..=1.0).contains(&follower_reward) {
            return Err(FollowerError::RewardOutOfRange(follower_reward));
        }
        match (self.side_information, leader_reward) {
            (false, Some(_)) => return Err(FollowerError::UnexpectedLeaderReward),
            (true, None) => return Err(FollowerError::MissingLeaderReward),
            (true, Some(r)) if !(0.0..=1.0).contains(&r) => {
                return Err(FollowerError::RewardOutOfRange(r))
            }
            _ => {}
        }
        let cell = self.cell(pair);
        self.counts[cell] += 1;
        self.follower_sums[cell] += follower_reward;
        if let Some(r) = leader_reward {
            self.leader_sums[cell] += r;
        }
        Ok(())
    }

    /// Confidence width `sqrt(2 ln(T / delta) / max(1, n))` for the
    /// per-row best-response rule.
    fn row_bonus(&self, pair: ActionPair) -> f64 {
        (2.0 * self.log_horizon / self.counts[self.cell(pair)].max(1) as f64).sqrt()
    }

    /// Confidence width `sqrt(2 ln(A B T / delta) / max(1, n))` for the
    /// joint-cell manipulation rule.
    fn joint_bonus(&self, pair: ActionPair) -> f64 {
        (2.0 * self.log_joint_horizon / self.counts[self.cell(pair)].max(1) as f64).sqrt()
    }

    /// Optimistic upper bound on the follower's mean at a cell.
    pub fn follower_upper(&self, pair: ActionPair) -> f64 {
        self.follower_mean(pair) + self.joint_bonus(pair)
    }

    /// Pessimistic lower bound on the leader's mean at a cell.
    pub fn leader_lower(&self, pair: ActionPair) -> f64 {
        self.leader_mean(pair) - self.joint_bonus(pair)
    }

    /// UCB best response to the observed leader action: maximize the
    /// optimistic bound on the follower's own mean within that row. Ties
    /// break toward the lowest action, and unvisited cells score a full
    /// bonus on a zero mean, so every cell gets sampled eventually.
    pub fn ucb_respond(&self, leader_action: usize) -> usize {
        assert!(leader_action < self.leader_actions);
        let index = |b: usize| {
            let pair = ActionPair::new(leader_action, b);
            self.follower_mean(pair) + self.row_bonus(pair)
        };
        let mut best = 0;
        let mut best_value = index(0);
        for b in 1..self.follower_actions {
            let value = index(b);
            if value > best_value {
                best = b;
                best_value = value;
            }
        }
        best
    }

    /// Test/benchmark helper: load the state as if every cell had been
    /// observed `visits` times at exactly its true mean. With large
    /// `visits` the confidence bounds collapse onto the truth.
    pub fn saturate_with_means(&mut self, game: &GameInstance, visits: u64) {
        assert_eq!(game.leader_actions(), self.leader_actions);
        assert_eq!(game.follower_actions(), self.follower_actions);
        for a in 0..self.leader_actions {
            for b in 0..self.follower_actions {
                let pair = ActionPair::new(a, b);
                let cell = self.cell(pair);
                self.counts[cell] = visits;
                self.follower_sums[cell] = game.follower_mean(a, b) * visits as f64;
                if self.side_information {
                    self.leader_sums[cell] = game.leader_mean(a, b) * visits as f64;
                }
            }
        }
    }
}

/// All joint actions ranked by a value function, descending, with ties
/// broken toward the lowest `(a, b)`.
fn ranked_pairs(
    leader_actions: usize,
    follower_actions: usize,
    value: impl Fn(ActionPair) -> f64,
) -> Vec<(ActionPair, f64)> {
    let mut pairs: Vec<(ActionPair, f64)> = (0..leader_actions)
        .flat_map(|a| (0..follower_actions).map(move |b| ActionPair::new(a, b)))
        .map(|p| (p, value(p)))
        .collect();
    pairs.sort_by(|(pa, va), (pb, vb)| vb.total_cmp(va).then(pa.cmp(pb)));
    pairs
}

/// Builds the spike-shaped commitment for a candidate target: answer the
/// target row with the target action and every other row with the given
/// threat response.
fn spiked_plan(threats: &[usize], target: ActionPair) -> ManipulationPlan {
    let mut map = threats.to_vec();
    map[target.a] = target.b;
    ManipulationPlan::new(ResponseFunction::new(map), target)
}

/// Omniscient best manipulation.
///
/// Walks candidate targets in decreasing follower value. A candidate
/// `(a', b')` is accepted if committing to it — while threatening the
/// leader's worst-case response everywhere else — makes the leader strictly
/// prefer `a'`: `mu_l(a', b') > max_{a != a'} mu_l(a, wr(a))`. Threatening
/// the worst case maximizes that margin, so a candidate rejected here is
/// unenforceable by any commitment and can be eliminated outright; the
/// first accepted candidate is therefore the best enforceable one.
///
/// Errors only on degenerate instances where leader-payoff ties defeat the
/// strict inequality for every single pair.
pub fn fbm_solve(game: &GameInstance) -> Result<ManipulationPlan, NoQualifiedManipulation> {
    let threats: Vec<usize> = (0..game.leader_actions())
        .map(|a| game.worst_response(a))
        .collect();
    let floor: Vec<f64> = threats
        .iter()
        .enumerate()
        .map(|(a, &b)| game.leader_mean(a, b))
        .collect();
    let candidates = ranked_pairs(game.leader_actions(), game.follower_actions(), |p| {
        game.follower_mean(p.a, p.b)
    });
    for (pair, _) in candidates {
        let rival = max_excluding(&floor, pair.a);
        if game.leader_mean(pair.a, pair.b) > rival {
            return Ok(spiked_plan(&threats, pair));
        }
    }
    Err(NoQualifiedManipulation)
}

/// A per-round manipulation plan from bandit statistics. `fallback` is set
/// when every candidate failed the acceptance test and the plan had to be
/// built around the last (least promising) candidate anyway — a defensive
/// branch: with strictly positive confidence widths the row maximizing the
/// per-row minimum mean always survives the test, so an exhausted scan
/// indicates a broken invariant rather than an expected state.
#[derive(Clone, Debug, PartialEq)]
pub struct FmucbPlan {
    pub plan: ManipulationPlan,
    pub fallback: bool,
}

/// Bandit-feedback manipulation via confidence bounds.
///
/// Mirrors [`fbm_solve`] with estimated quantities, erring in the direction
/// that keeps exploring:
///
/// * candidate targets are ranked by the *optimistic* bound on the
///   follower's mean, so undersampled cells get tried;
/// * threat responses minimize the *pessimistic* bound on the leader's mean,
///   so undersampled cells also look like credible threats;
/// * a candidate `(a', b')` is eliminated when
///   `max_{a != a'} LCB_l(a, threat(a)) >= mean_l(a', b')`, i.e. when even
///   conservatively-estimated rival rows match the candidate's observed
///   leader payoff.
///
/// The candidate set is rebuilt from scratch every round, so early
/// eliminations are never locked in. If all candidates are eliminated (wide
/// intervals early on), the last-ranked candidate is used and flagged.
pub fn fmucb_plan(state: &FollowerBanditState) -> FmucbPlan {
    assert!(
        state.side_information(),
        "manipulation from bandit feedback requires leader-reward observations"
    );
    let a_n = state.leader_actions();
    let b_n = state.follower_actions();

    // Threat response per row: the action minimizing the lower confidence
    // bound on the leader's mean, lowest index on ties.
    let mut threats = Vec::with_capacity(a_n);
    let mut floor = Vec::with_capacity(a_n);
    for a in 0..a_n {
        let bounds: Vec<f64> = (0..b_n)
            .map(|b| state.leader_lower(ActionPair::new(a, b)))
            .collect();
        let b = argmin(&bounds);
        threats.push(b);
        floor.push(bounds[b]);
    }

    let candidates = ranked_pairs(a_n, b_n, |p| state.follower_upper(p));
    for &(pair, _) in &candidates {
        let rival = max_excluding(&floor, pair.a);
        if rival >= state.leader_mean(pair) {
            continue; // eliminated: rivals plausibly match the target payoff
        }
        return FmucbPlan {
            plan: spiked_plan(&threats, pair),
            fallback: false,
        };
    }
    let (last, _) = *candidates.last().expect("at least one joint action");
    FmucbPlan {
        plan: spiked_plan(&threats, last),
        fallback: true,
    }
}

/// Convenience wrapper: the current plan's response to an observed action.
pub fn fmucb_respond(state: &FollowerBanditState, leader_action: usize) -> usize {
    fmucb_plan(state).plan.respond(leader_action)
}

/// Omniscient manipulation under adversarial leader tie-breaking.
///
/// Walks candidate targets in decreasing follower value, keeping the best
/// incumbent seen so far, where a candidate's worth is the *minimum*
/// follower reward over every leader optimum its commitment induces (the
/// candidate only counts when it is itself among those optima). The walk
/// stops once the next candidate's ceiling — its own follower value —
/// cannot beat the incumbent, which makes the scan exact rather than
/// heuristic. Commitments are spike-shaped as in [`fbm_solve`].
///
/// Total for every well-formed game: the globally leader-optimal pair always
/// induces itself as an optimum, so at least one candidate enters the
/// incumbent race.
pub fn pessimistic_fbm_solve(game: &GameInstance) -> ManipulationPlan {
    let threats: Vec<usize> = (0..game.leader_actions())
        .map(|a| game.worst_response(a))
        .collect();
    let candidates = ranked_pairs(game.leader_actions(), game.follower_actions(), |p| {
        game.follower_mean(p.a, p.b)
    });
    let mut incumbent: Option<(f64, ManipulationPlan)> = None;
    for (pair, value) in candidates {
        if let Some((best_value, _)) = &incumbent {
            if value <= *best_value {
                break;
            }
        }
        let plan = spiked_plan(&threats, pair);
        // The leader's optima under this commitment, with exact ties kept.
        let induced: Vec<f64> = (0..game.leader_actions())
            .map(|a| game.leader_mean(a, plan.respond(a)))
            .collect();
        let top = induced[argmax(&induced)];
        if game.leader_mean(pair.a, pair.b) != top {
            continue; // the target itself is not among the leader's optima
        }
        // Adversarial tie-break: the optimum paying the follower least,
        // scanning rows upward so exact ties resolve to the lowest index.
        let mut worst: Option<(f64, ActionPair)> = None;
        for (a, &v) in induced.iter().enumerate() {
            if v == top {
                let optimum = ActionPair::new(a, plan.respond(a));
                let follower_value = game.follower_mean(optimum.a, optimum.b);
                if worst.is_none() || follower_value < worst.unwrap().0 {
                    worst = Some((follower_value, optimum));
                }
            }
        }
        let (worst_value, worst_pair) = worst.expect("the target row is an optimum");
        let replace = match &incumbent {
            None => true,
            Some((best_value, _)) => worst_value > *best_value,
        };
        if replace {
            incumbent = Some((
                worst_value,
                ManipulationPlan::new(plan.response().clone(), worst_pair),
            ));
        }
    }
    incumbent
        .expect("the leader-optimal pair always qualifies under adversarial tie-breaking")
        .1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::random_game;
    use crate::rng::RngStream;

    fn fresh_state(side_information: bool) -> FollowerBanditState {
        FollowerBanditState::new(2, 2, 1000, 0.01, side_information)
    }

    #[test]
    fn plan_construction_enforces_target_consistency() {
        let plan = ManipulationPlan::new(ResponseFunction::new(vec![1, 0]), ActionPair::new(1, 0));
        assert_eq!(plan.respond(0), 1);
        assert_eq!(plan.respond(1), 0);
        assert_eq!(plan.target(), ActionPair::new(1, 0));
    }

    #[test]
    #[should_panic(expected = "target")]
    fn plan_rejects_inconsistent_target() {
        let _ = ManipulationPlan::new(ResponseFunction::new(vec![1, 0]), ActionPair::new(1, 1));
    }

    #[test]
    fn update_enforces_feedback_setting() {
        let mut limited = fresh_state(false);
        assert!(matches!(
            limited.update(ActionPair::new(0, 0), 0.5, Some(0.5)),
            Err(FollowerError::UnexpectedLeaderReward)
        ));
        limited.update(ActionPair::new(0, 0), 0.5, None).unwrap();

        let mut side = fresh_state(true);
        assert!(matches!(
            side.update(ActionPair::new(0, 0), 0.5, None),
            Err(FollowerError::MissingLeaderReward)
        ));
        side.update(ActionPair::new(0, 0), 0.5, Some(0.25)).unwrap();
        assert!((side.leader_mean(ActionPair::new(0, 0)) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn update_validates_rewards_and_pairs() {
        let mut s = fresh_state(false);
        assert!(matches!(
            s.update(ActionPair::new(0, 0), 1.5, None),
            Err(FollowerError::RewardOutOfRange(_))
        ));
        assert!(matches!(
            s.update(ActionPair::new(3, 0), 0.5, None),
            Err(FollowerError::PairOutOfRange { .. })
        ));
    }

    #[test]
    fn unvisited_cells_read_zero_mean() {
        let s = fresh_state(true);
        let p = ActionPair::new(1, 1);
        assert_eq!(s.count(p), 0);
        assert_eq!(s.follower_mean(p), 0.0);
        assert_eq!(s.leader_mean(p), 0.0);
        assert!(s.follower_upper(p) > 0.0);
        assert!(s.leader_lower(p) < 0.0);
    }

    #[test]
    fn ucb_respond_favors_undersampled_action_on_equal_means() {
        let mut s = fresh_state(false);
        s.update(ActionPair::new(0, 0), 0.5, None).unwrap();
        for _ in 0..100 {
            s.update(ActionPair::new(0, 1), 0.5, None).unwrap();
        }
        assert_eq!(
            s.ucb_respond(0),
            0,
            "larger bonus should win on equal means"
        );
    }

    #[test]
    fn ucb_respond_converges_to_true_best_response() {
        let game = GameInstance::table1();
        let mut s = FollowerBanditState::new(2, 2, 10_000, 0.01, false);
        let mut rng = RngStream::substream(5, "follower-reward");
        for _ in 0..10_000 {
            // Leader pinned to action 1; the follower must discover that
            // response 0 pays 1.0 against it.
            let b = s.ucb_respond(1);
            let r = game.sample_reward(
                crate::game::Player::Follower,
                ActionPair::new(1, b),
                &mut rng,
            );
            s.update(ActionPair::new(1, b), r, None).unwrap();
        }
        assert_eq!(s.ucb_respond(1), 0);
        assert!(s.count(ActionPair::new(1, 0)) > 9_000);
    }

    #[test]
    fn fbm_solve_recovers_known_plan() {
        let plan = fbm_solve(&GameInstance::table1()).unwrap();
        assert_eq!(plan.target(), ActionPair::new(1, 0));
        assert_eq!(plan.response().table(), &[1, 0]);
    }

    #[test]
    fn fbm_solve_matches_exhaustive_oracle_on_random_games() {
        for seed in 0..200 {
            let mut rng = RngStream::substream(seed, "fbm-cross-check");
            let dims = 2 + (seed % 3) as usize;
            let game = random_game(dims, 5 - dims, &mut rng).unwrap();
            let greedy = fbm_solve(&game).unwrap();
            let oracle = crate::oracle::best_manipulation_oracle(&game).unwrap();
            assert_eq!(greedy.target(), oracle.plan.target(), "seed {seed}");
        }
    }

    #[test]
    fn fbm_solve_errors_on_flat_leader_payoffs() {
        let g = GameInstance::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.9, 0.2], vec![0.3, 0.8]],
        )
        .unwrap();
        assert!(fbm_solve(&g).is_err());
    }

    #[test]
    fn fmucb_fresh_state_targets_first_pair_without_fallback() {
        // All upper bounds tie at the same bonus, all empirical leader means
        // are 0, and all rival lower bounds are negative: candidate (0, 0)
        // passes immediately.
        let s = fresh_state(true);
        let out = fmucb_plan(&s);
        assert_eq!(out.plan.target(), ActionPair::new(0, 0));
        assert!(!out.fallback);
        assert_eq!(fmucb_respond(&s, 0), 0);
    }

    #[test]
    fn fmucb_collapses_to_omniscient_plan_once_confident() {
        for seed in 0..50 {
            let mut rng = RngStream::substream(seed, "fmucb-collapse");
            let game = random_game(3, 3, &mut rng).unwrap();
            let mut s = FollowerBanditState::new(3, 3, 1_000_000, 0.01, true);
            // Enough fictitious visits to shrink every bonus below any gap.
            s.saturate_with_means(&game, 100_000_000);
            let out = fmucb_plan(&s);
            assert!(!out.fallback, "seed {seed}");
            assert_eq!(out.plan, fbm_solve(&game).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn fmucb_scan_always_accepts_a_candidate() {
        // Even on a game whose leader payoffs are identical everywhere — the
        // worst case for establishing a strict preference — some candidate
        // survives, because rival rows are scored by lower confidence bounds
        // that sit strictly below the candidate's empirical mean.
        let flat = GameInstance::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.9, 0.2], vec![0.3, 0.8]],
        )
        .unwrap();
        let mut s = FollowerBanditState::new(2, 2, 1_000_000, 0.01, true);
        s.saturate_with_means(&flat, 100_000_000);
        let out = fmucb_plan(&s);
        assert!(!out.fallback);
        // With all leader payoffs indistinguishable, the scan takes the
        // follower's favorite cell outright.
        assert_eq!(out.plan.target(), ActionPair::new(0, 0));

        // Skewed visit counts (some cells never observed) must not break
        // acceptance either.
        let mut sparse = FollowerBanditState::new(3, 2, 10_000, 0.01, true);
        for _ in 0..500 {
            sparse
                .update(ActionPair::new(0, 0), 0.4, Some(0.9))
                .unwrap();
            sparse
                .update(ActionPair::new(2, 1), 0.1, Some(0.8))
                .unwrap();
        }
        assert!(!fmucb_plan(&sparse).fallback);
    }

    #[test]
    fn pessimistic_solver_matches_oracle_with_leader_ties() {
        let g = GameInstance::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.9, 0.2], vec![0.3, 0.8]],
        )
        .unwrap();
        let plan = pessimistic_fbm_solve(&g);
        let oracle = crate::oracle::pessimistic_oracle(&g).unwrap();
        assert_eq!(plan.target(), oracle.plan.target());
        assert_eq!(plan.response().table(), &[0, 1]);
        assert_eq!(plan.target(), ActionPair::new(1, 1));
    }

    #[test]
    fn pessimistic_solver_agrees_with_optimistic_when_ties_are_absent() {
        for seed in 0..100 {
            let mut rng = RngStream::substream(seed, "pessimistic-cross-check");
            let game = random_game(3, 3, &mut rng).unwrap();
            let pessimistic = pessimistic_fbm_solve(&game);
            let optimistic = fbm_solve(&game).unwrap();
            assert_eq!(pessimistic.target(), optimistic.target(), "seed {seed}");
            let oracle = crate::oracle::pessimistic_oracle(&game).unwrap();
            assert_eq!(pessimistic.target(), oracle.plan.target(), "seed {seed}");
        }
    }
}
