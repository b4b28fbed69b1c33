//! Exhaustive ground-truth solvers for manipulation planning.
//!
//! These enumerate every deterministic response function (all `B^A` of
//! them), so they are exponential in the number of leader actions and meant
//! for small instances: establishing ground truth in tests, computing gap
//! profiles, and cross-checking the greedy solvers. A hard cap guards
//! against accidental use on large games.

use thiserror::Error;

use crate::follower::ManipulationPlan;
use crate::game::{ActionPair, GameInstance, ResponseFunction};

/// Maximum number of response functions the oracles will enumerate.
pub const ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumerating {functions} response functions exceeds the cap of {ENUMERATION_CAP}")]
    CapExceeded { functions: u128 },
    #[error("no response function qualifies: every commitment leaves the leader a tied-or-better deviation")]
    NoQualifiedManipulation,
}

/// A manipulation plan scored by the follower value it secures.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredPlan {
    pub plan: ManipulationPlan,
    pub value: f64,
}

/// Visits every response function in lexicographic order (the table read as
/// a little-endian counter in base `B`).
fn for_each_response<F: FnMut(&[usize])>(
    game: &GameInstance,
    mut visit: F,
) -> Result<(), OracleError> {
    let a_n = game.leader_actions();
    let b_n = game.follower_actions();
    let functions = (b_n as u128).checked_pow(a_n as u32).unwrap_or(u128::MAX);
    if functions > ENUMERATION_CAP {
        return Err(OracleError::CapExceeded { functions });
    }
    let mut map = vec![0usize; a_n];
    loop {
        visit(&map);
        // Increment the mixed-radix counter; done once it wraps to zero.
        let mut digit = 0;
        loop {
            if digit == a_n {
                return Ok(());
            }
            map[digit] += 1;
            if map[digit] < b_n {
                break;
            }
            map[digit] = 0;
            digit += 1;
        }
    }
}

/// The leader's payoffs induced by committing to `map`, one per action.
fn induced_leader_values(game: &GameInstance, map: &[usize]) -> Vec<f64> {
    map.iter()
        .enumerate()
        .map(|(a, &b)| game.leader_mean(a, b))
        .collect()
}

/// Enumerates every response function whose induced leader optimum is
/// strictly unique, and emits the plan steering the leader to that optimum.
/// The follower's value of a plan is its mean reward at the steered pair.
pub fn enumerate_manipulations(game: &GameInstance) -> Result<Vec<ScoredPlan>, OracleError> {
    let mut plans = Vec::new();
    for_each_response(game, |map| {
        let values = induced_leader_values(game, map);
        let a_star = crate::game::argmax(&values);
        let unique = values.iter().filter(|&&v| v == values[a_star]).count() == 1;
        if unique {
            let target = ActionPair::new(a_star, map[a_star]);
            plans.push(ScoredPlan {
                plan: ManipulationPlan::new(ResponseFunction::new(map.to_vec()), target),
                value: game.follower_mean(target.a, target.b),
            });
        }
    })?;
    Ok(plans)
}

/// The qualified plan maximizing the follower's value. Ties break toward the
/// lexicographically smallest target pair, then the first response function
/// in enumeration order. Errors when no plan qualifies at all (possible only
/// on instances with leader-payoff ties).
pub fn best_manipulation_oracle(game: &GameInstance) -> Result<ScoredPlan, OracleError> {
    let plans = enumerate_manipulations(game)?;
    plans
        .into_iter()
        .reduce(|best, candidate| {
            let better = candidate.value > best.value
                || (candidate.value == best.value && candidate.plan.target() < best.plan.target());
            if better {
                candidate
            } else {
                best
            }
        })
        .ok_or(OracleError::NoQualifiedManipulation)
}

/// Worst-case variant: each response function is scored by the minimum
/// follower reward over *all* leader optima it induces (the leader may break
/// its ties adversarially), and the oracle maximizes that score. The
/// reported target is the adversarial tie-break itself, so the plan's value
/// equals the follower's mean at its target.
pub fn pessimistic_oracle(game: &GameInstance) -> Result<ScoredPlan, OracleError> {
    let mut best: Option<ScoredPlan> = None;
    for_each_response(game, |map| {
        let values = induced_leader_values(game, map);
        let top = values[crate::game::argmax(&values)];
        let mut worst: Option<ActionPair> = None;
        for (a, &v) in values.iter().enumerate() {
            if v == top {
                let pair = ActionPair::new(a, map[a]);
                let better = match worst {
                    None => true,
                    Some(current) => {
                        game.follower_mean(pair.a, pair.b)
                            < game.follower_mean(current.a, current.b)
                    }
                };
                if better {
                    worst = Some(pair);
                }
            }
        }
        let target = worst.expect("argmax set is non-empty");
        let value = game.follower_mean(target.a, target.b);
        let better = match &best {
            None => true,
            Some(current) => {
                value > current.value || (value == current.value && target < current.plan.target())
            }
        };
        if better {
            best = Some(ScoredPlan {
                plan: ManipulationPlan::new(ResponseFunction::new(map.to_vec()), target),
                value,
            });
        }
    })?;
    best.ok_or(OracleError::NoQualifiedManipulation)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_visits_every_function() {
        // Generic 2x2 game (no leader-payoff ties): every one of the 4
        // functions induces a unique leader optimum, so every one yields a
        // plan.
        let g = GameInstance::new(
            vec![vec![0.8, 0.1], vec![0.2, 0.4]],
            vec![vec![0.5, 0.6], vec![0.7, 0.3]],
        )
        .unwrap();
        let plans = enumerate_manipulations(&g).unwrap();
        assert_eq!(plans.len(), 4);

        // The built-in 2x2 example has one leader tie (0.3 twice), so the
        // commitment inducing it yields no plan: 3 of 4 qualify.
        let tied = enumerate_manipulations(&GameInstance::table1()).unwrap();
        assert_eq!(tied.len(), 3);
    }

    #[test]
    fn single_leader_action_trivially_qualifies() {
        let g = GameInstance::new(vec![vec![0.2, 0.5, 0.9]], vec![vec![0.7, 0.1, 0.4]]).unwrap();
        let plans = enumerate_manipulations(&g).unwrap();
        assert_eq!(plans.len(), 3, "B^A = 3^1 functions, all qualified");
        let best = best_manipulation_oracle(&g).unwrap();
        assert_eq!(best.plan.target(), ActionPair::new(0, 0));
        assert!((best.value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn table1_best_plan_is_the_known_one() {
        let g = GameInstance::table1();
        let best = best_manipulation_oracle(&g).unwrap();
        assert_eq!(best.plan.target(), ActionPair::new(1, 0));
        assert_eq!(best.plan.response().table(), &[1, 0]);
        assert!((best.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn se_maximizing_follower_payoff_means_zero_gap() {
        // The follower's global favorite coincides with the equilibrium
        // pair, so manipulation cannot improve on honest best response.
        let g = GameInstance::new(
            vec![vec![0.8, 0.1], vec![0.2, 0.3]],
            vec![vec![0.9, 0.1], vec![0.5, 0.2]],
        )
        .unwrap();
        let se = g.stackelberg_equilibrium().pair;
        assert_eq!(se, ActionPair::new(0, 0));
        let best = best_manipulation_oracle(&g).unwrap();
        assert_eq!(best.plan.target(), se);
        assert!((g.gap_profile().manipulation_gap - 0.0).abs() < 1e-12);
    }

    #[test]
    fn constant_leader_payoffs_leave_nothing_qualified() {
        let g = GameInstance::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.9, 0.2], vec![0.3, 0.8]],
        )
        .unwrap();
        assert!(enumerate_manipulations(&g).unwrap().is_empty());
        assert!(matches!(
            best_manipulation_oracle(&g),
            Err(OracleError::NoQualifiedManipulation)
        ));
    }

    #[test]
    fn pessimistic_oracle_handles_leader_ties() {
        // Leader payoffs are flat, so every response function induces a full
        // tie and the adversarial tie-break bites. Committing to [0, 1]
        // guarantees the follower min(0.9, 0.8) = 0.8; nothing does better.
        let g = GameInstance::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.9, 0.2], vec![0.3, 0.8]],
        )
        .unwrap();
        let best = pessimistic_oracle(&g).unwrap();
        assert_eq!(best.plan.response().table(), &[0, 1]);
        assert_eq!(best.plan.target(), ActionPair::new(1, 1));
        assert!((best.value - 0.8).abs() < 1e-12);
    }

    #[test]
    fn pessimistic_value_never_exceeds_optimistic_value() {
        for seed in 0..30 {
            let mut rng = crate::rng::RngStream::substream(seed, "oracle-test");
            let g = crate::game::random_game(3, 3, &mut rng).unwrap();
            let optimistic = best_manipulation_oracle(&g).unwrap();
            let pessimistic = pessimistic_oracle(&g).unwrap();
            assert!(pessimistic.value <= optimistic.value + 1e-12);
        }
    }

    #[test]
    fn cap_guards_against_exponential_blowup() {
        let mu = vec![vec![0.5; 3]; 20];
        let g = GameInstance::new(mu.clone(), mu).unwrap();
        assert!(matches!(
            enumerate_manipulations(&g),
            Err(OracleError::CapExceeded { .. })
        ));
    }
}
