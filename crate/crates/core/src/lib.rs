//! Simulator for repeated general-sum Stackelberg games between
//! decentralized bandit learners.
//!
//! Every round a leader commits to an action, a follower observes it and
//! responds, and both sides learn from their own reward feedback alone —
//! there is no shared controller and no communication. The interesting
//! regime is a follower that is *not* obliged to best-respond: by committing
//! to a response function that threatens the leader's worst case off-target,
//! it can steer a reward-maximizing leader toward joint actions the follower
//! prefers to its honest equilibrium payoff.
//!
//! The crate provides:
//!
//! * [`game`] — the instance model: mean matrices, best/worst responses,
//!   the Stackelberg equilibrium, gap profiles, seeded random instances;
//! * [`leader`] — leader learners (exponential weights with uniform
//!   exploration, UCB with an enlarged budget, vanilla UCB);
//! * [`follower`] — follower strategies (UCB best response, omniscient and
//!   bandit-feedback manipulation, a pessimistic tie-breaking variant);
//! * [`oracle`] — exhaustive enumeration solvers used as ground truth;
//! * [`sim`] — the round protocol, metrics, and seeded batch execution.
//!
//! Determinism is a hard guarantee: a `(config, seed)` pair reproduces a
//! run byte for byte, and batch results do not depend on the thread count.

pub mod follower;
pub mod game;
pub mod leader;
pub mod oracle;
pub mod rng;
pub mod sim;

pub use game::{ActionPair, GameInstance, GapProfile, Player, ResponseFunction};
pub use rng::RngStream;
pub use sim::{BatchResult, RunMetrics, RunOutput, SimConfig};
