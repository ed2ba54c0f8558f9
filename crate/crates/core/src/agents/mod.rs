//! Learners that carry reward perturbation: tabular Q-learning, DQN with an
//! augmented replay buffer, and on-policy A2C.

pub mod a2c;
pub mod checkpoint;
pub mod dqn;
pub mod policy;
pub mod replay;
pub mod rollout;
pub mod tabular;

pub use a2c::{a2c_advantage, A2cConfig, A2cTransition, ActorCritic};
pub use dqn::{dqn_td_target, Behavior, DqnAgent, DqnConfig, TrainOutcome};
pub use policy::{sample_categorical, softmax_policy, ActionPolicy, UniformPolicy};
pub use replay::{AugmentedTransition, ReplayBuffer};
pub use rollout::{collect_trajectories, Trajectory};
pub use tabular::QTable;

use crate::rng::SeededRng;

/// Per-step information reported by training loops.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEvent {
    /// Global environment step, starting at 0.
    pub t: u64,
    pub episode: usize,
    /// State embedding after the step.
    pub embedding: Vec<f64>,
    pub env_reward: f64,
    /// Noise scale in effect for this step.
    pub sigma: f64,
    pub done: bool,
    pub reached_goal: bool,
}

/// Independent random streams for one training run, so that noise draws never
/// shift the action, replay, or environment streams.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub init: SeededRng,
    pub policy: SeededRng,
    pub noise: SeededRng,
    pub env: SeededRng,
    pub replay: SeededRng,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            init: SeededRng::stream(seed, 0),
            policy: SeededRng::stream(seed, 1),
            noise: SeededRng::stream(seed, 2),
            env: SeededRng::stream(seed, 3),
            replay: SeededRng::stream(seed, 4),
        }
    }
}
