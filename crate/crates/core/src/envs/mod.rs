//! Deterministic desk-scale environments.

mod grid;
mod mountain_car;

pub use grid::{GridAction, GridMaze};
pub use mountain_car::{MountainCar, MountainCarState, GOAL_POSITION, MAX_POSITION, MIN_POSITION};

use crate::error::Result;
use crate::rng::SeededRng;

/// Outcome of a single environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult<S> {
    pub next_state: S,
    pub reward: f64,
    pub done: bool,
    /// True when the episode ended at the goal rather than on the step budget.
    pub reached_goal: bool,
}

/// An episodic task with a discrete action set.
pub trait Environment {
    type State: Clone;

    fn num_actions(&self) -> usize;

    /// Width of [`Environment::features`].
    fn feature_dim(&self) -> usize;

    fn reset(&mut self, rng: &mut SeededRng) -> Self::State;

    fn step(&mut self, action: usize) -> Result<StepResult<Self::State>>;

    /// Network input for a state.
    fn features(&self, state: &Self::State) -> Vec<f64>;

    /// Geometric embedding of a state, used for trajectory spread.
    fn embed(&self, state: &Self::State) -> Vec<f64>;
}
