//! The two small case studies: action diversity of tabular Q-learning on a
//! grid maze, and state coverage of DQN on MountainCar.

pub mod grid_maze;
pub mod mountain_car;

pub use grid_maze::{run_grid_maze, GreedySnapshot, GridEpisode, GridMazeRun, TabularConfig};
pub use mountain_car::{run_mountain_car, McEpisode, MountainCarConfig, MountainCarRun, PositionWindow};
