use serde::{Deserialize, Serialize};

use crate::agents::{Behavior, DqnAgent, DqnConfig, RunStreams};
use crate::diagnostics::{kde_density, linspace, Bandwidth, DensityGrid};
use crate::envs::{Environment, MountainCar, MAX_POSITION, MIN_POSITION};
use crate::error::Result;
use crate::noise::NoiseSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MountainCarConfig {
    pub dqn: DqnConfig,
    pub max_episode_steps: usize,
    /// Environment steps per density window.
    pub window: u64,
    pub grid_points: usize,
}

impl Default for MountainCarConfig {
    fn default() -> Self {
        Self {
            dqn: DqnConfig {
                hidden: vec![64],
                behavior: Behavior::EpsilonGreedy {
                    start: 1.0,
                    end: 0.01,
                    decay_steps: 2_000,
                },
                ..DqnConfig::default()
            },
            max_episode_steps: 200,
            window: 2_500,
            grid_points: 181,
        }
    }
}

impl MountainCarConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs: Vec<String> = self
            .dqn
            .validate()
            .into_iter()
            .map(|e| format!("mountain_car.{e}"))
            .collect();
        if self.max_episode_steps == 0 {
            errs.push("mountain_car.max_episode_steps must be at least 1".into());
        }
        if self.window == 0 {
            errs.push("mountain_car.window must be at least 1".into());
        }
        if self.grid_points < 2 {
            errs.push(format!(
                "mountain_car.grid_points must be at least 2, got {}",
                self.grid_points
            ));
        }
        errs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEpisode {
    pub episode: usize,
    pub step: u64,
    pub length: usize,
    pub episode_return: f64,
    pub sigma: f64,
    pub reached_goal: bool,
    pub max_position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionWindow {
    pub index: usize,
    pub min_position: f64,
    pub max_position: f64,
    pub density: DensityGrid,
}

impl PositionWindow {
    /// Extent of visited positions in the window.
    pub fn range(&self) -> f64 {
        self.max_position - self.min_position
    }
}

#[derive(Debug, Clone)]
pub struct MountainCarRun {
    pub seed: u64,
    pub goal_reaches: usize,
    pub max_position: f64,
    pub episodes: Vec<McEpisode>,
    pub windows: Vec<PositionWindow>,
}

impl MountainCarRun {
    /// Whether the visited range never shrinks from one window to the next.
    pub fn coverage_monotone(&self) -> bool {
        self.windows.windows(2).all(|w| w[1].range() >= w[0].range())
    }
}

fn close_window(index: usize, positions: &[f64], grid: &[f64]) -> Result<PositionWindow> {
    let mut density = kde_density(positions, grid, Bandwidth::Auto)?;
    density.window = index;
    Ok(PositionWindow {
        index,
        min_position: positions.iter().copied().fold(f64::INFINITY, f64::min),
        max_position: positions.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        density,
    })
}

/// Trains DQN on MountainCar for `steps` steps, recording goal reaches,
/// per-episode returns, and a position density for every window.
/// Stored noise follows the augmented replay pattern; `None` is vanilla DQN.
pub fn run_mountain_car(
    config: &MountainCarConfig,
    schedule: Option<&NoiseSchedule>,
    steps: u64,
    seed: u64,
) -> Result<MountainCarRun> {
    let mut env = MountainCar::new(config.max_episode_steps)?;
    let mut streams = RunStreams::new(seed);
    let mut agent = DqnAgent::new(
        env.feature_dim(),
        env.num_actions(),
        config.dqn.clone(),
        &mut streams.init,
    )?;
    let grid = linspace(MIN_POSITION, MAX_POSITION, config.grid_points);

    let mut episodes = Vec::new();
    let mut windows = Vec::new();
    let mut positions = Vec::with_capacity(config.window as usize);
    let (mut ret, mut length, mut ep_max) = (0.0, 0usize, f64::NEG_INFINITY);
    let mut failure = None;
    agent.run(&mut env, schedule, steps, &mut streams, |ev| {
        if failure.is_some() {
            return;
        }
        let p = ev.embedding[0];
        positions.push(p);
        ret += ev.env_reward;
        length += 1;
        ep_max = ep_max.max(p);
        if ev.done {
            episodes.push(McEpisode {
                episode: ev.episode,
                step: ev.t + 1,
                length,
                episode_return: ret,
                sigma: ev.sigma,
                reached_goal: ev.reached_goal,
                max_position: ep_max,
            });
            (ret, length, ep_max) = (0.0, 0, f64::NEG_INFINITY);
        }
        if (ev.t + 1) % config.window == 0 {
            match close_window(windows.len(), &positions, &grid) {
                Ok(w) => windows.push(w),
                Err(e) => failure = Some(e),
            }
            positions.clear();
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if positions.len() >= 2 {
        windows.push(close_window(windows.len(), &positions, &grid)?);
    }
    let max_position = windows.iter().map(|w| w.max_position).fold(f64::NEG_INFINITY, f64::max);
    Ok(MountainCarRun {
        seed,
        goal_reaches: episodes.iter().filter(|e| e.reached_goal).count(),
        max_position,
        episodes,
        windows,
    })
}
