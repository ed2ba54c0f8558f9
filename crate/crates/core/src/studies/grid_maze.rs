use serde::{Deserialize, Serialize};

use crate::agents::{QTable, RunStreams};
use crate::diagnostics::action_entropy;
use crate::envs::{Environment, GridMaze};
use crate::error::Result;
use crate::noise::{perturb_reward, sample_gaussian, NoiseSchedule};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TabularConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// Exploration rate of the ε-greedy behaviour policy.
    pub epsilon: f64,
    pub episodes: usize,
    pub snapshot_every: usize,
}

impl Default for TabularConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.99,
            epsilon: 0.1,
            episodes: 200,
            snapshot_every: 20,
        }
    }
}

impl TabularConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            errs.push(format!("tabular.alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            errs.push(format!("tabular.gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            errs.push(format!("tabular.epsilon must lie in [0, 1], got {}", self.epsilon));
        }
        if self.episodes == 0 {
            errs.push("tabular.episodes must be at least 1".into());
        }
        if self.snapshot_every == 0 {
            errs.push("tabular.snapshot_every must be at least 1".into());
        }
        errs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEpisode {
    pub episode: usize,
    /// Global step count at the end of the episode.
    pub step: u64,
    pub length: usize,
    pub episode_return: f64,
    pub sigma: f64,
    pub reached_goal: bool,
    /// Entropy of the greedy map over open cells after the episode.
    pub greedy_entropy: f64,
}

/// Greedy action per open cell after `episode` episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySnapshot {
    pub episode: usize,
    /// `(cell index, action)` for every open cell, in index order.
    pub actions: Vec<(usize, usize)>,
    pub entropy: f64,
}

#[derive(Debug, Clone)]
pub struct GridMazeRun {
    pub seed: u64,
    pub episodes: Vec<GridEpisode>,
    pub snapshots: Vec<GreedySnapshot>,
    pub table: QTable,
}

impl GridMazeRun {
    pub fn mean_snapshot_entropy(&self) -> f64 {
        if self.snapshots.is_empty() {
            return 0.0;
        }
        self.snapshots.iter().map(|s| s.entropy).sum::<f64>() / self.snapshots.len() as f64
    }

    pub fn goal_reaches(&self) -> usize {
        self.episodes.iter().filter(|e| e.reached_goal).count()
    }
}

fn greedy_open(table: &QTable, open: &[usize]) -> Vec<(usize, usize)> {
    open.iter().map(|&c| (c, table.greedy_action(c))).collect()
}

// ε-greedy with uniform tie-breaking, so an all-zero row does not pin the walk to action 0
fn behave(table: &QTable, s: usize, epsilon: f64, rng: &mut SeededRng) -> usize {
    let a_n = table.num_actions();
    if rng.uniform() < epsilon {
        return rng.below(a_n);
    }
    let row = table.row(s);
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..a_n).filter(|&a| row[a] == best).collect();
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.below(ties.len())]
    }
}

/// Q-learning on `maze` for `config.episodes` episodes. Rewards carry noise
/// drawn at interaction time with [`NoiseSchedule::interaction_sigma`];
/// `None` is plain Q-learning.
pub fn run_grid_maze(
    maze: &GridMaze,
    config: &TabularConfig,
    schedule: Option<&NoiseSchedule>,
    seed: u64,
) -> Result<GridMazeRun> {
    let mut env = maze.clone();
    let mut streams = RunStreams::new(seed);
    let mut table = QTable::new(env.num_cells(), env.num_actions(), config.alpha, config.gamma)?;
    let open = env.open_cells();
    let mut episodes = Vec::with_capacity(config.episodes);
    let mut snapshots = Vec::new();
    let mut t = 0u64;
    for episode in 1..=config.episodes {
        let mut cell = env.reset(&mut streams.env);
        let (mut ret, mut length) = (0.0, 0);
        loop {
            let s = env.index(cell);
            let a = behave(&table, s, config.epsilon, &mut streams.policy);
            let step = env.step(a)?;
            let (r, sigma) = match schedule {
                Some(sched) => {
                    let sigma = sched.interaction_sigma(t);
                    (
                        perturb_reward(step.reward, sample_gaussian(&mut streams.noise, sigma)?),
                        sigma,
                    )
                }
                None => (step.reward, 0.0),
            };
            table.update(s, a, r, env.index(step.next_state), step.reached_goal)?;
            ret += step.reward;
            length += 1;
            t += 1;
            cell = step.next_state;
            if step.done {
                episodes.push(GridEpisode {
                    episode,
                    step: t,
                    length,
                    episode_return: ret,
                    sigma,
                    reached_goal: step.reached_goal,
                    greedy_entropy: 0.0,
                });
                break;
            }
        }
        let map = greedy_open(&table, &open);
        let entropy = action_entropy(&map.iter().map(|&(_, a)| a).collect::<Vec<_>>());
        episodes.last_mut().expect("episode just pushed").greedy_entropy = entropy;
        if episode % config.snapshot_every == 0 {
            snapshots.push(GreedySnapshot {
                episode,
                actions: map,
                entropy,
            });
        }
    }
    Ok(GridMazeRun {
        seed,
        episodes,
        snapshots,
        table,
    })
}
