//! Paired RRP-versus-vanilla trajectory variance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{collect_trajectories, A2cConfig, ActorCritic, DqnAgent, DqnConfig, RunStreams};
use crate::diagnostics::variance::trajectory_variance;
use crate::envs::Environment;
use crate::error::{Result, RrpError};
use crate::noise::NoiseSchedule;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Tabular,
    Dqn,
    A2c,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSetup {
    pub kind: AgentKind,
    pub dqn: DqnConfig,
    pub a2c: A2cConfig,
    /// Training steps per arm before trajectories are collected.
    pub train_steps: u64,
    pub n_trajs: usize,
    pub horizon: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePair {
    pub seed: u64,
    pub rrp: f64,
    pub vanilla: f64,
}

/// Trains an RRP and a vanilla agent per seed from the same initial
/// parameters and random streams, then measures the variance of
/// trajectories sampled from each agent's stochastic policy with a shared
/// rollout stream.
pub fn variance_comparison<E>(
    setup: &ComparisonSetup,
    env: &E,
    schedule_rrp: &NoiseSchedule,
    schedule_zero: &NoiseSchedule,
    seeds: &[u64],
) -> Result<Vec<VariancePair>>
where
    E: Environment + Clone + Send + Sync,
{
    if seeds.len() < 5 {
        return Err(RrpError::invalid(format!(
            "variance comparison needs at least 5 seeds, got {}",
            seeds.len()
        )));
    }
    seeds
        .par_iter()
        .map(|&seed| {
            let rrp = train_and_measure(setup, env, schedule_rrp, seed)?;
            let vanilla = train_and_measure(setup, env, schedule_zero, seed)?;
            Ok(VariancePair { seed, rrp, vanilla })
        })
        .collect()
}

fn train_and_measure<E: Environment + Clone>(
    setup: &ComparisonSetup,
    env: &E,
    schedule: &NoiseSchedule,
    seed: u64,
) -> Result<f64> {
    let mut env = env.clone();
    let mut streams = RunStreams::new(seed);
    let mut rollout_rng = SeededRng::stream(seed, 5);
    let (features, actions) = (env.feature_dim(), env.num_actions());
    let trajs = match setup.kind {
        AgentKind::Dqn => {
            let mut agent = DqnAgent::new(features, actions, setup.dqn.clone(), &mut streams.init)?;
            agent.run(&mut env, Some(schedule), setup.train_steps, &mut streams, |_| {})?;
            collect_trajectories(&agent, &mut env, setup.n_trajs, setup.horizon, &mut rollout_rng)?
        }
        AgentKind::A2c => {
            let mut agent = ActorCritic::new(features, actions, setup.a2c.clone(), &mut streams.init)?;
            agent.run(&mut env, Some(schedule), setup.train_steps, &mut streams, |_| {})?;
            collect_trajectories(&agent, &mut env, setup.n_trajs, setup.horizon, &mut rollout_rng)?
        }
        AgentKind::Tabular => return Err(RrpError::invalid("variance comparison supports the dqn and a2c agents")),
    };
    trajectory_variance(&trajs)
}
