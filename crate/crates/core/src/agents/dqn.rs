//! DQN whose replay buffer stores raw reward noise.
//!
//! Noise is drawn at the initial scale when a transition is collected and
//! annealed according to the *current* step whenever the transition is
//! replayed. With a zero schedule the learner reduces exactly to vanilla DQN.

use serde::{Deserialize, Serialize};

use crate::agents::policy::{argmax, sample_categorical, softmax_policy, ActionPolicy};
use crate::agents::replay::{AugmentedTransition, BufferAgeStats, ReplayBuffer};
use crate::agents::{RunStreams, StepEvent};
use crate::envs::Environment;
use crate::error::{Result, RrpError};
use crate::nn::DenseNet;
use crate::noise::{anneal_stored_noise_with, perturb_reward, sample_gaussian, AnnealMode, NoiseSchedule};
use crate::rng::SeededRng;

/// How the behaviour policy turns Q-values into actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Behavior {
    /// `π(a|s) ∝ exp(Q(s,a)/temperature)`.
    Softmax { temperature: f64 },
    /// Linearly decaying ε-greedy.
    EpsilonGreedy { start: f64, end: f64, decay_steps: u64 },
}

impl Default for Behavior {
    fn default() -> Self {
        Behavior::Softmax { temperature: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Target network Polyak weight.
    pub tau: f64,
    /// Environment steps before the first gradient step.
    pub warmup: u64,
    pub train_every: u64,
    pub behavior: Behavior,
    pub anneal_mode: AnnealMode,
}

impl Default for DqnConfig {
    /// Desk-scale preset: buffer 10⁴, batch 32.
    fn default() -> Self {
        Self {
            hidden: vec![32],
            gamma: 0.99,
            learning_rate: 1e-3,
            batch_size: 32,
            buffer_capacity: 10_000,
            tau: 5e-3,
            warmup: 100,
            train_every: 1,
            behavior: Behavior::default(),
            anneal_mode: AnnealMode::SignPreserving,
        }
    }
}

impl DqnConfig {
    /// Full-scale replay settings: buffer 10⁶, batch 256.
    pub fn full_scale() -> Self {
        Self {
            batch_size: 256,
            buffer_capacity: 1_000_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.hidden.contains(&0) {
            errs.push("dqn.hidden: layer widths must be positive".into());
        }
        if !(0.0..1.0).contains(&self.gamma) {
            errs.push(format!("dqn.gamma: must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.learning_rate > 0.0) {
            errs.push(format!(
                "dqn.learning_rate: must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.batch_size == 0 {
            errs.push("dqn.batch_size: must be positive".into());
        }
        if self.buffer_capacity < self.batch_size {
            errs.push(format!(
                "dqn.buffer_capacity: {} is smaller than batch_size {}",
                self.buffer_capacity, self.batch_size
            ));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            errs.push(format!("dqn.tau: must lie in (0, 1], got {}", self.tau));
        }
        if self.train_every == 0 {
            errs.push("dqn.train_every: must be positive".into());
        }
        match self.behavior {
            Behavior::Softmax { temperature } if !(temperature > 0.0) => {
                errs.push(format!("dqn.behavior.temperature: must be positive, got {temperature}"))
            }
            Behavior::EpsilonGreedy { start, end, .. }
                if !((0.0..=1.0).contains(&start) && (0.0..=1.0).contains(&end)) =>
            {
                errs.push("dqn.behavior: epsilon bounds must lie in [0, 1]".into())
            }
            _ => {}
        }
        errs
    }
}

/// `r + γ·(1−done)·max_a′ Q_target(s′, a′)`. The target network is not differentiated.
pub fn dqn_td_target(target: &DenseNet, reward: f64, next_state: &[f64], done: bool, gamma: f64) -> Result<f64> {
    if done {
        return Ok(reward);
    }
    let q_next = target.forward(next_state)?;
    let best = q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(reward + gamma * best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainOutcome {
    /// Not enough transitions stored for a batch.
    Skipped,
    Updated {
        loss: f64,
        ages: BufferAgeStats,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DqnAgent {
    online: DenseNet,
    target: DenseNet,
    config: DqnConfig,
}

impl DqnAgent {
    pub fn new(feature_dim: usize, num_actions: usize, config: DqnConfig, rng: &mut SeededRng) -> Result<Self> {
        let errs = config.validate();
        if !errs.is_empty() {
            return Err(RrpError::Validation(errs));
        }
        let mut sizes = vec![feature_dim];
        sizes.extend(&config.hidden);
        sizes.push(num_actions);
        let online = DenseNet::new(&sizes, rng)?;
        Ok(Self {
            target: online.clone(),
            online,
            config,
        })
    }

    pub fn from_networks(online: DenseNet, target: DenseNet, config: DqnConfig) -> Result<Self> {
        if online.layer_sizes() != target.layer_sizes() {
            return Err(RrpError::invalid("online and target networks differ in shape"));
        }
        Ok(Self { online, target, config })
    }

    pub fn online(&self) -> &DenseNet {
        &self.online
    }

    pub fn target(&self) -> &DenseNet {
        &self.target
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn q_values(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.online.forward(features)
    }

    pub fn act(&self, features: &[f64], t: u64, rng: &mut SeededRng) -> Result<usize> {
        let q = self.q_values(features)?;
        Ok(match self.config.behavior {
            Behavior::Softmax { temperature } => {
                let scaled: Vec<f64> = q.iter().map(|v| v / temperature).collect();
                sample_categorical(&softmax_policy(&scaled), rng)
            }
            Behavior::EpsilonGreedy {
                start,
                end,
                decay_steps,
            } => {
                let frac = if decay_steps == 0 {
                    1.0
                } else {
                    (t as f64 / decay_steps as f64).min(1.0)
                };
                let eps = start + (end - start) * frac;
                if rng.uniform() < eps {
                    rng.below(q.len())
                } else {
                    argmax(&q)
                }
            }
        })
    }

    /// One gradient step on a replayed batch, with stored noise annealed to step `t`.
    pub fn train_step(
        &mut self,
        buffer: &ReplayBuffer,
        schedule: &NoiseSchedule,
        t: u64,
        rng: &mut SeededRng,
    ) -> Result<TrainOutcome> {
        let Some(indices) = buffer.sample_indices(self.config.batch_size, rng) else {
            return Ok(TrainOutcome::Skipped);
        };
        let mut targets = Vec::with_capacity(indices.len());
        for &i in &indices {
            let tr = buffer.get(i);
            let eps = anneal_stored_noise_with(self.config.anneal_mode, tr.epsilon_raw, t, schedule);
            let y = dqn_td_target(
                &self.target,
                perturb_reward(tr.env_reward, eps),
                &tr.next_state,
                tr.done,
                self.config.gamma,
            )?;
            if cfg!(debug_assertions) {
                // perturbed target = unperturbed target + ε
                let y_ori = dqn_td_target(&self.target, tr.env_reward, &tr.next_state, tr.done, self.config.gamma)?;
                debug_assert!((y - (y_ori + eps)).abs() <= 1e-9 * (1.0 + y.abs()));
            }
            targets.push(y);
        }
        let loss = self.regress(buffer, &indices, &targets)?;
        Ok(TrainOutcome::Updated {
            loss,
            ages: buffer.age_stats(&indices, t),
        })
    }

    /// One gradient step on a replayed batch that ignores stored noise.
    pub fn train_step_vanilla(&mut self, buffer: &ReplayBuffer, rng: &mut SeededRng) -> Result<TrainOutcome> {
        let Some(indices) = buffer.sample_indices(self.config.batch_size, rng) else {
            return Ok(TrainOutcome::Skipped);
        };
        let mut targets = Vec::with_capacity(indices.len());
        for &i in &indices {
            let tr = buffer.get(i);
            targets.push(dqn_td_target(
                &self.target,
                tr.env_reward,
                &tr.next_state,
                tr.done,
                self.config.gamma,
            )?);
        }
        let loss = self.regress(buffer, &indices, &targets)?;
        Ok(TrainOutcome::Updated {
            loss,
            ages: BufferAgeStats::default(),
        })
    }

    /// SGD on `(1/B) Σ ½(Q(s,a) − y)²`, then a soft target update.
    fn regress(&mut self, buffer: &ReplayBuffer, indices: &[usize], targets: &[f64]) -> Result<f64> {
        let scale = 1.0 / indices.len() as f64;
        let mut grad = vec![0.0; self.online.num_params()];
        let mut out_grad = vec![0.0; self.online.output_dim()];
        let mut loss = 0.0;
        for (&i, &y) in indices.iter().zip(targets) {
            let tr = buffer.get(i);
            let q = self.online.forward(&tr.state)?;
            let residual = q[tr.action] - y;
            loss += 0.5 * residual * residual * scale;
            out_grad[tr.action] = residual * scale;
            self.online.vjp_accumulate(&tr.state, &out_grad, &mut grad)?;
            out_grad[tr.action] = 0.0;
        }
        self.online.apply_gradient(&grad, self.config.learning_rate)?;
        self.target.soft_update_from(&self.online, self.config.tau);
        Ok(loss)
    }

    /// Runs `steps` environment steps with learning. `schedule = None` is
    /// vanilla DQN; otherwise rewards are perturbed with stored, annealed noise.
    pub fn run<E: Environment>(
        &mut self,
        env: &mut E,
        schedule: Option<&NoiseSchedule>,
        steps: u64,
        streams: &mut RunStreams,
        mut observer: impl FnMut(&StepEvent),
    ) -> Result<ReplayBuffer> {
        let mut buffer = ReplayBuffer::new(self.config.buffer_capacity)?;
        let mut state = env.reset(&mut streams.env);
        let mut episode = 0;
        for t in 0..steps {
            let features = env.features(&state);
            let action = self.act(&features, t, &mut streams.policy)?;
            let step = env.step(action)?;
            let epsilon_raw = match schedule {
                Some(s) => sample_gaussian(&mut streams.noise, s.sigma_max())?,
                None => 0.0,
            };
            buffer.push(AugmentedTransition {
                state: features,
                action,
                env_reward: step.reward,
                epsilon_raw,
                next_state: env.features(&step.next_state),
                done: step.reached_goal,
                inserted_at: t,
            });
            if t >= self.config.warmup && t % self.config.train_every == 0 {
                match schedule {
                    Some(s) => self.train_step(&buffer, s, t, &mut streams.replay)?,
                    None => self.train_step_vanilla(&buffer, &mut streams.replay)?,
                };
            }
            let sigma = schedule.map_or(0.0, |s| {
                anneal_stored_noise_with(AnnealMode::SignPreserving, s.sigma_max(), t, s)
            });
            observer(&StepEvent {
                t,
                episode,
                embedding: env.embed(&step.next_state),
                env_reward: step.reward,
                sigma,
                done: step.done,
                reached_goal: step.reached_goal,
            });
            if step.done {
                episode += 1;
                state = env.reset(&mut streams.env);
            } else {
                state = step.next_state;
            }
        }
        Ok(buffer)
    }
}

/// Softmax over the online network's Q-values.
impl ActionPolicy for DqnAgent {
    fn action_probs(&self, features: &[f64]) -> Vec<f64> {
        let q = self
            .online
            .forward(features)
            .expect("feature width matches the network");
        match self.config.behavior {
            Behavior::Softmax { temperature } => softmax_policy(&q.iter().map(|v| v / temperature).collect::<Vec<_>>()),
            Behavior::EpsilonGreedy { .. } => softmax_policy(&q),
        }
    }
}
