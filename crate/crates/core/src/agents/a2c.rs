//! Advantage actor-critic with rewards perturbed at interaction time.

use serde::{Deserialize, Serialize};

use crate::agents::policy::{sample_categorical, softmax_policy, ActionPolicy};
use crate::agents::{RunStreams, StepEvent};
use crate::envs::Environment;
use crate::error::{Result, RrpError};
use crate::nn::DenseNet;
use crate::noise::{perturb_reward, sample_gaussian, NoiseSchedule};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct A2cConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub policy_learning_rate: f64,
    pub value_learning_rate: f64,
    /// Transitions collected between updates.
    pub rollout_len: usize,
}

impl Default for A2cConfig {
    fn default() -> Self {
        Self {
            hidden: vec![32],
            gamma: 0.99,
            policy_learning_rate: 3e-3,
            value_learning_rate: 3e-3,
            rollout_len: 16,
        }
    }
}

impl A2cConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.hidden.contains(&0) {
            errs.push("a2c.hidden: layer widths must be positive".into());
        }
        if !(0.0..1.0).contains(&self.gamma) {
            errs.push(format!("a2c.gamma: must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.policy_learning_rate > 0.0) {
            errs.push("a2c.policy_learning_rate: must be positive".into());
        }
        if !(self.value_learning_rate > 0.0) {
            errs.push("a2c.value_learning_rate: must be positive".into());
        }
        if self.rollout_len == 0 {
            errs.push("a2c.rollout_len: must be positive".into());
        }
        errs
    }
}

/// On-policy transition whose reward already carries any perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct A2cTransition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// `r + γ·(1−done)·V(s′) − V(s)`.
pub fn a2c_advantage(
    value: &DenseNet,
    reward: f64,
    state: &[f64],
    next_state: &[f64],
    done: bool,
    gamma: f64,
) -> Result<f64> {
    let v = value.forward(state)?[0];
    let bootstrap = if done {
        0.0
    } else {
        gamma * value.forward(next_state)?[0]
    };
    Ok(reward + bootstrap - v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A2cUpdate {
    pub value_loss: f64,
    pub mean_advantage: f64,
}

/// Softmax policy network over action logits plus a scalar value network.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    policy: DenseNet,
    value: DenseNet,
    config: A2cConfig,
}

impl ActorCritic {
    pub fn new(feature_dim: usize, num_actions: usize, config: A2cConfig, rng: &mut SeededRng) -> Result<Self> {
        let errs = config.validate();
        if !errs.is_empty() {
            return Err(RrpError::Validation(errs));
        }
        let mut policy_sizes = vec![feature_dim];
        policy_sizes.extend(&config.hidden);
        policy_sizes.push(num_actions);
        let mut value_sizes = policy_sizes.clone();
        *value_sizes.last_mut().unwrap() = 1;
        Ok(Self {
            policy: DenseNet::new(&policy_sizes, rng)?,
            value: DenseNet::new(&value_sizes, rng)?,
            config,
        })
    }

    pub fn from_networks(policy: DenseNet, value: DenseNet, config: A2cConfig) -> Result<Self> {
        if value.output_dim() != 1 {
            return Err(RrpError::invalid("value network must have a scalar output"));
        }
        if value.input_dim() != policy.input_dim() {
            return Err(RrpError::invalid("policy and value networks take different inputs"));
        }
        Ok(Self { policy, value, config })
    }

    pub fn policy(&self) -> &DenseNet {
        &self.policy
    }

    pub fn value(&self) -> &DenseNet {
        &self.value
    }

    pub fn config(&self) -> &A2cConfig {
        &self.config
    }

    pub fn probs(&self, features: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax_policy(&self.policy.forward(features)?))
    }

    pub fn act(&self, features: &[f64], rng: &mut SeededRng) -> Result<usize> {
        Ok(sample_categorical(&self.probs(features)?, rng))
    }

    /// One SGD step on the value MSE toward fixed TD targets and one on
    /// `−(1/n) Σ log π(a|s)·A`, with advantages held constant.
    pub fn update(&mut self, rollout: &[A2cTransition]) -> Result<A2cUpdate> {
        if rollout.is_empty() {
            return Err(RrpError::invalid("A2C update needs a non-empty rollout"));
        }
        let gamma = self.config.gamma;
        let advantages = rollout
            .iter()
            .map(|tr| a2c_advantage(&self.value, tr.reward, &tr.state, &tr.next_state, tr.done, gamma))
            .collect::<Result<Vec<_>>>()?;
        let scale = 1.0 / rollout.len() as f64;

        // V(s) − y = −A for the fixed target y = r + γV(s′)
        let mut value_grad = vec![0.0; self.value.num_params()];
        let mut value_loss = 0.0;
        for (tr, &adv) in rollout.iter().zip(&advantages) {
            value_loss += 0.5 * adv * adv * scale;
            self.value.vjp_accumulate(&tr.state, &[-adv * scale], &mut value_grad)?;
        }

        // ∂(−log π(a|s))/∂logits = π − e_a
        let mut policy_grad = vec![0.0; self.policy.num_params()];
        for (tr, &adv) in rollout.iter().zip(&advantages) {
            if adv == 0.0 {
                continue;
            }
            let mut out_grad = self.probs(&tr.state)?;
            out_grad[tr.action] -= 1.0;
            for g in &mut out_grad {
                *g *= adv * scale;
            }
            self.policy.vjp_accumulate(&tr.state, &out_grad, &mut policy_grad)?;
        }

        self.value
            .apply_gradient(&value_grad, self.config.value_learning_rate)?;
        self.policy
            .apply_gradient(&policy_grad, self.config.policy_learning_rate)?;
        Ok(A2cUpdate {
            value_loss,
            mean_advantage: advantages.iter().sum::<f64>() * scale,
        })
    }

    /// Runs `steps` environment steps with an update every `rollout_len`
    /// transitions. `schedule = None` is vanilla A2C; otherwise each reward
    /// gets noise drawn at the annealed scale of the current step.
    pub fn run<E: Environment>(
        &mut self,
        env: &mut E,
        schedule: Option<&NoiseSchedule>,
        steps: u64,
        streams: &mut RunStreams,
        mut observer: impl FnMut(&StepEvent),
    ) -> Result<()> {
        let mut rollout = Vec::with_capacity(self.config.rollout_len);
        let mut state = env.reset(&mut streams.env);
        let mut episode = 0;
        for t in 0..steps {
            let features = env.features(&state);
            let action = self.act(&features, &mut streams.policy)?;
            let step = env.step(action)?;
            let (reward, sigma) = match schedule {
                Some(s) => {
                    let sigma = s.interaction_sigma(t);
                    (
                        perturb_reward(step.reward, sample_gaussian(&mut streams.noise, sigma)?),
                        sigma,
                    )
                }
                None => (step.reward, 0.0),
            };
            rollout.push(A2cTransition {
                state: features,
                action,
                reward,
                next_state: env.features(&step.next_state),
                done: step.reached_goal,
            });
            if rollout.len() == self.config.rollout_len {
                self.update(&rollout)?;
                rollout.clear();
            }
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
        Ok(())
    }
}

impl ActionPolicy for ActorCritic {
    fn action_probs(&self, features: &[f64]) -> Vec<f64> {
        self.probs(features).expect("feature width matches the network")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::GridMaze;

    #[test]
    fn zero_value_advantage_is_reward() {
        let v = DenseNet::zeros(&[2, 3, 1]).unwrap();
        assert_eq!(
            a2c_advantage(&v, 1.0, &[0.1, 0.2], &[0.3, 0.4], false, 0.9).unwrap(),
            1.0
        );
    }

    #[test]
    fn bellman_consistent_value_has_zero_advantage() {
        // V(x) = x₀ so V(s) = r + γV(s′) when s₀ = r + γ·s′₀
        let v = DenseNet::from_params(&[2, 1], vec![1.0, 0.0, 0.0]).unwrap();
        let (r, gamma, next) = (0.5, 0.9, 2.0);
        let s = [r + gamma * next, 0.0];
        assert_eq!(a2c_advantage(&v, r, &s, &[next, 7.0], false, gamma).unwrap(), 0.0);
    }

    #[test]
    fn advantage_matches_formula() {
        let mut rng = SeededRng::new(6);
        let v = DenseNet::new(&[3, 4, 1], &mut rng).unwrap();
        let (s, s2) = ([0.2, -0.4, 0.9], [-0.7, 0.1, 0.3]);
        let want = 0.3 + 0.95 * v.forward(&s2).unwrap()[0] - v.forward(&s).unwrap()[0];
        assert_eq!(a2c_advantage(&v, 0.3, &s, &s2, false, 0.95).unwrap(), want);
        let terminal = 0.3 - v.forward(&s).unwrap()[0];
        assert_eq!(a2c_advantage(&v, 0.3, &s, &s2, true, 0.95).unwrap(), terminal);
    }

    #[test]
    fn empty_rollout_rejected() {
        let mut ac = ActorCritic::new(2, 3, A2cConfig::default(), &mut SeededRng::new(0)).unwrap();
        assert!(matches!(ac.update(&[]), Err(RrpError::InvalidArgument(_))));
    }

    #[test]
    fn zero_advantage_leaves_policy_unchanged() {
        let mut rng = SeededRng::new(8);
        let policy = DenseNet::new(&[2, 4, 3], &mut rng).unwrap();
        let value = DenseNet::zeros(&[2, 4, 1]).unwrap();
        let mut ac = ActorCritic::from_networks(policy.clone(), value, A2cConfig::default()).unwrap();
        let rollout = vec![
            A2cTransition {
                state: vec![0.1, 0.2],
                action: 1,
                reward: 0.0,
                next_state: vec![0.3, 0.1],
                done: false,
            },
            A2cTransition {
                state: vec![-0.5, 0.9],
                action: 2,
                reward: 0.0,
                next_state: vec![0.0, 0.0],
                done: true,
            },
        ];
        ac.update(&rollout).unwrap();
        assert_eq!(ac.policy(), &policy);
    }

    #[test]
    fn zero_schedule_run_equals_vanilla_run() {
        let mut env = GridMaze::open(3, 20).unwrap();
        let mut s1 = RunStreams::new(3);
        let mut a = ActorCritic::new(9, 4, A2cConfig::default(), &mut s1.init).unwrap();
        let mut b = a.clone();
        let mut s2 = s1.clone();
        let (mut ta, mut tb) = (Vec::new(), Vec::new());
        a.run(&mut env, None, 400, &mut s1, |e| ta.push(e.embedding.clone()))
            .unwrap();
        b.run(&mut env, Some(&NoiseSchedule::zero(400)), 400, &mut s2, |e| {
            tb.push(e.embedding.clone())
        })
        .unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a, b);
    }
}
