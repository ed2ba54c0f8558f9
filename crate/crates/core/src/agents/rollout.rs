use crate::agents::policy::{sample_categorical, ActionPolicy};
use crate::envs::Environment;
use crate::error::{Result, RrpError};
use crate::rng::SeededRng;

/// Ordered state embeddings `s₀, …, s_H` of one rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `n` rollouts of exactly `horizon + 1` states. A rollout that terminates
/// early repeats its terminal state for the remaining steps.
pub fn collect_trajectories<E: Environment, P: ActionPolicy + ?Sized>(
    policy: &P,
    env: &mut E,
    n: usize,
    horizon: usize,
    rng: &mut SeededRng,
) -> Result<Vec<Trajectory>> {
    if n < 2 {
        return Err(RrpError::invalid(format!("need at least 2 trajectories, got {n}")));
    }
    if horizon == 0 {
        return Err(RrpError::invalid("trajectory horizon must be at least 1"));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut state = env.reset(rng);
        let mut states = Vec::with_capacity(horizon + 1);
        states.push(env.embed(&state));
        let mut done = false;
        for _ in 0..horizon {
            if done {
                let last = states.last().unwrap().clone();
                states.push(last);
                continue;
            }
            let probs = policy.action_probs(&env.features(&state));
            let action = sample_categorical(&probs, rng);
            let step = env.step(action)?;
            states.push(env.embed(&step.next_state));
            done = step.done;
            state = step.next_state;
        }
        out.push(Trajectory { states });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::UniformPolicy;
    use crate::envs::GridMaze;

    struct AlwaysRight;

    impl ActionPolicy for AlwaysRight {
        fn action_probs(&self, _: &[f64]) -> Vec<f64> {
            vec![1.0, 0.0, 0.0, 0.0]
        }
    }

    #[test]
    fn deterministic_policy_gives_identical_trajectories() {
        let mut env = GridMaze::open(5, 100).unwrap();
        let trajs = collect_trajectories(&AlwaysRight, &mut env, 4, 10, &mut SeededRng::new(1)).unwrap();
        assert!(trajs.iter().all(|t| t == &trajs[0] && t.len() == 11));
        assert_eq!(trajs[0].states[10], vec![0.0, 4.0]);
    }

    #[test]
    fn terminal_state_is_absorbing() {
        let mut env = GridMaze::open(2, 100).unwrap();
        let policy = UniformPolicy { num_actions: 4 };
        let trajs = collect_trajectories(&policy, &mut env, 50, 40, &mut SeededRng::new(2)).unwrap();
        for t in &trajs {
            assert_eq!(t.len(), 41);
            if let Some(k) = t.states.iter().position(|s| s == &vec![1.0, 1.0]) {
                assert!(t.states[k..].iter().all(|s| s == &vec![1.0, 1.0]));
            }
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut env = GridMaze::open(5, 100).unwrap();
        let policy = UniformPolicy { num_actions: 4 };
        let a = collect_trajectories(&policy, &mut env, 2, 20, &mut SeededRng::new(1)).unwrap();
        let b = collect_trajectories(&policy, &mut env, 2, 20, &mut SeededRng::new(2)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn argument_checks() {
        let mut env = GridMaze::open(5, 100).unwrap();
        let policy = UniformPolicy { num_actions: 4 };
        assert!(collect_trajectories(&policy, &mut env, 1, 5, &mut SeededRng::new(0)).is_err());
        assert!(collect_trajectories(&policy, &mut env, 2, 0, &mut SeededRng::new(0)).is_err());
    }
}
