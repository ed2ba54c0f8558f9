use crate::envs::{Environment, StepResult};
use crate::error::{Result, RrpError};
use crate::rng::SeededRng;

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.45;
pub const POWER: f64 = 0.0015;
pub const GRAVITY: f64 = 0.0025;
pub const FORCE_PENALTY: f64 = 0.1;

/// Forces applied by the three discrete actions.
pub const FORCES: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MountainCarState {
    pub position: f64,
    pub velocity: f64,
}

/// Underpowered car in a valley. Reward is +1 at the goal and `−0.1·f²`
/// otherwise, so doing nothing is a local optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct MountainCar {
    state: MountainCarState,
    max_steps: usize,
    steps: usize,
    done: bool,
}

impl MountainCar {
    pub fn new(max_steps: usize) -> Result<Self> {
        if max_steps == 0 {
            return Err(RrpError::invalid("mountain car step budget must be positive"));
        }
        Ok(Self {
            state: MountainCarState {
                position: -0.5,
                velocity: 0.0,
            },
            max_steps,
            steps: 0,
            done: false,
        })
    }

    pub fn state(&self) -> MountainCarState {
        self.state
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    /// Places the car at an explicit state and starts a fresh episode.
    pub fn reset_to(&mut self, state: MountainCarState) -> MountainCarState {
        self.state = MountainCarState {
            position: state.position.clamp(MIN_POSITION, MAX_POSITION),
            velocity: state.velocity.clamp(-MAX_SPEED, MAX_SPEED),
        };
        self.steps = 0;
        self.done = false;
        self.state
    }

    /// Applies a raw force in `{−1, 0, +1}`.
    pub fn step_force(&mut self, force: f64) -> Result<StepResult<MountainCarState>> {
        if self.done {
            return Err(RrpError::Protocol(
                "mountain car stepped after episode end; call reset".into(),
            ));
        }
        let MountainCarState { position, velocity } = self.state;
        let mut velocity = (velocity + POWER * force - GRAVITY * (3.0 * position).cos()).clamp(-MAX_SPEED, MAX_SPEED);
        let position = (position + velocity).clamp(MIN_POSITION, MAX_POSITION);
        if position == MIN_POSITION && velocity < 0.0 {
            velocity = 0.0;
        }
        self.state = MountainCarState { position, velocity };
        self.steps += 1;
        let reached_goal = position >= GOAL_POSITION;
        self.done = reached_goal || self.steps >= self.max_steps;
        let reward = if reached_goal {
            1.0
        } else {
            0.0 - FORCE_PENALTY * force * force
        };
        Ok(StepResult {
            next_state: self.state,
            reward,
            done: self.done,
            reached_goal,
        })
    }
}

impl Environment for MountainCar {
    type State = MountainCarState;

    fn num_actions(&self) -> usize {
        FORCES.len()
    }

    fn feature_dim(&self) -> usize {
        2
    }

    /// Canonical start: position uniform in `[−0.6, −0.4)`, at rest.
    fn reset(&mut self, rng: &mut SeededRng) -> MountainCarState {
        let position = rng.uniform_range(-0.6, -0.4);
        self.reset_to(MountainCarState {
            position,
            velocity: 0.0,
        })
    }

    fn step(&mut self, action: usize) -> Result<StepResult<MountainCarState>> {
        let force = *FORCES
            .get(action)
            .ok_or_else(|| RrpError::invalid(format!("mountain car action {action} out of range")))?;
        self.step_force(force)
    }

    /// Position and velocity rescaled to roughly `[−1, 1]`.
    fn features(&self, s: &MountainCarState) -> Vec<f64> {
        let mid = 0.5 * (MIN_POSITION + MAX_POSITION);
        let half = 0.5 * (MAX_POSITION - MIN_POSITION);
        vec![(s.position - mid) / half, s.velocity / MAX_SPEED]
    }

    fn embed(&self, s: &MountainCarState) -> Vec<f64> {
        vec![s.position, s.velocity]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_push() {
        let mut env = MountainCar::new(200).unwrap();
        env.reset_to(MountainCarState {
            position: 0.0,
            velocity: 0.0,
        });
        let r = env.step_force(1.0).unwrap();
        assert!((r.next_state.velocity - -0.0010).abs() < 1e-15);
        assert!((r.next_state.position - -0.0010).abs() < 1e-15);
        assert_eq!(r.reward, -0.1);
    }

    #[test]
    fn force_penalty_is_exact() {
        let mut env = MountainCar::new(50).unwrap();
        env.reset(&mut SeededRng::new(1));
        for a in [0usize, 2, 0, 2, 2] {
            let r = env.step(a).unwrap();
            assert_eq!(r.reward, if a == 1 { 0.0 } else { -0.1 });
        }
    }

    #[test]
    fn resting_at_valley_bottom_is_an_equilibrium() {
        let bottom = -std::f64::consts::PI / 6.0;
        let mut env = MountainCar::new(1000).unwrap();
        env.reset_to(MountainCarState {
            position: bottom,
            velocity: 0.0,
        });
        for _ in 0..1000 {
            let r = env.step(1).unwrap();
            assert_eq!(r.reward, 0.0);
            assert!(!r.reached_goal);
            assert!((r.next_state.position - bottom).abs() < 1e-9);
        }
    }

    #[test]
    fn passive_car_never_reaches_goal() {
        let mut env = MountainCar::new(10_000).unwrap();
        let start = env.reset(&mut SeededRng::new(4));
        let mut max_dev: f64 = 0.0;
        for _ in 0..10_000 {
            let r = env.step(1).unwrap();
            max_dev = max_dev.max((r.next_state.position - start.position).abs());
            assert!(!r.reached_goal);
            if r.done {
                break;
            }
        }
        assert!(start.position + max_dev < GOAL_POSITION);
    }

    #[test]
    fn goal_terminates_with_bonus() {
        let mut env = MountainCar::new(100).unwrap();
        env.reset_to(MountainCarState {
            position: 0.44,
            velocity: 0.05,
        });
        let r = env.step(2).unwrap();
        assert!(r.done && r.reached_goal);
        assert_eq!(r.reward, 1.0);
        assert!(matches!(env.step(1), Err(RrpError::Protocol(_))));
    }

    #[test]
    fn state_stays_in_bounds() {
        let mut env = MountainCar::new(100_000).unwrap();
        let mut rng = SeededRng::new(8);
        env.reset(&mut rng);
        for _ in 0..5000 {
            let r = env.step(rng.below(3)).unwrap();
            let s = r.next_state;
            assert!((MIN_POSITION..=MAX_POSITION).contains(&s.position));
            assert!(s.velocity.abs() <= MAX_SPEED);
            if r.done {
                env.reset(&mut rng);
            }
        }
    }
}
