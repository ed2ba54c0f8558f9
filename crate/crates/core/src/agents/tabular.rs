use crate::agents::policy::argmax;
use crate::error::{Result, RrpError};

/// Dense `|S| × |A|` table of action values.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
    alpha: f64,
    gamma: f64,
}

impl QTable {
    pub fn new(num_states: usize, num_actions: usize, alpha: f64, gamma: f64) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(RrpError::invalid("Q-table needs at least one state and one action"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(RrpError::invalid(format!(
                "learning rate must lie in (0, 1], got {alpha}"
            )));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(RrpError::invalid(format!("discount must lie in [0, 1), got {gamma}")));
        }
        Ok(Self {
            num_states,
            num_actions,
            values: vec![0.0; num_states * num_actions],
            alpha,
            gamma,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn check(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.num_states || a >= self.num_actions {
            return Err(RrpError::invalid(format!(
                "(state {s}, action {a}) outside a {}x{} table",
                self.num_states, self.num_actions
            )));
        }
        Ok(())
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.num_actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) -> Result<()> {
        self.check(s, a)?;
        self.values[s * self.num_actions + a] = v;
        Ok(())
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    /// `Q(s,a) ← Q(s,a) + α·(r + γ·max Q(s′,·)·(1−done) − Q(s,a))`; returns the TD error.
    pub fn update(&mut self, s: usize, a: usize, r: f64, s_next: usize, done: bool) -> Result<f64> {
        self.check(s, a)?;
        self.check(s_next, 0)?;
        let bootstrap = if done {
            0.0
        } else {
            self.row(s_next).iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        let idx = s * self.num_actions + a;
        let td = r + self.gamma * bootstrap - self.values[idx];
        self.values[idx] += self.alpha * td;
        Ok(td)
    }

    pub fn greedy_action(&self, s: usize) -> usize {
        argmax(self.row(s))
    }

    /// Argmax action per state, ties to the lowest index.
    pub fn greedy_action_map(&self) -> Vec<usize> {
        (0..self.num_states).map(|s| self.greedy_action(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn zero_reward_keeps_zero_table() {
        let mut q = QTable::new(4, 2, 0.5, 0.9).unwrap();
        let before = q.clone();
        q.update(0, 1, 0.0, 2, false).unwrap();
        assert_eq!(q, before);
    }

    #[test]
    fn terminal_full_update() {
        let mut q = QTable::new(3, 2, 1.0, 0.9).unwrap();
        q.set(2, 0, 5.0).unwrap();
        q.update(1, 0, 1.0, 2, true).unwrap();
        assert_eq!(q.get(1, 0), 1.0);
    }

    #[test]
    fn random_update_matches_formula() {
        let mut rng = SeededRng::new(17);
        for _ in 0..50 {
            let mut q = QTable::new(6, 3, 0.3, 0.95).unwrap();
            for s in 0..6 {
                for a in 0..3 {
                    q.set(s, a, rng.uniform_range(-2.0, 2.0)).unwrap();
                }
            }
            let (s, a, s2) = (rng.below(6), rng.below(3), rng.below(6));
            let r = rng.uniform_range(-1.0, 1.0);
            let done = rng.uniform() < 0.3;
            let old = q.get(s, a);
            let m = (0..3).map(|b| q.get(s2, b)).fold(f64::MIN, f64::max);
            let target = if done { r } else { r + 0.95 * m };
            let want = old + 0.3 * (target - old);
            q.update(s, a, r, s2, done).unwrap();
            assert!((q.get(s, a) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let mut q = QTable::new(2, 2, 0.5, 0.9).unwrap();
        assert!(matches!(
            q.update(2, 0, 0.0, 0, false),
            Err(RrpError::InvalidArgument(_))
        ));
        assert!(q.update(0, 2, 0.0, 0, false).is_err());
        assert!(q.update(0, 0, 0.0, 5, false).is_err());
    }

    #[test]
    fn greedy_map_examples() {
        let mut q = QTable::new(5, 4, 0.5, 0.9).unwrap();
        assert_eq!(q.greedy_action_map(), vec![0; 5]);
        q.set(3, 2, 0.1).unwrap();
        assert_eq!(q.greedy_action_map(), vec![0, 0, 0, 2, 0]);
    }

    #[test]
    fn greedy_map_matches_scan() {
        let mut rng = SeededRng::new(3);
        let mut q = QTable::new(20, 4, 0.5, 0.9).unwrap();
        for s in 0..20 {
            for a in 0..4 {
                q.set(s, a, (rng.below(5) as f64) - 2.0).unwrap();
            }
        }
        for (s, a) in q.greedy_action_map().into_iter().enumerate() {
            let mut best = 0;
            for b in 0..4 {
                if q.get(s, b) > q.get(s, best) {
                    best = b;
                }
            }
            assert_eq!(a, best);
        }
    }
}
