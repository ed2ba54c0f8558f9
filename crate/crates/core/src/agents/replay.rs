use crate::error::{Result, RrpError};
use crate::rng::SeededRng;

/// A transition stored together with the raw noise drawn at the initial scale.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTransition {
    pub state: Vec<f64>,
    pub action: usize,
    pub env_reward: f64,
    /// Never pre-annealed; shrunk when the transition is replayed.
    pub epsilon_raw: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
    /// Global step at which the transition was collected.
    pub inserted_at: u64,
}

/// Fixed-capacity ring buffer with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<AugmentedTransition>,
    next: usize,
}

/// Age of replayed transitions relative to the sampling step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BufferAgeStats {
    pub mean_age: f64,
    pub max_age: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(RrpError::invalid("replay capacity must be positive"));
        }
        Ok(Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            next: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, transition: AugmentedTransition) {
        if self.items.len() < self.capacity {
            self.items.push(transition);
        } else {
            self.items[self.next] = transition;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Indices drawn uniformly with replacement, or `None` when fewer than
    /// `batch_size` transitions are stored.
    pub fn sample_indices(&self, batch_size: usize, rng: &mut SeededRng) -> Option<Vec<usize>> {
        if batch_size == 0 || self.items.len() < batch_size {
            return None;
        }
        Some((0..batch_size).map(|_| rng.below(self.items.len())).collect())
    }

    pub fn get(&self, index: usize) -> &AugmentedTransition {
        &self.items[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &AugmentedTransition> {
        self.items.iter()
    }

    pub fn age_stats(&self, indices: &[usize], t: u64) -> BufferAgeStats {
        if indices.is_empty() {
            return BufferAgeStats::default();
        }
        let ages: Vec<u64> = indices
            .iter()
            .map(|&i| t.saturating_sub(self.items[i].inserted_at))
            .collect();
        BufferAgeStats {
            mean_age: ages.iter().sum::<u64>() as f64 / ages.len() as f64,
            max_age: ages.iter().copied().max().unwrap_or(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(i: u64) -> AugmentedTransition {
        AugmentedTransition {
            state: vec![i as f64],
            action: 0,
            env_reward: 0.0,
            epsilon_raw: 0.0,
            next_state: vec![i as f64 + 1.0],
            done: false,
            inserted_at: i,
        }
    }

    #[test]
    fn ring_overwrites_oldest() {
        let mut b = ReplayBuffer::new(3).unwrap();
        for i in 0..5 {
            b.push(tr(i));
        }
        assert_eq!(b.len(), 3);
        let mut seen: Vec<u64> = b.iter().map(|t| t.inserted_at).collect();
        seen.sort();
        assert_eq!(seen, vec![2, 3, 4]);
    }

    #[test]
    fn sampling_requires_enough_items() {
        let mut b = ReplayBuffer::new(10).unwrap();
        let mut rng = SeededRng::new(0);
        b.push(tr(0));
        assert!(b.sample_indices(2, &mut rng).is_none());
        b.push(tr(1));
        let idx = b.sample_indices(2, &mut rng).unwrap();
        assert!(idx.iter().all(|&i| i < 2));
    }

    #[test]
    fn age_statistics() {
        let mut b = ReplayBuffer::new(10).unwrap();
        for i in 0..4 {
            b.push(tr(i));
        }
        let s = b.age_stats(&[0, 3], 10);
        assert_eq!(s.max_age, 10);
        assert_eq!(s.mean_age, 8.5);
    }
}
