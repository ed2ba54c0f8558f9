use crate::rng::SeededRng;

/// Anything that maps state features to a distribution over actions.
pub trait ActionPolicy {
    fn action_probs(&self, features: &[f64]) -> Vec<f64>;
}

/// `π(a) = exp(q_a) / Σ exp(q_a′)`, evaluated with the maximum subtracted.
pub fn softmax_policy(q_values: &[f64]) -> Vec<f64> {
    let max = q_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = q_values.iter().map(|q| (q - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Inverse-CDF draw from a discrete distribution.
pub fn sample_categorical(probs: &[f64], rng: &mut SeededRng) -> usize {
    let u = rng.uniform();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the final partial sum
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Index of the largest value, ties to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub struct UniformPolicy {
    pub num_actions: usize,
}

impl ActionPolicy for UniformPolicy {
    fn action_probs(&self, _features: &[f64]) -> Vec<f64> {
        vec![1.0 / self.num_actions as f64; self.num_actions]
    }
}
