use std::collections::BTreeMap;

/// Shannon entropy in nats of the empirical distribution of `actions`.
pub fn action_entropy(actions: &[usize]) -> f64 {
    if actions.is_empty() {
        return 0.0;
    }
    let mut counts = BTreeMap::new();
    for &a in actions {
        *counts.entry(a).or_insert(0usize) += 1;
    }
    let n = actions.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_map_has_zero_entropy() {
        assert_eq!(action_entropy(&[0; 24]), 0.0);
    }

    #[test]
    fn balanced_map_has_log_four() {
        let map: Vec<usize> = (0..20).map(|i| i % 4).collect();
        assert!((action_entropy(&map) - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn arbitrary_counts() {
        // counts 3, 1 → −(¾ ln ¾ + ¼ ln ¼)
        let want = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((action_entropy(&[2, 2, 1, 2]) - want).abs() < 1e-12);
    }
}
