use crate::agents::Trajectory;
use crate::error::{Result, RrpError};

/// Population covariance of a set of model outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    /// Row-major `m × m`.
    pub covariance: Vec<f64>,
    pub dim: usize,
    pub trace: f64,
    pub mean: Vec<f64>,
    /// `f_i − f̄` for each input.
    pub deviations: Vec<Vec<f64>>,
}

impl VarianceReport {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.covariance[a * self.dim + b]
    }

    /// Lower bound on the smallest eigenvalue from Gershgorin discs.
    pub fn gershgorin_lower_bound(&self) -> f64 {
        (0..self.dim)
            .map(|a| {
                let off: f64 = (0..self.dim).filter(|&b| b != a).map(|b| self.get(a, b).abs()).sum();
                self.get(a, a) - off
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `C = (1/N) Σ (f_i − f̄)(f_i − f̄)ᵀ` and `V = Tr(C)`.
pub fn output_variance(outputs: &[Vec<f64>]) -> Result<VarianceReport> {
    if outputs.len() < 2 {
        return Err(RrpError::invalid(format!(
            "output variance needs at least 2 vectors, got {}",
            outputs.len()
        )));
    }
    let dim = outputs[0].len();
    if outputs.iter().any(|o| o.len() != dim) {
        return Err(RrpError::invalid("output vectors differ in dimension"));
    }
    let n = outputs.len() as f64;
    let mut mean = vec![0.0; dim];
    for o in outputs {
        for (m, v) in mean.iter_mut().zip(o) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let deviations: Vec<Vec<f64>> = outputs
        .iter()
        .map(|o| o.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    let mut covariance = vec![0.0; dim * dim];
    for d in &deviations {
        for a in 0..dim {
            for b in a..dim {
                covariance[a * dim + b] += d[a] * d[b];
            }
        }
    }
    for a in 0..dim {
        for b in a..dim {
            covariance[a * dim + b] /= n;
            covariance[b * dim + a] = covariance[a * dim + b];
        }
    }
    let trace = (0..dim).map(|a| covariance[a * dim + a]).sum();
    Ok(VarianceReport {
        covariance,
        dim,
        trace,
        mean,
        deviations,
    })
}

/// `Σ_h (1/N) Σ_i ‖s_{h,i} − s̄_h‖²`.
pub fn trajectory_variance(trajs: &[Trajectory]) -> Result<f64> {
    if trajs.len() < 2 {
        return Err(RrpError::invalid(format!(
            "trajectory variance needs at least 2 trajectories, got {}",
            trajs.len()
        )));
    }
    let len = trajs[0].len();
    if trajs.iter().any(|t| t.len() != len) {
        return Err(RrpError::invalid("trajectories have ragged lengths"));
    }
    let mut total = 0.0;
    for h in 0..len {
        let step: Vec<Vec<f64>> = trajs.iter().map(|t| t.states[h].clone()).collect();
        total += output_variance(&step)?.trace;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors_have_zero_variance() {
        let r = output_variance(&vec![vec![1.0, 2.0]; 5]).unwrap();
        assert_eq!(r.trace, 0.0);
    }

    #[test]
    fn two_point_scalar() {
        let r = output_variance(&[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(r.trace, 1.0);
        assert_eq!(r.mean, vec![1.0]);
    }

    #[test]
    fn too_few_or_ragged_rejected() {
        assert!(output_variance(&[vec![1.0]]).is_err());
        assert!(output_variance(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        let t = |v: Vec<f64>| Trajectory {
            states: v.into_iter().map(|x| vec![x]).collect(),
        };
        assert!(trajectory_variance(&[t(vec![0.0])]).is_err());
        assert!(trajectory_variance(&[t(vec![0.0, 1.0]), t(vec![0.0])]).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let t = |v: Vec<f64>| Trajectory {
            states: v.into_iter().map(|x| vec![x]).collect(),
        };
        assert_eq!(
            trajectory_variance(&[t(vec![0.0, 0.0]), t(vec![0.0, 2.0])]).unwrap(),
            1.0
        );
        assert_eq!(
            trajectory_variance(&[t(vec![3.0, 1.0]), t(vec![3.0, 1.0])]).unwrap(),
            0.0
        );
    }

    #[test]
    fn covariance_is_symmetric_with_matching_trace() {
        let outs: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, (i * i) as f64 * 0.1, -(i as f64)])
            .collect();
        let r = output_variance(&outs).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(r.get(a, b), r.get(b, a));
            }
        }
        assert_eq!(r.trace, r.get(0, 0) + r.get(1, 1) + r.get(2, 2));
    }
}
