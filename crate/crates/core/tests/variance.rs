//! Output and trajectory variance against pairwise brute force, and the
//! covariance PSD property via a full eigendecomposition.

use nalgebra::DMatrix;
use rrp_core::agents::Trajectory;
use rrp_core::diagnostics::{output_variance, trajectory_variance};
use rrp_core::SeededRng;

// Tr(C) = (1/2N²) Σ_i Σ_j ‖f_i − f_j‖², independent of the mean
fn pairwise_trace(points: &[Vec<f64>]) -> f64 {
    let n = points.len() as f64;
    let mut s = 0.0;
    for a in points {
        for b in points {
            s += a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        }
    }
    s / (2.0 * n * n)
}

fn random_points(n: usize, m: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let scale = rng.uniform_range(0.1, 10.0);
    let shift = rng.uniform_range(-5.0, 5.0);
    (0..n)
        .map(|_| (0..m).map(|_| shift + scale * rng.standard_normal()).collect())
        .collect()
}

#[test]
fn output_variance_matches_pairwise_form() {
    let mut rng = SeededRng::new(1);
    for _ in 0..100 {
        let n = 2 + rng.below(99);
        let m = 1 + rng.below(6);
        let pts = random_points(n, m, &mut rng);
        let got = output_variance(&pts).unwrap();
        let want = pairwise_trace(&pts);
        assert!(
            (got.trace - want).abs() <= 1e-10 * want.abs(),
            "{} vs {want}",
            got.trace
        );
        let diag: f64 = (0..m).map(|k| got.get(k, k)).sum();
        assert!((diag - got.trace).abs() <= 1e-12 * got.trace.abs().max(1.0));
    }
}

#[test]
fn trajectory_variance_matches_double_loop() {
    let mut rng = SeededRng::new(2);
    for _ in 0..100 {
        let n = 2 + rng.below(30);
        let len = 1 + rng.below(20);
        let m = 1 + rng.below(3);
        let trajs: Vec<Trajectory> = (0..n)
            .map(|_| Trajectory {
                states: random_points(len, m, &mut rng),
            })
            .collect();
        let got = trajectory_variance(&trajs).unwrap();
        let want: f64 = (0..len)
            .map(|h| {
                let step: Vec<Vec<f64>> = trajs.iter().map(|t| t.states[h].clone()).collect();
                pairwise_trace(&step)
            })
            .sum();
        assert!((got - want).abs() <= 1e-10 * want.abs(), "{got} vs {want}");
    }
}

#[test]
fn covariance_is_positive_semidefinite() {
    let mut rng = SeededRng::new(3);
    for _ in 0..100 {
        let n = 2 + rng.below(20);
        let m = 1 + rng.below(6);
        let r = output_variance(&random_points(n, m, &mut rng)).unwrap();
        let c = DMatrix::from_fn(m, m, |i, j| r.get(i, j));
        assert!((&c - c.transpose()).abs().max() <= 1e-12 * r.trace.max(1.0));
        let min_eig = c.symmetric_eigen().eigenvalues.min();
        assert!(
            min_eig >= -1e-10 * r.trace,
            "eigenvalue {min_eig} with trace {}",
            r.trace
        );
        assert!(r.gershgorin_lower_bound() <= min_eig + 1e-9 * r.trace.max(1.0));
    }
}
