use crate::error::{Result, RrpError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule `1.06·σ̂·n^(−1/5)`.
    Auto,
    Fixed(f64),
}

/// Gaussian KDE evaluated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub points: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// The automatic bandwidth collapsed and a fixed fallback was used.
    pub fallback: bool,
    pub window: usize,
}

impl DensityGrid {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.points, &self.density)
    }

    /// Width of the region where the density exceeds `fraction` of its peak.
    pub fn support_width(&self, fraction: f64) -> f64 {
        let peak = self.density.iter().copied().fold(0.0, f64::max);
        let cut = fraction * peak;
        let above: Vec<f64> = self
            .points
            .iter()
            .zip(&self.density)
            .filter(|(_, d)| **d > cut)
            .map(|(p, _)| *p)
            .collect();
        match (above.first(), above.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Gaussian-kernel density of `samples` at each grid point.
///
/// When the automatic bandwidth is zero (all samples equal) the bandwidth
/// falls back to `10⁻³` of the grid span and the result is flagged.
pub fn kde_density(samples: &[f64], grid: &[f64], bandwidth: Bandwidth) -> Result<DensityGrid> {
    if samples.len() < 2 {
        return Err(RrpError::invalid(format!(
            "KDE needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if grid.is_empty() {
        return Err(RrpError::invalid("KDE grid is empty"));
    }
    let n = samples.len() as f64;
    let (h, fallback) = match bandwidth {
        Bandwidth::Fixed(h) if h > 0.0 => (h, false),
        Bandwidth::Fixed(h) => return Err(RrpError::invalid(format!("bandwidth must be positive, got {h}"))),
        Bandwidth::Auto => {
            let mean = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let h = 1.06 * var.sqrt() * n.powf(-0.2);
            if h > 0.0 {
                (h, false)
            } else {
                let span = grid.last().unwrap() - grid.first().unwrap();
                (1e-3 * if span > 0.0 { span.abs() } else { 1.0 }, true)
            }
        }
    };
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    let density = grid
        .iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&s| {
                    let z = (x - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();
    Ok(DensityGrid {
        points: grid.to_vec(),
        density,
        bandwidth: h,
        fallback,
        window: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn coincident_samples_give_single_bump() {
        let grid = linspace(-1.0, 1.0, 201);
        let d = kde_density(&[0.2; 5], &grid, Bandwidth::Fixed(0.1)).unwrap();
        for (x, v) in grid.iter().zip(&d.density) {
            let z = (x - 0.2) / 0.1;
            let want = (-0.5 * z * z).exp() / (0.1 * (2.0 * std::f64::consts::PI).sqrt());
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_falls_back() {
        let grid = linspace(-1.2, 0.6, 181);
        let d = kde_density(&[0.0, 0.0, 0.0], &grid, Bandwidth::Auto).unwrap();
        assert!(d.fallback);
        assert!((d.bandwidth - 1.8e-3).abs() < 1e-15);
    }

    #[test]
    fn uniform_samples_integrate_to_one() {
        let mut rng = SeededRng::new(10);
        let samples: Vec<f64> = (0..2000).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let grid = linspace(-3.0, 3.0, 1201);
        let d = kde_density(&samples, &grid, Bandwidth::Auto).unwrap();
        assert!((d.integral() - 1.0).abs() < 0.01);
        assert!(d.density.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn two_clusters_are_bimodal() {
        let mut rng = SeededRng::new(11);
        let mut samples: Vec<f64> = (0..300).map(|_| -0.8 + 0.05 * rng.standard_normal()).collect();
        samples.extend((0..300).map(|_| 0.3 + 0.05 * rng.standard_normal()));
        let grid = linspace(-1.5, 1.0, 2501);
        let d = kde_density(&samples, &grid, Bandwidth::Fixed(0.05)).unwrap();
        let mode_in = |lo: f64, hi: f64| {
            let (i, _) = grid
                .iter()
                .enumerate()
                .filter(|(_, x)| (lo..hi).contains(*x))
                .max_by(|a, b| d.density[a.0].partial_cmp(&d.density[b.0]).unwrap())
                .unwrap();
            grid[i]
        };
        assert!((mode_in(-1.5, -0.25) - -0.8).abs() < 0.05);
        assert!((mode_in(-0.25, 1.0) - 0.3).abs() < 0.05);
        let mid = d.density[grid.iter().position(|&x| (x - -0.25).abs() < 1e-9).unwrap()];
        assert!(mid < 0.01 * d.density.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn shift_equivariance() {
        let samples = [0.1, -0.4, 0.35, 0.0, 0.2];
        let grid = linspace(-1.0, 1.0, 41);
        let d = kde_density(&samples, &grid, Bandwidth::Fixed(0.2)).unwrap();
        let c = 0.75;
        let shifted: Vec<f64> = samples.iter().map(|s| s + c).collect();
        let grid2: Vec<f64> = grid.iter().map(|x| x + c).collect();
        let d2 = kde_density(&shifted, &grid2, Bandwidth::Fixed(0.2)).unwrap();
        for (a, b) in d.density.iter().zip(&d2.density) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn argument_checks() {
        assert!(kde_density(&[1.0], &[0.0], Bandwidth::Auto).is_err());
        assert!(kde_density(&[1.0, 2.0], &[], Bandwidth::Auto).is_err());
        assert!(kde_density(&[1.0, 2.0], &[0.0], Bandwidth::Fixed(0.0)).is_err());
    }
}
