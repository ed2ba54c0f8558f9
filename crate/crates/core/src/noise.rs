//! Gaussian reward noise and its two annealing mechanisms.
//!
//! Off-policy learners draw noise once at the initial scale, store it with the
//! transition, and shrink it when the transition is replayed
//! ([`anneal_stored_noise`]). On-policy learners draw noise directly at the
//! current scale ([`NoiseSchedule::interaction_sigma`]).

use serde::{Deserialize, Serialize};

use crate::error::{Result, RrpError};
use crate::rng::SeededRng;

/// Default initial noise variance.
pub const DEFAULT_INITIAL_VARIANCE: f64 = 1.0;
/// Default fraction of training over which stored noise is annealed.
pub const DEFAULT_DECAY_FRACTION: f64 = 0.3;

/// Linear decay of the noise standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    sigma_max: f64,
    sigma_min: f64,
    total_steps: u64,
    decay_fraction: f64,
}

impl NoiseSchedule {
    pub fn new(sigma_max: f64, sigma_min: f64, total_steps: u64, decay_fraction: f64) -> Result<Self> {
        if !(sigma_min >= 0.0 && sigma_max >= sigma_min && sigma_max.is_finite()) {
            return Err(RrpError::invalid(format!(
                "schedule requires sigma_max >= sigma_min >= 0, got sigma_max={sigma_max}, sigma_min={sigma_min}"
            )));
        }
        if !(decay_fraction > 0.0 && decay_fraction <= 1.0) {
            return Err(RrpError::invalid(format!(
                "decay_fraction must lie in (0, 1], got {decay_fraction}"
            )));
        }
        if total_steps == 0 {
            return Err(RrpError::invalid("total_steps must be at least 1"));
        }
        Ok(Self {
            sigma_max,
            sigma_min,
            total_steps,
            decay_fraction,
        })
    }

    /// Schedule that never perturbs rewards.
    pub fn zero(total_steps: u64) -> Self {
        Self {
            sigma_max: 0.0,
            sigma_min: 0.0,
            total_steps: total_steps.max(1),
            decay_fraction: 1.0,
        }
    }

    /// Builds a schedule from an initial variance, annealed to zero.
    pub fn from_variance(initial_variance: f64, total_steps: u64, decay_fraction: f64) -> Result<Self> {
        if !(initial_variance >= 0.0) {
            return Err(RrpError::invalid(format!(
                "initial variance must be nonnegative, got {initial_variance}"
            )));
        }
        Self::new(initial_variance.sqrt(), 0.0, total_steps, decay_fraction)
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn decay_fraction(&self) -> f64 {
        self.decay_fraction
    }

    /// Number of steps `λT` after which stored noise is fully annealed.
    pub fn annealing_horizon(&self) -> f64 {
        self.decay_fraction * self.total_steps as f64
    }

    pub fn is_zero(&self) -> bool {
        self.sigma_max == 0.0
    }

    /// `max{0, σ_max − (σ_max − σ_min)·t/T}`. The floor is 0, not `σ_min`.
    pub fn sigma_at(&self, t: u64) -> f64 {
        let frac = t as f64 / self.total_steps as f64;
        (self.sigma_max - (self.sigma_max - self.sigma_min) * frac).max(0.0)
    }

    /// Scale used when noise is drawn at interaction time: the same linear
    /// decay compressed onto the annealing horizon `λT`.
    pub fn interaction_sigma(&self, t: u64) -> f64 {
        let frac = t as f64 / self.annealing_horizon();
        (self.sigma_max - (self.sigma_max - self.sigma_min) * frac).max(0.0)
    }
}

/// How stored noise is shrunk at replay time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnealMode {
    /// `ε · max{0, 1 − t/λT}`: keeps the sign, so the mean stays zero.
    #[default]
    SignPreserving,
    /// `max{0, ε − ε·t/λT}`: clips negative noise to zero.
    Literal,
}

/// Draws from `N(0, sigma²)`.
pub fn sample_gaussian(rng: &mut SeededRng, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(RrpError::invalid(format!("sigma must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    Ok(sigma * rng.standard_normal())
}

/// Sign-preserving decay of a noise value drawn at the initial scale.
pub fn anneal_stored_noise(epsilon: f64, t: u64, schedule: &NoiseSchedule) -> f64 {
    anneal_stored_noise_with(AnnealMode::SignPreserving, epsilon, t, schedule)
}

pub fn anneal_stored_noise_with(mode: AnnealMode, epsilon: f64, t: u64, schedule: &NoiseSchedule) -> f64 {
    let frac = t as f64 / schedule.annealing_horizon();
    match mode {
        AnnealMode::SignPreserving => epsilon * (1.0 - frac).max(0.0),
        AnnealMode::Literal => (epsilon - epsilon * frac).max(0.0),
    }
}

pub fn perturb_reward(r_env: f64, epsilon: f64) -> f64 {
    r_env + epsilon
}
