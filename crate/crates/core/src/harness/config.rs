use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::{A2cConfig, DqnConfig};
use crate::diagnostics::AgentKind;
use crate::envs::GridMaze;
use crate::error::{Result, RrpError};
use crate::noise::{AnnealMode, NoiseSchedule};
use crate::studies::{MountainCarConfig, TabularConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GridMaze,
    MountainCar,
    Lemma1,
    VarianceComparison,
    Ablation,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GridMaze => "grid-maze",
            ExperimentKind::MountainCar => "mountain-car",
            ExperimentKind::Lemma1 => "lemma1",
            ExperimentKind::VarianceComparison => "variance-comparison",
            ExperimentKind::Ablation => "ablation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationAxis {
    /// Initial noise variance `σ₀²`.
    NoiseScale,
    /// Annealing fraction `λ`.
    DecayPeriod,
}

impl AblationAxis {
    pub fn name(self) -> &'static str {
        match self {
            AblationAxis::NoiseScale => "noise_scale",
            AblationAxis::DecayPeriod => "decay_period",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "noise_scale" => Ok(AblationAxis::NoiseScale),
            "decay_period" => Ok(AblationAxis::DecayPeriod),
            other => Err(RrpError::invalid(format!(
                "unknown ablation axis '{other}' (expected noise_scale or decay_period)"
            ))),
        }
    }
}

/// Noise parameters. The schedule decays `σ = sqrt(initial_variance)` to
/// `sigma_min` over `total_steps` (defaulting to the training budget).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub initial_variance: f64,
    pub sigma_min: f64,
    pub decay_fraction: f64,
    pub total_steps: Option<u64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            initial_variance: crate::noise::DEFAULT_INITIAL_VARIANCE,
            sigma_min: 0.0,
            decay_fraction: crate::noise::DEFAULT_DECAY_FRACTION,
            total_steps: None,
        }
    }
}

impl NoiseConfig {
    pub fn schedule(&self, budget: u64) -> Result<NoiseSchedule> {
        let total = self.total_steps.unwrap_or(budget);
        NoiseSchedule::new(self.initial_variance.sqrt(), self.sigma_min, total, self.decay_fraction)
    }

    fn validate(&self, errs: &mut Vec<String>) {
        if !(self.initial_variance >= 0.0 && self.initial_variance.is_finite()) {
            errs.push(format!(
                "noise.initial_variance: must be a nonnegative number, got {}",
                self.initial_variance
            ));
        }
        if !(self.sigma_min >= 0.0) {
            errs.push(format!("noise.sigma_min: must be nonnegative, got {}", self.sigma_min));
        } else if self.initial_variance >= 0.0 && self.sigma_min > self.initial_variance.sqrt() {
            errs.push(format!(
                "noise.sigma_min: {} exceeds the initial standard deviation {}",
                self.sigma_min,
                self.initial_variance.sqrt()
            ));
        }
        if !(self.decay_fraction > 0.0 && self.decay_fraction <= 1.0) {
            errs.push(format!(
                "noise.decay_fraction: must lie in (0, 1], got {}",
                self.decay_fraction
            ));
        }
        if self.total_steps == Some(0) {
            errs.push("noise.total_steps: must be at least 1".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MazeConfig {
    /// Side of the open square maze used when no layout file is given.
    pub size: usize,
    pub max_steps: usize,
    /// Text layout (`#`, `.`, `S`, `G`), one row per line.
    pub layout: Option<PathBuf>,
}

impl Default for MazeConfig {
    fn default() -> Self {
        Self {
            size: 5,
            max_steps: 100,
            layout: None,
        }
    }
}

impl MazeConfig {
    pub fn build(&self) -> Result<GridMaze> {
        match &self.layout {
            Some(path) => GridMaze::load(path, self.max_steps),
            None => GridMaze::open(self.size, self.max_steps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma1Config {
    pub layers: Vec<usize>,
    pub n: usize,
    pub batch_size: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub draws: usize,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Self {
            layers: vec![2, 8, 2],
            n: 16,
            batch_size: 4,
            alpha: 1e-3,
            sigma: 0.1,
            draws: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub n_trajs: usize,
    pub horizon: usize,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            n_trajs: 100,
            horizon: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationConfig {
    /// Experiment repeated for each value.
    pub base: ExperimentKind,
    pub axis: AblationAxis,
    pub values: Vec<f64>,
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_noise() -> Option<NoiseConfig> {
    Some(NoiseConfig::default())
}

/// One experiment, read from a JSON file. `"noise": null` selects the
/// unperturbed learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub agent: Option<AgentKind>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Environment steps of training; grid-maze counts episodes instead.
    #[serde(default)]
    pub steps: Option<u64>,
    #[serde(default = "default_noise")]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub maze: MazeConfig,
    #[serde(default)]
    pub tabular: TabularConfig,
    #[serde(default)]
    pub dqn: DqnConfig,
    #[serde(default)]
    pub a2c: A2cConfig,
    #[serde(default)]
    pub mountain_car: MountainCarConfig,
    #[serde(default)]
    pub lemma1: Lemma1Config,
    #[serde(default)]
    pub comparison: ComparisonConfig,
    #[serde(default)]
    pub ablation: Option<AblationConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            agent: None,
            seeds: default_seeds(),
            steps: None,
            noise: default_noise(),
            maze: MazeConfig::default(),
            tabular: TabularConfig::default(),
            dqn: DqnConfig::default(),
            a2c: A2cConfig::default(),
            mountain_car: MountainCarConfig::default(),
            lemma1: Lemma1Config::default(),
            comparison: ComparisonConfig::default(),
            ablation: None,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RrpError::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RrpError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// The experiment actually run per value: the ablation base, or the kind itself.
    pub fn base_kind(&self) -> ExperimentKind {
        match (&self.experiment, &self.ablation) {
            (ExperimentKind::Ablation, Some(a)) => a.base,
            (kind, _) => *kind,
        }
    }

    pub fn agent_kind(&self) -> AgentKind {
        self.agent.unwrap_or(match self.base_kind() {
            ExperimentKind::GridMaze => AgentKind::Tabular,
            _ => AgentKind::Dqn,
        })
    }

    /// Training budget in environment steps.
    pub fn step_budget(&self) -> u64 {
        match self.base_kind() {
            ExperimentKind::GridMaze => self
                .steps
                .unwrap_or((self.tabular.episodes * self.maze.max_steps) as u64),
            ExperimentKind::MountainCar => self.steps.unwrap_or(20_000),
            ExperimentKind::VarianceComparison => self.steps.unwrap_or(6_000),
            _ => self.steps.unwrap_or(1),
        }
    }

    /// The noise schedule, or `None` for the unperturbed learner.
    pub fn schedule(&self) -> Result<Option<NoiseSchedule>> {
        self.noise.as_ref().map(|n| n.schedule(self.step_budget())).transpose()
    }

    pub fn set_anneal_mode(&mut self, mode: AnnealMode) {
        self.dqn.anneal_mode = mode;
        self.mountain_car.dqn.anneal_mode = mode;
    }

    /// Applies one ablation value, switching noise on if it was off.
    pub fn with_axis_value(&self, axis: AblationAxis, value: f64) -> Self {
        let mut cfg = self.clone();
        let noise = cfg.noise.get_or_insert_with(NoiseConfig::default);
        match axis {
            AblationAxis::NoiseScale => {
                noise.initial_variance = value;
                noise.sigma_min = noise.sigma_min.min(value.max(0.0).sqrt());
                cfg.lemma1.sigma = value.max(0.0).sqrt();
            }
            AblationAxis::DecayPeriod => noise.decay_fraction = value,
        }
        cfg.experiment = cfg.base_kind();
        cfg.ablation = None;
        cfg
    }

    /// Every violated constraint, one message per field.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.seeds.is_empty() {
            errs.push("seeds: at least one seed is required".into());
        }
        let unique: BTreeSet<_> = self.seeds.iter().collect();
        if unique.len() != self.seeds.len() {
            errs.push("seeds: duplicate seeds".into());
        }
        if self.steps == Some(0) {
            errs.push("steps: must be at least 1".into());
        }
        if let Some(noise) = &self.noise {
            noise.validate(&mut errs);
        }
        let kind = self.base_kind();
        let agent = self.agent_kind();
        match kind {
            ExperimentKind::GridMaze => {
                if agent != AgentKind::Tabular {
                    errs.push("agent: grid-maze runs the tabular agent".into());
                }
                errs.extend(self.tabular.validate());
                self.validate_maze(&mut errs);
            }
            ExperimentKind::MountainCar => {
                if agent != AgentKind::Dqn {
                    errs.push("agent: mountain-car runs the dqn agent".into());
                }
                errs.extend(self.mountain_car.validate());
            }
            ExperimentKind::VarianceComparison => {
                match agent {
                    AgentKind::Dqn => errs.extend(self.dqn.validate()),
                    AgentKind::A2c => errs.extend(self.a2c.validate()),
                    AgentKind::Tabular => errs.push("agent: variance-comparison runs dqn or a2c".into()),
                }
                if self.seeds.len() < 5 {
                    errs.push(format!(
                        "seeds: variance-comparison needs at least 5, got {}",
                        self.seeds.len()
                    ));
                }
                if self.comparison.n_trajs < 2 {
                    errs.push("comparison.n_trajs: must be at least 2".into());
                }
                if self.comparison.horizon == 0 {
                    errs.push("comparison.horizon: must be at least 1".into());
                }
                self.validate_maze(&mut errs);
            }
            ExperimentKind::Lemma1 => {
                let l = &self.lemma1;
                if l.layers.len() < 2 || l.layers.contains(&0) {
                    errs.push("lemma1.layers: need at least two positive widths".into());
                }
                if l.n < 2 {
                    errs.push("lemma1.n: must be at least 2".into());
                }
                if l.batch_size == 0 || l.batch_size > l.n {
                    errs.push(format!("lemma1.batch_size: must lie in [1, n], got {}", l.batch_size));
                }
                if !(l.alpha > 0.0) {
                    errs.push(format!("lemma1.alpha: must be positive, got {}", l.alpha));
                }
                if !(l.sigma >= 0.0) {
                    errs.push(format!("lemma1.sigma: must be nonnegative, got {}", l.sigma));
                }
                if l.draws < 2 {
                    errs.push("lemma1.draws: must be at least 2".into());
                }
            }
            ExperimentKind::Ablation => errs.push("ablation.base: must name a concrete experiment".into()),
        }
        match (&self.experiment, &self.ablation) {
            (ExperimentKind::Ablation, None) => errs.push("ablation: required for the ablation experiment".into()),
            (_, Some(a)) => {
                if a.values.is_empty() {
                    errs.push("ablation.values: at least one value is required".into());
                }
                for v in &a.values {
                    let ok = match a.axis {
                        AblationAxis::NoiseScale => *v >= 0.0 && v.is_finite(),
                        AblationAxis::DecayPeriod => *v > 0.0 && *v <= 1.0,
                    };
                    if !ok {
                        errs.push(format!("ablation.values: {v} is out of range for {}", a.axis.name()));
                    }
                }
            }
            _ => {}
        }
        errs
    }

    fn validate_maze(&self, errs: &mut Vec<String>) {
        if let Err(e) = self.maze.build() {
            errs.push(format!("maze: {e}"));
        }
    }

    pub fn check(&self) -> Result<()> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(RrpError::Validation(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "grid-maze"}"#).unwrap();
        assert_eq!(cfg.seeds.len(), 10);
        assert_eq!(cfg.agent_kind(), AgentKind::Tabular);
        assert!(cfg.validate().is_empty());
        let s = cfg.schedule().unwrap().unwrap();
        assert_eq!(s.sigma_max(), 1.0);
        assert_eq!(s.decay_fraction(), 0.3);
        assert_eq!(s.total_steps(), 20_000);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": "lemma1", "sigma": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "lemma1", "lemma1": {"sgima": 1}}"#).is_err());
    }

    #[test]
    fn null_noise_is_vanilla() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "grid-maze", "noise": null}"#).unwrap();
        assert!(cfg.schedule().unwrap().is_none());
    }

    #[test]
    fn validation_lists_every_field() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "lemma1", "seeds": [], "noise": {"decay_fraction": 2.0},
                "lemma1": {"n": 1, "alpha": 0}}"#,
        )
        .unwrap();
        let errs = cfg.validate();
        for field in [
            "seeds",
            "noise.decay_fraction",
            "lemma1.n",
            "lemma1.alpha",
            "lemma1.batch_size",
        ] {
            assert!(
                errs.iter().any(|e| e.starts_with(field)),
                "{field} missing from {errs:?}"
            );
        }
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::new(ExperimentKind::Lemma1);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.lemma1.sigma = 0.2;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn axis_values_apply() {
        let base = ExperimentConfig::from_json(r#"{"experiment": "grid-maze", "noise": null}"#).unwrap();
        let c = base.with_axis_value(AblationAxis::NoiseScale, 1.5);
        assert_eq!(c.noise.unwrap().initial_variance, 1.5);
        let d = base.with_axis_value(AblationAxis::DecayPeriod, 0.1);
        assert_eq!(d.noise.unwrap().decay_fraction, 0.1);
    }
}
