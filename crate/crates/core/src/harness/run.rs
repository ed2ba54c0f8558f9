use rayon::prelude::*;

use crate::diagnostics::{lemma1::synthetic_problem, lemma1_oracle, variance_comparison, ComparisonSetup};
use crate::error::{Result, RrpError};
use crate::harness::config::{AblationAxis, ExperimentConfig, ExperimentKind};
use crate::harness::output::{num, Csv, OutputSet};
use crate::noise::NoiseSchedule;
use crate::rng::SeededRng;
use crate::studies::{run_grid_maze, run_mountain_car};

/// Results of one seed before they are written out.
#[derive(Debug, Clone, Default)]
pub struct SeedOutput {
    pub seed: u64,
    /// Wide-format per-run table.
    pub run_csv: String,
    /// Additional per-seed files, by name.
    pub extras: Vec<(String, String)>,
    /// Scalar metrics for the summary.
    pub metrics: Vec<(String, f64)>,
    /// `(step, metric, value)` records for long-format tables.
    pub records: Vec<(u64, String, f64)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config_hash: String,
    pub seeds: Vec<SeedOutput>,
    pub files: OutputSet,
}

impl ExperimentOutput {
    pub fn metric(&self, name: &str) -> Vec<f64> {
        self.seeds
            .iter()
            .filter_map(|s| s.metrics.iter().find(|(m, _)| m == name).map(|(_, v)| *v))
            .collect()
    }
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

fn grid_seed(cfg: &ExperimentConfig, schedule: Option<&NoiseSchedule>, seed: u64) -> Result<SeedOutput> {
    let maze = cfg.maze.build()?;
    let run = run_grid_maze(&maze, &cfg.tabular, schedule, seed)?;
    let mut csv = Csv::new(&[
        "seed",
        "episode",
        "step",
        "length",
        "return",
        "sigma",
        "greedy_entropy",
        "reached_goal",
    ]);
    let mut records = Vec::new();
    for e in &run.episodes {
        csv.row(&[
            seed.to_string(),
            e.episode.to_string(),
            e.step.to_string(),
            e.length.to_string(),
            num(e.episode_return),
            num(e.sigma),
            num(e.greedy_entropy),
            flag(e.reached_goal),
        ]);
        records.push((e.step, "return".to_string(), e.episode_return));
        records.push((e.step, "greedy_entropy".to_string(), e.greedy_entropy));
        records.push((e.step, "sigma".to_string(), e.sigma));
    }
    let mut greedy = Csv::new(&["seed", "episode", "row", "col", "action"]);
    for snap in &run.snapshots {
        for &(cell, action) in &snap.actions {
            let (r, c) = maze.cell(cell);
            greedy.row(&[
                seed.to_string(),
                snap.episode.to_string(),
                r.to_string(),
                c.to_string(),
                action.to_string(),
            ]);
        }
    }
    let n = run.episodes.len().max(1) as f64;
    let metrics = vec![
        ("mean_snapshot_entropy".to_string(), run.mean_snapshot_entropy()),
        (
            "final_greedy_entropy".to_string(),
            run.episodes.last().map_or(0.0, |e| e.greedy_entropy),
        ),
        ("goal_reaches".to_string(), run.goal_reaches() as f64),
        (
            "mean_return".to_string(),
            run.episodes.iter().map(|e| e.episode_return).sum::<f64>() / n,
        ),
    ];
    Ok(SeedOutput {
        seed,
        run_csv: csv.into_string(),
        extras: vec![(format!("greedy_{seed}.csv"), greedy.into_string())],
        metrics,
        records,
    })
}

fn mountain_car_seed(cfg: &ExperimentConfig, schedule: Option<&NoiseSchedule>, seed: u64) -> Result<SeedOutput> {
    let run = run_mountain_car(&cfg.mountain_car, schedule, cfg.step_budget(), seed)?;
    let mut csv = Csv::new(&[
        "seed",
        "episode",
        "step",
        "length",
        "return",
        "sigma",
        "max_position",
        "reached_goal",
    ]);
    let mut records = Vec::new();
    for e in &run.episodes {
        csv.row(&[
            seed.to_string(),
            e.episode.to_string(),
            e.step.to_string(),
            e.length.to_string(),
            num(e.episode_return),
            num(e.sigma),
            num(e.max_position),
            flag(e.reached_goal),
        ]);
        records.push((e.step, "return".to_string(), e.episode_return));
        records.push((e.step, "max_position".to_string(), e.max_position));
        records.push((e.step, "sigma".to_string(), e.sigma));
    }
    let mut windows = Csv::new(&[
        "seed",
        "window",
        "min_position",
        "max_position",
        "range",
        "bandwidth",
        "fallback",
    ]);
    let mut density = Csv::new(&["seed", "window", "position", "density"]);
    for w in &run.windows {
        windows.row(&[
            seed.to_string(),
            w.index.to_string(),
            num(w.min_position),
            num(w.max_position),
            num(w.range()),
            num(w.density.bandwidth),
            flag(w.density.fallback),
        ]);
        for (p, d) in w.density.points.iter().zip(&w.density.density) {
            density.row(&[seed.to_string(), w.index.to_string(), num(*p), num(*d)]);
        }
    }
    let n = run.episodes.len().max(1) as f64;
    let metrics = vec![
        ("goal_reaches".to_string(), run.goal_reaches as f64),
        ("max_position".to_string(), run.max_position),
        (
            "coverage_monotone".to_string(),
            if run.coverage_monotone() { 1.0 } else { 0.0 },
        ),
        (
            "mean_return".to_string(),
            run.episodes.iter().map(|e| e.episode_return).sum::<f64>() / n,
        ),
    ];
    Ok(SeedOutput {
        seed,
        run_csv: csv.into_string(),
        extras: vec![
            (format!("windows_{seed}.csv"), windows.into_string()),
            (format!("density_{seed}.csv"), density.into_string()),
        ],
        metrics,
        records,
    })
}

fn lemma1_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedOutput> {
    let l = &cfg.lemma1;
    let mut rng = SeededRng::new(seed);
    let (net, data, minibatch) = synthetic_problem(&l.layers, l.n, l.batch_size, &mut rng)?;
    let r = lemma1_oracle(&net, &data, &minibatch, l.alpha, l.sigma, l.draws, &mut rng)?;
    let gap = |v: f64| if r.trivial || !v.is_finite() { 0.0 } else { v };
    let metrics: Vec<(String, f64)> = vec![
        ("trace_clean", r.trace_clean),
        ("trace_noisy_mean", r.trace_noisy_mean),
        ("empirical_increment", r.empirical_increment),
        ("increment_stderr", r.increment_stderr),
        ("analytic_increment", r.analytic_increment),
        ("per_sample_increment", r.per_sample_increment),
        ("relative_gap", gap(r.relative_gap())),
        ("per_sample_relative_gap", gap(r.per_sample_relative_gap())),
        ("mean_drift", r.mean_drift),
        ("drift_stderr", r.drift_stderr),
        ("trivial", if r.trivial { 1.0 } else { 0.0 }),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let mut header = vec!["seed"];
    header.extend(metrics.iter().map(|(k, _)| k.as_str()));
    let mut csv = Csv::new(&header);
    let mut row = vec![seed.to_string()];
    row.extend(metrics.iter().map(|(_, v)| num(*v)));
    csv.row(&row);
    let records = metrics.iter().map(|(k, v)| (0, k.clone(), *v)).collect();
    Ok(SeedOutput {
        seed,
        run_csv: csv.into_string(),
        extras: Vec::new(),
        metrics,
        records,
    })
}

fn comparison_seeds(cfg: &ExperimentConfig, schedule: Option<&NoiseSchedule>) -> Result<Vec<SeedOutput>> {
    let env = cfg.maze.build()?;
    let budget = cfg.step_budget();
    let zero = NoiseSchedule::zero(budget);
    let setup = ComparisonSetup {
        kind: cfg.agent_kind(),
        dqn: cfg.dqn.clone(),
        a2c: cfg.a2c.clone(),
        train_steps: budget,
        n_trajs: cfg.comparison.n_trajs,
        horizon: cfg.comparison.horizon,
    };
    let pairs = variance_comparison(&setup, &env, schedule.unwrap_or(&zero), &zero, &cfg.seeds)?;
    Ok(pairs
        .into_iter()
        .map(|p| {
            let mut csv = Csv::new(&["seed", "train_steps", "v_rrp", "v_vanilla"]);
            csv.row(&[p.seed.to_string(), budget.to_string(), num(p.rrp), num(p.vanilla)]);
            let metrics = vec![
                ("v_rrp".to_string(), p.rrp),
                ("v_vanilla".to_string(), p.vanilla),
                ("v_difference".to_string(), p.rrp - p.vanilla),
            ];
            let records = metrics.iter().map(|(k, v)| (budget, k.clone(), *v)).collect();
            SeedOutput {
                seed: p.seed,
                run_csv: csv.into_string(),
                extras: Vec::new(),
                metrics,
                records,
            }
        })
        .collect())
}

/// Runs every seed of a concrete (non-ablation) experiment in memory.
pub fn run_seeds(cfg: &ExperimentConfig) -> Result<Vec<SeedOutput>> {
    cfg.check()?;
    let schedule = cfg.schedule()?;
    let schedule = schedule.as_ref();
    match cfg.base_kind() {
        ExperimentKind::VarianceComparison => comparison_seeds(cfg, schedule),
        ExperimentKind::Ablation => Err(RrpError::invalid("ablation configs are run with run_ablation")),
        kind => cfg
            .seeds
            .par_iter()
            .map(|&seed| match kind {
                ExperimentKind::GridMaze => grid_seed(cfg, schedule, seed),
                ExperimentKind::MountainCar => mountain_car_seed(cfg, schedule, seed),
                _ => lemma1_seed(cfg, seed),
            })
            .collect(),
    }
}

/// Sample standard deviation (0 for a single value).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `metric,seed,value` rows per seed, then `mean` and `std` rows per metric.
pub fn summary_csv(seeds: &[SeedOutput]) -> String {
    let mut csv = Csv::new(&["metric", "seed", "value"]);
    let Some(first) = seeds.first() else {
        return csv.into_string();
    };
    for (name, _) in &first.metrics {
        let mut values = Vec::with_capacity(seeds.len());
        for s in seeds {
            if let Some((_, v)) = s.metrics.iter().find(|(m, _)| m == name) {
                csv.row(&[name.clone(), s.seed.to_string(), num(*v)]);
                values.push(*v);
            }
        }
        let (mean, std) = mean_std(&values);
        csv.row(&[name.clone(), "mean".into(), num(mean)]);
        csv.row(&[name.clone(), "std".into(), num(std)]);
    }
    csv.into_string()
}

/// Runs a configuration and assembles (but does not write) its files:
/// `run_<seed>.csv`, per-seed extras, `summary.csv`, and `manifest.txt`.
/// Ablation configs produce the long-format table instead.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.check()?;
    if let (ExperimentKind::Ablation, Some(ab)) = (cfg.experiment, &cfg.ablation) {
        return run_ablation(cfg, ab.axis, &ab.values);
    }
    let seeds = run_seeds(cfg)?;
    let mut files = OutputSet::new();
    for s in &seeds {
        files.add(format!("run_{}.csv", s.seed), s.run_csv.clone());
    }
    for s in &seeds {
        for (name, contents) in &s.extras {
            files.add(name.clone(), contents.clone());
        }
    }
    files.add("summary.csv", summary_csv(&seeds));
    let config_hash = cfg.hash();
    files.add_manifest(cfg.experiment.name(), &config_hash, &cfg.seeds);
    Ok(ExperimentOutput {
        config_hash,
        seeds,
        files,
    })
}

/// Repeats the base experiment once per axis value and collects every
/// record into `ablation_<axis>.csv` with columns
/// `axis_value,seed,step,metric,value`.
pub fn run_ablation(base: &ExperimentConfig, axis: AblationAxis, values: &[f64]) -> Result<ExperimentOutput> {
    if values.is_empty() {
        return Err(RrpError::invalid("ablation needs at least one value"));
    }
    let configs: Vec<ExperimentConfig> = values.iter().map(|&v| base.with_axis_value(axis, v)).collect();
    let mut errs = Vec::new();
    for (cfg, v) in configs.iter().zip(values) {
        errs.extend(cfg.validate().into_iter().map(|e| format!("{}={v}: {e}", axis.name())));
    }
    if !errs.is_empty() {
        return Err(RrpError::Validation(errs));
    }
    let mut csv = Csv::new(&["axis_value", "seed", "step", "metric", "value"]);
    let mut all = Vec::new();
    for (cfg, &v) in configs.iter().zip(values) {
        let seeds = run_seeds(cfg)?;
        for s in &seeds {
            for (step, metric, value) in &s.records {
                csv.row(&[
                    num(v),
                    s.seed.to_string(),
                    step.to_string(),
                    metric.clone(),
                    num(*value),
                ]);
            }
        }
        all.extend(seeds);
    }
    let mut files = OutputSet::new();
    files.add(format!("ablation_{}.csv", axis.name()), csv.into_string());
    let mut keyed = base.clone();
    keyed.experiment = ExperimentKind::Ablation;
    keyed.ablation = Some(crate::harness::config::AblationConfig {
        base: base.base_kind(),
        axis,
        values: values.to_vec(),
    });
    let config_hash = keyed.hash();
    files.add_manifest("ablation", &config_hash, &base.seeds);
    Ok(ExperimentOutput {
        config_hash,
        seeds: all,
        files,
    })
}
