//! Experiment configuration, seeded orchestration, and CSV/manifest output.

pub mod compare;
pub mod config;
pub mod output;
pub mod run;

pub use compare::{compare_runs, load_summary, parse_summary, verdicts_csv, MetricVerdict, SummaryTable};
pub use config::{AblationAxis, AblationConfig, ExperimentConfig, ExperimentKind, NoiseConfig};
pub use output::{Csv, OutputSet, BUILD_ID};
pub use run::{run_ablation, run_experiment, run_seeds, summary_csv, ExperimentOutput, SeedOutput};
