use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rrp_core::harness::{
    compare_runs, load_summary, run_ablation, run_experiment, verdicts_csv, AblationAxis, ExperimentConfig,
    ExperimentKind, ExperimentOutput,
};
use rrp_core::{AnnealMode, RrpError};

#[derive(Parser)]
#[command(name = "rrp", version, about = "Random reward perturbation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Added to every configured seed.
    #[arg(long, default_value_t = 0)]
    seed_offset: u64,
    /// Output directory (default: config's output_dir, then $RRP_OUT_DIR, then ./rrp-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Clip annealed replay noise at zero instead of scaling it.
    #[arg(long)]
    literal_anneal: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSVs and manifest.
    Run(Common),
    /// Sweep one noise parameter over several values.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Check the one-step output-variance increase on the configured problem.
    VerifyLemma1 {
        #[arg(long)]
        config: PathBuf,
    },
    /// Paired comparison of two summary.csv files (first minus second).
    Compare { rrp: PathBuf, baseline: PathBuf },
}

fn load(common: &Common) -> rrp_core::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if common.seed_offset > 0 {
        for s in &mut cfg.seeds {
            *s = s
                .checked_add(common.seed_offset)
                .ok_or_else(|| RrpError::InvalidArgument("seed offset overflows".into()))?;
        }
    }
    if common.literal_anneal {
        cfg.set_anneal_mode(AnnealMode::Literal);
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os("RRP_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("rrp-out"))
}

fn write(out: &ExperimentOutput, dir: &Path) -> rrp_core::Result<()> {
    let paths = out.files.commit(dir)?;
    println!("wrote {} files to {}", paths.len(), dir.display());
    Ok(())
}

fn verify_lemma1(path: &Path) -> rrp_core::Result<()> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.experiment = ExperimentKind::Lemma1;
    cfg.ablation = None;
    let out = run_experiment(&cfg)?;
    println!("seed,empirical,stderr,analytic,gap,per_sample,per_sample_gap,drift,drift_stderr");
    for s in &out.seeds {
        let m = |k: &str| s.metrics.iter().find(|(n, _)| n == k).map_or(f64::NAN, |(_, v)| *v);
        println!(
            "{},{:.6e},{:.2e},{:.6e},{:.4},{:.6e},{:.4},{:.3e},{:.3e}",
            s.seed,
            m("empirical_increment"),
            m("increment_stderr"),
            m("analytic_increment"),
            m("relative_gap"),
            m("per_sample_increment"),
            m("per_sample_relative_gap"),
            m("mean_drift"),
            m("drift_stderr"),
        );
        let drift_ok = m("mean_drift") <= 3.0 * m("drift_stderr");
        println!(
            "  factored form within 5%: {}; per-sample form within 5%: {}; drift within 3 s.e.: {}",
            m("relative_gap") < 0.05,
            m("per_sample_relative_gap") < 0.05,
            drift_ok
        );
    }
    Ok(())
}

fn dispatch(cli: Cli) -> rrp_core::Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = load(&common)?;
            let out = run_experiment(&cfg)?;
            write(&out, &out_dir(&common, &cfg))
        }
        Command::Ablate { common, axis, values } => {
            let cfg = load(&common)?;
            let axis = AblationAxis::parse(&axis)?;
            let out = run_ablation(&cfg, axis, &values)?;
            write(&out, &out_dir(&common, &cfg))
        }
        Command::VerifyLemma1 { config } => verify_lemma1(&config),
        Command::Compare { rrp, baseline } => {
            let verdicts = compare_runs(&load_summary(&rrp)?, &load_summary(&baseline)?)?;
            print!("{}", verdicts_csv(&verdicts));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                RrpError::Validation(_) | RrpError::Parse(_) | RrpError::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
