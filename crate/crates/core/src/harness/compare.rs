use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Result, RrpError};
use crate::harness::output::{num, Csv};
use crate::rng::SeededRng;

pub const BOOTSTRAP_RESAMPLES: usize = 10_000;

/// Per-seed values of one summary file: metric → seed → value.
pub type SummaryTable = BTreeMap<String, BTreeMap<u64, f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricVerdict {
    pub metric: String,
    pub n_seeds: usize,
    /// Fraction of seeds where the first summary strictly exceeds the second.
    pub fraction_wins: f64,
    pub mean_difference: f64,
    /// 95% paired-bootstrap interval of the mean difference.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Parses a `metric,seed,value` summary, skipping the aggregate rows.
pub fn parse_summary(text: &str) -> Result<SummaryTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some("metric,seed,value") => {}
        other => {
            return Err(RrpError::Parse(format!(
                "summary header should be 'metric,seed,value', got {other:?}"
            )))
        }
    }
    let mut table = SummaryTable::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(RrpError::Parse(format!("summary line {}: expected 3 fields", i + 2)));
        }
        if fields[1] == "mean" || fields[1] == "std" {
            continue;
        }
        let seed: u64 = fields[1]
            .parse()
            .map_err(|_| RrpError::Parse(format!("summary line {}: bad seed '{}'", i + 2, fields[1])))?;
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| RrpError::Parse(format!("summary line {}: bad value '{}'", i + 2, fields[2])))?;
        table.entry(fields[0].to_string()).or_default().insert(seed, value);
    }
    Ok(table)
}

pub fn load_summary(path: &Path) -> Result<SummaryTable> {
    let text = std::fs::read_to_string(path).map_err(|e| RrpError::io(path, e))?;
    parse_summary(&text)
}

/// Paired comparison of every metric present in both summaries.
/// The bootstrap uses a fixed stream, so verdicts are reproducible.
pub fn compare_runs(rrp: &SummaryTable, baseline: &SummaryTable) -> Result<Vec<MetricVerdict>> {
    let mut verdicts = Vec::new();
    for (metric, a) in rrp {
        let Some(b) = baseline.get(metric) else { continue };
        if a.keys().ne(b.keys()) {
            return Err(RrpError::invalid(format!(
                "metric '{metric}': seed sets differ ({:?} vs {:?})",
                a.keys().collect::<Vec<_>>(),
                b.keys().collect::<Vec<_>>()
            )));
        }
        let diffs: Vec<f64> = a.iter().map(|(s, v)| v - b[s]).collect();
        if diffs.is_empty() {
            continue;
        }
        let n = diffs.len();
        let wins = diffs.iter().filter(|d| **d > 0.0).count();
        let mean = diffs.iter().sum::<f64>() / n as f64;
        let mut rng = SeededRng::new(0);
        let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| (0..n).map(|_| diffs[rng.below(n)]).sum::<f64>() / n as f64)
            .collect();
        means.sort_by(f64::total_cmp);
        let at = |q: f64| means[((q * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize).min(BOOTSTRAP_RESAMPLES - 1)];
        verdicts.push(MetricVerdict {
            metric: metric.clone(),
            n_seeds: n,
            fraction_wins: wins as f64 / n as f64,
            mean_difference: mean,
            ci_low: at(0.025),
            ci_high: at(0.975),
        });
    }
    if verdicts.is_empty() {
        return Err(RrpError::invalid("the summaries share no metrics"));
    }
    Ok(verdicts)
}

pub fn verdicts_csv(verdicts: &[MetricVerdict]) -> String {
    let mut csv = Csv::new(&[
        "metric",
        "n_seeds",
        "fraction_wins",
        "mean_difference",
        "ci_low",
        "ci_high",
    ]);
    for v in verdicts {
        csv.row(&[
            v.metric.clone(),
            v.n_seeds.to_string(),
            num(v.fraction_wins),
            num(v.mean_difference),
            num(v.ci_low),
            num(v.ci_high),
        ]);
    }
    csv.into_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: &[f64]) -> SummaryTable {
        let mut t = SummaryTable::new();
        t.insert(
            "m".into(),
            values.iter().enumerate().map(|(i, v)| (i as u64, *v)).collect(),
        );
        t
    }

    #[test]
    fn identical_inputs() {
        let a = table(&[1.0, 2.0, 3.0]);
        let v = &compare_runs(&a, &a).unwrap()[0];
        assert_eq!(v.fraction_wins, 0.0);
        assert_eq!(v.mean_difference, 0.0);
        assert_eq!((v.ci_low, v.ci_high), (0.0, 0.0));
    }

    #[test]
    fn seed_mismatch_rejected() {
        let a = table(&[1.0, 2.0]);
        let b = table(&[1.0, 2.0, 3.0]);
        assert!(matches!(compare_runs(&a, &b), Err(RrpError::InvalidArgument(_))));
    }

    #[test]
    fn parse_skips_aggregates() {
        let t = parse_summary("metric,seed,value\nm,0,1.5\nm,1,2\nm,mean,1.75\nm,std,0.3\n").unwrap();
        assert_eq!(t["m"].len(), 2);
        assert_eq!(t["m"][&1], 2.0);
        assert!(parse_summary("a,b\n").is_err());
    }
}
