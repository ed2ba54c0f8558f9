//! Monte-Carlo check of how label noise in one SGD step widens output variance.
//!
//! Two one-step SGD updates start from the same `θ₀` on the same mini-batch:
//! one against the clean labels `y_i`, one against `y_i + ε_i` with
//! `ε_i ~ N(0, σ²I)`. The oracle measures `Tr(C)` of the outputs over the
//! whole data set after each update and compares the expected increase with
//! two closed forms built from `M(x, x′) = J(x)·J(x′)ᵀ` at `θ₀`:
//!
//! * the factored form `(α²Bσ²/N)·Σ_j ‖A_j‖²_F` with
//!   `A_j = (1/B)Σ_i M(x_j,x_i) − (1/BN)Σ_n Σ_i M(x_n,x_i)`;
//! * the per-sample form `(α²σ²/(B²N))·Σ_j Σ_i ‖M(x_j,x_i) − M̄_i‖²_F` with
//!   `M̄_i = (1/N)Σ_n M(x_n,x_i)`, which is what the first-order expansion of
//!   `f` around `θ₀` yields without collapsing the per-sample noise terms.

use crate::diagnostics::variance::output_variance;
use crate::error::{Result, RrpError};
use crate::nn::{DenseNet, LabeledBatch};
use crate::noise::sample_gaussian;
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Report {
    pub n: usize,
    pub batch_size: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub n_draws: usize,
    /// `Tr(C¹)` after the clean update.
    pub trace_clean: f64,
    /// Monte-Carlo estimate of `E_ε[Tr(C²)]`.
    pub trace_noisy_mean: f64,
    /// `E_ε[Tr(C²)] − Tr(C¹)`.
    pub empirical_increment: f64,
    pub increment_stderr: f64,
    /// `(α²Bσ²/N)·Σ_j Tr(A_j A_jᵀ)`.
    pub analytic_increment: f64,
    /// `(α²σ²/(B²N))·Σ_j Σ_i ‖M(x_j,x_i) − M̄_i‖²_F`.
    pub per_sample_increment: f64,
    /// `‖E_ε[f̄²] − f̄¹‖`.
    pub mean_drift: f64,
    /// Standard error of the drift estimate (root-sum-square over outputs).
    pub drift_stderr: f64,
    /// All `A_j` vanish, so no comparison is meaningful.
    pub trivial: bool,
}

impl Lemma1Report {
    /// `|empirical − analytic| / analytic` for the factored form.
    pub fn relative_gap(&self) -> f64 {
        (self.empirical_increment - self.analytic_increment).abs() / self.analytic_increment
    }

    /// `|empirical − per-sample| / per-sample`.
    pub fn per_sample_relative_gap(&self) -> f64 {
        (self.empirical_increment - self.per_sample_increment).abs() / self.per_sample_increment
    }
}

fn outputs(net: &DenseNet, data: &LabeledBatch) -> Result<Vec<Vec<f64>>> {
    data.inputs().iter().map(|x| net.forward(x)).collect()
}

/// Runs the clean update once and `n_draws` noisy updates.
///
/// Each draw is evaluated at `ε` and `−ε`; the trace estimate averages the
/// pair, which cancels the term linear in `ε` while leaving its expectation
/// unchanged. The drift estimate uses only the `+ε` member, so its draws stay
/// independent.
pub fn lemma1_oracle(
    net: &DenseNet,
    data: &LabeledBatch,
    minibatch: &[usize],
    alpha: f64,
    sigma: f64,
    n_draws: usize,
    rng: &mut SeededRng,
) -> Result<Lemma1Report> {
    let n = data.len();
    let b = minibatch.len();
    if n < 2 {
        return Err(RrpError::invalid("the data set needs at least 2 points"));
    }
    if b == 0 {
        return Err(RrpError::invalid("the mini-batch must be non-empty"));
    }
    if !(alpha > 0.0) {
        return Err(RrpError::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if !(sigma >= 0.0) {
        return Err(RrpError::invalid(format!("sigma must be nonnegative, got {sigma}")));
    }
    if n_draws < 2 {
        return Err(RrpError::invalid("need at least 2 noise draws"));
    }
    let batch = data.select(minibatch)?;
    let m = net.output_dim();

    let clean = net.sgd_step(&net.grad(&batch)?, alpha)?;
    let clean_report = output_variance(&outputs(&clean, data)?)?;

    // closed forms from Jacobians at θ₀
    let jacobians = data
        .inputs()
        .iter()
        .map(|x| net.jacobian(x))
        .collect::<Result<Vec<_>>>()?;
    let mut kernel = vec![vec![Vec::new(); b]; n]; // kernel[j][i] = M(x_j, x_{batch i})
    for (j, jj) in jacobians.iter().enumerate() {
        for (i, &bi) in minibatch.iter().enumerate() {
            kernel[j][i] = jj.times_transpose(&jacobians[bi]);
        }
    }
    let mut kernel_mean = vec![vec![0.0; m * m]; b]; // M̄_i
    for row in &kernel {
        for (i, mat) in row.iter().enumerate() {
            for (acc, v) in kernel_mean[i].iter_mut().zip(mat) {
                *acc += v / n as f64;
            }
        }
    }
    let mut a_norms = 0.0;
    let mut per_sample = 0.0;
    for row in &kernel {
        let mut a_j = vec![0.0; m * m];
        for (i, mat) in row.iter().enumerate() {
            for k in 0..m * m {
                let d = mat[k] - kernel_mean[i][k];
                a_j[k] += d / b as f64;
                per_sample += d * d;
            }
        }
        a_norms += a_j.iter().map(|v| v * v).sum::<f64>();
    }
    let analytic = alpha * alpha * b as f64 * sigma * sigma / n as f64 * a_norms;
    let per_sample = alpha * alpha * sigma * sigma / ((b * b * n) as f64) * per_sample;
    let trivial = a_norms == 0.0;

    let mut inc_sum = 0.0;
    let mut inc_sq = 0.0;
    let mut drift_sum = vec![0.0; m];
    let mut drift_sq = vec![0.0; m];
    let mut noisy_labels: Vec<Vec<f64>> = batch.labels().to_vec();
    let mut mirrored_labels = noisy_labels.clone();
    for _ in 0..n_draws {
        for (k, y) in batch.labels().iter().enumerate() {
            for c in 0..m {
                let eps = sample_gaussian(rng, sigma)?;
                noisy_labels[k][c] = y[c] + eps;
                mirrored_labels[k][c] = y[c] - eps;
            }
        }
        let plus = LabeledBatch::new(batch.inputs().to_vec(), noisy_labels.clone())?;
        let minus = LabeledBatch::new(batch.inputs().to_vec(), mirrored_labels.clone())?;
        let net_plus = net.sgd_step(&net.grad(&plus)?, alpha)?;
        let net_minus = net.sgd_step(&net.grad(&minus)?, alpha)?;
        let report_plus = output_variance(&outputs(&net_plus, data)?)?;
        let report_minus = output_variance(&outputs(&net_minus, data)?)?;
        // accumulate the increment, not the trace, to keep the variance well conditioned
        let inc = 0.5 * (report_plus.trace + report_minus.trace) - clean_report.trace;
        inc_sum += inc;
        inc_sq += inc * inc;
        for c in 0..m {
            let d = report_plus.mean[c] - clean_report.mean[c];
            drift_sum[c] += d;
            drift_sq[c] += d * d;
        }
    }
    let draws = n_draws as f64;
    let inc_mean = inc_sum / draws;
    let inc_var = (inc_sq / draws - inc_mean * inc_mean).max(0.0) * draws / (draws - 1.0);
    let mut drift_norm = 0.0;
    let mut drift_var = 0.0;
    for c in 0..m {
        let mean = drift_sum[c] / draws;
        drift_norm += mean * mean;
        drift_var += (drift_sq[c] / draws - mean * mean).max(0.0) / (draws - 1.0);
    }

    Ok(Lemma1Report {
        n,
        batch_size: b,
        alpha,
        sigma,
        n_draws,
        trace_clean: clean_report.trace,
        trace_noisy_mean: clean_report.trace + inc_mean,
        increment_stderr: (inc_var / draws).sqrt(),
        empirical_increment: inc_mean,
        analytic_increment: analytic,
        per_sample_increment: per_sample,
        mean_drift: drift_norm.sqrt(),
        drift_stderr: drift_var.sqrt(),
        trivial,
    })
}

/// Random data set and mini-batch for the oracle: inputs uniform in `[−1, 1]`,
/// labels standard normal, and the first `batch_size` points as the batch.
pub fn synthetic_problem(
    layer_sizes: &[usize],
    n: usize,
    batch_size: usize,
    rng: &mut SeededRng,
) -> Result<(DenseNet, LabeledBatch, Vec<usize>)> {
    if batch_size > n {
        return Err(RrpError::invalid("mini-batch larger than the data set"));
    }
    let net = DenseNet::new(layer_sizes, rng)?;
    let inputs = (0..n)
        .map(|_| (0..net.input_dim()).map(|_| rng.uniform_range(-1.0, 1.0)).collect())
        .collect();
    let labels = (0..n)
        .map(|_| (0..net.output_dim()).map(|_| rng.standard_normal()).collect())
        .collect();
    Ok((net, LabeledBatch::new(inputs, labels)?, (0..batch_size).collect()))
}
